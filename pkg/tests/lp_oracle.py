"""Brute-force LP oracle: enumerate every constraint-intersection vertex.

Deliberately shares no code with the simplex solver. Unboundedness is detected
by boxing the problem at +-M and at +-2M: a bounded LP has the same optimum
under both boxes, an unbounded one keeps improving.
"""

import itertools

import numpy as np

from learnreg.lp import LinearProgram, LpStatus, Relation

BOX = 1e6


def _as_inequalities(lp: LinearProgram, box):
    n = lp.n_vars
    eq_rows, eq_rhs, G, h, is_box = [], [], [], [], []
    for con in lp.constraints:
        if con.relation is Relation.EQ:
            eq_rows.append(con.row)
            eq_rhs.append(con.rhs)
        elif con.relation is Relation.LE:
            G.append(con.row), h.append(con.rhs), is_box.append(False)
        else:
            G.append(-con.row), h.append(-con.rhs), is_box.append(False)
    for j, (lo, hi) in enumerate(lp.var_bounds):
        e = np.zeros(n)
        e[j] = 1.0
        if np.isfinite(lo):
            G.append(-e), h.append(-lo), is_box.append(False)
        else:
            G.append(-e), h.append(box), is_box.append(True)
        if np.isfinite(hi):
            G.append(e), h.append(hi), is_box.append(False)
        else:
            G.append(e), h.append(box), is_box.append(True)
    return (
        np.array(eq_rows).reshape(-1, n),
        np.array(eq_rhs),
        np.array(G).reshape(-1, n),
        np.array(h),
        np.array(is_box),
    )


def _best_vertex(lp: LinearProgram, box):
    """Best objective over vertices of the boxed LP; also whether a box face is active there."""
    n = lp.n_vars
    E, e, G, h, is_box = _as_inequalities(lp, box)
    need = n - E.shape[0]
    if need < 0:
        return None, False
    subsets = np.array(list(itertools.combinations(range(G.shape[0]), need)), dtype=int)
    if subsets.size == 0:
        subsets = np.zeros((1, 0), dtype=int)
    mats = np.concatenate(
        [np.broadcast_to(E, (len(subsets),) + E.shape), G[subsets]], axis=1
    )
    rhs = np.concatenate([np.broadcast_to(e, (len(subsets), e.size)), h[subsets]], axis=1)
    ok = np.linalg.cond(mats) < 1e10
    if not ok.any():
        return None, False
    X = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(X @ G.T <= h + 1e-9 * (1 + np.abs(h)), axis=1)
    if E.shape[0]:
        feas &= np.all(np.abs(X @ E.T - e) <= 1e-9 * (1 + np.abs(e)), axis=1)
    if not feas.any():
        return None, False
    X = X[feas]
    vals = X @ lp.objective
    best = vals.min()
    near = X[vals <= best + 1e-9 * (1 + abs(best))]
    slack = h - near @ G.T
    box_active = bool(np.any((np.abs(slack) <= 1e-6 * box) & is_box))
    return float(best), box_active


def brute_force(lp: LinearProgram):
    """Return (status, objective or None) by vertex enumeration."""
    best, box_active = _best_vertex(lp, BOX)
    if best is None:
        return LpStatus.INFEASIBLE, None
    if box_active:
        best2, _ = _best_vertex(lp, 2 * BOX)
        if best2 < best - 1e-6 * (1 + abs(best)):
            return LpStatus.UNBOUNDED, None
    return LpStatus.OPTIMAL, best


def random_lp(rng, max_vars=6, max_cons=10):
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, max_cons + 1))
    cons = []
    n_eq = 0
    for _ in range(m):
        row = rng.uniform(-1, 1, n).round(3)
        rel = (Relation.LE, Relation.LE, Relation.GE, Relation.EQ)[int(rng.integers(0, 4))]
        if rel is Relation.EQ:
            if n_eq >= n - 1:
                rel = Relation.LE
            else:
                n_eq += 1
        cons.append((row, rel, round(float(rng.uniform(-1, 3)), 3)))
    bounds = []
    for _ in range(n):
        kind = rng.integers(0, 4)
        if kind == 0:
            bounds.append((0.0, np.inf))
        elif kind == 1:
            lo = round(float(rng.uniform(-2, 0)), 2)
            bounds.append((lo, lo + round(float(rng.uniform(0.5, 3)), 2)))
        elif kind == 2:
            bounds.append((-np.inf, round(float(rng.uniform(0, 2)), 2)))
        else:
            bounds.append((-np.inf, np.inf))
    c = rng.uniform(-1, 1, n).round(3)
    return LinearProgram(c, tuple(cons), tuple(bounds))
