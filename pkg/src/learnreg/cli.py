"""Command-line front end: ``learnreg {learn,tune,slack-table}``.

Exit codes: 0 success, 1 input error, 2 no feasible regularizer,
3 oracle failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import os
import sys

import numpy as np

from .exceptions import InputError, NoFeasibleRegularizer, OracleFailure, TrainingError
from .experiments import PROBLEMS, grids_from_json, iter_tuning, slack_table
from .learn import learn_lin_reg
from .problems.logreg import LogRegConfig
from .records import BoxConstraint, read_jsonl
from .tune import SamplerSpec, csv_header, history_rows

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_ORACLE = 0, 1, 2, 3
SLACK_TABLE_HEADER = ["regularizer", "max_slack", "max_adj_slack", "min_test_loss", "max_accuracy"]
LEARN_CSV_HEADER = ["alpha", "lambda", "i_star_id", "total_slack", "alpha_degenerate"]


def _load_json_arg(value: str):
    """A JSON literal, or a path to a JSON file."""
    if value is None:
        return None
    if os.path.exists(value):
        with open(value) as fh:
            value = fh.read()
    try:
        return json.loads(value)
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON argument: {e.msg}") from None


def parse_box(obj) -> BoxConstraint:
    """Accept ``{"dims": [{"low", "high"}, ...]}`` or ``{"lower": [...], "upper": [...]}``.

    ``null`` bounds mean unbounded on that side.
    """

    def num(x, default):
        return default if x is None else float(x)

    try:
        if "dims" in obj:
            lo = [num(d.get("low"), -np.inf) for d in obj["dims"]]
            hi = [num(d.get("high"), np.inf) for d in obj["dims"]]
        else:
            lo = [num(x, -np.inf) for x in obj["lower"]]
            hi = [num(x, np.inf) for x in obj["upper"]]
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise InputError(f"bad box: {e}") from None
    return BoxConstraint(lo, hi)


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _fmt(x):
    return "" if x is None else repr(float(x))


def cmd_learn(args) -> int:
    records = read_jsonl(args.records)
    box = parse_box(_load_json_arg(args.box)) if args.box else None
    res = learn_lin_reg(records, box)
    out = res.to_json()
    with _output(args.out) as fh:
        if args.format == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(LEARN_CSV_HEADER)
            w.writerow([_fmt(out["alpha"]), " ".join(_fmt(x) for x in out["lambda"]), out["i_star_id"], _fmt(out["total_slack"]), str(out["alpha_degenerate"]).lower()])
        else:
            fh.write(json.dumps(out) + "\n")
    return EXIT_OK


def cmd_tune(args) -> int:
    spec = SamplerSpec.from_json(_load_json_arg(args.spec)) if args.spec else None
    cfg = LogRegConfig.from_json(_load_json_arg(args.logreg_config)) if args.logreg_config else None
    histories = iter_tuning(
        args.problem,
        args.method,
        args.budget,
        args.runs,
        seed=args.seed,
        spec=spec,
        informed=args.informed,
        n_initial=args.n_initial,
        range_policy=args.range_policy,
        logreg_config=cfg,
        workers=args.workers,
    )
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n") if args.format == "csv" else None
        rows_json = []
        header_done = False

        def emit(h):
            nonlocal header_done
            if writer is not None:
                if not header_done:
                    writer.writerow(csv_header(h.k))
                    header_done = True
                writer.writerows(history_rows(h))
                fh.flush()
            else:
                rows_json.extend(dict(zip(csv_header(h.k), row)) for row in history_rows(h))

        try:
            for h in histories:
                emit(h)
        except OracleFailure as e:
            if e.history is not None and len(e.history):
                emit(e.history)
            if writer is None:
                fh.write(json.dumps(rows_json) + "\n")
            raise
        if writer is None:
            fh.write(json.dumps(rows_json) + "\n")
    return EXIT_OK


def cmd_slack_table(args) -> int:
    grids = grids_from_json(_load_json_arg(args.grid)) if args.grid else None
    cfg = LogRegConfig.from_json(_load_json_arg(args.logreg_config)) if args.logreg_config else None
    fits = slack_table(args.problem, grids, seed=args.seed, logreg_config=cfg)
    with _output(args.out) as fh:
        if args.format == "json":
            fh.write(json.dumps([f.row() for f in fits]) + "\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SLACK_TABLE_HEADER)
            for f in fits:
                r = f.row()
                w.writerow([r["regularizer"]] + [_fmt(r[c]) for c in SLACK_TABLE_HEADER[1:]])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="root random seed (default 42)")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="learnreg", description="Learn and tune linear regularizers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", parents=[common], help="fit a bound to a JSONL record file")
    p.add_argument("--records", required=True, help="JSONL file of model records")
    p.add_argument("--box", help="feasible lambda box (JSON literal or file)")
    p.set_defaults(func=cmd_learn, default_format="json")

    p = sub.add_parser("tune", parents=[common], help="run TuneReg or random search")
    p.add_argument("--problem", choices=PROBLEMS, required=True)
    p.add_argument("--method", choices=("tunereg", "random"), default="tunereg")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--spec", help="sampler spec JSON: {\"dims\": [{\"low\", \"high\", \"scale\"}]}")
    p.add_argument("--informed", action="store_true", help="log scaling and restricted ranges")
    p.add_argument("--n-initial", type=int, default=None, help="random initial points (default k+1)")
    p.add_argument("--range-policy", choices=("accept", "enforce"), default="accept")
    p.add_argument("--logreg-config", help="LogRegConfig JSON")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_tune, default_format="csv")

    p = sub.add_parser("slack-table", parents=[common], help="max slack / adjusted slack per regularizer")
    p.add_argument("--problem", choices=PROBLEMS, required=True)
    p.add_argument("--grid", help="grids JSON: {\"name\": [values] | {\"low\", \"high\", \"n\", \"scale\"}}")
    p.add_argument("--logreg-config", help="LogRegConfig JSON")
    p.set_defaults(func=cmd_slack_table, default_format="csv")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except NoFeasibleRegularizer as e:
        return _fail(EXIT_INFEASIBLE, f"no feasible regularizer: {e}")
    except (OracleFailure, TrainingError) as e:
        return _fail(EXIT_ORACLE, f"oracle failure: {e}")
    except (InputError, OSError) as e:
        return _fail(EXIT_INPUT, str(e))


def _fail(code: int, message: str) -> int:
    print(f"learnreg: error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
