"""Input validation helpers built on scikit-learn's checkers."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array, check_consistent_length

from .exceptions import InputError


def check_record_arrays(Q, v, l_hat, n_features=None):
    """Validate a (features, validation loss, training loss) triple.

    ``v`` may be ``None`` for prediction-time calls. Returns float arrays with
    ``Q`` of shape ``(m, k)``.
    """
    try:
        Q = check_array(Q, ensure_2d=False, dtype=float)
        if Q.ndim == 1:
            Q = Q[:, None]
        l_hat = check_array(l_hat, ensure_2d=False, dtype=float).ravel()
        if v is not None:
            v = check_array(v, ensure_2d=False, dtype=float).ravel()
            check_consistent_length(Q, v, l_hat)
        else:
            check_consistent_length(Q, l_hat)
    except ValueError as e:
        raise InputError(str(e)) from None
    if n_features is not None and Q.shape[1] != n_features:
        raise InputError(f"expected {n_features} features, got {Q.shape[1]}")
    return Q, v, l_hat


def check_box(box, k):
    if box is None:
        return None
    if box.k != k:
        raise InputError(f"box has {box.k} dimensions, expected {k}")
    return box


def check_lambda(lam, k=None, nonnegative=False):
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.ndim != 1:
        raise InputError("lambda must be a vector")
    if k is not None and lam.size != k:
        raise InputError(f"lambda has length {lam.size}, expected {k}")
    if not np.all(np.isfinite(lam)):
        raise InputError("lambda must be finite")
    if nonnegative and np.any(lam < 0):
        raise InputError(f"lambda must be nonnegative, got {lam.tolist()}")
    return lam
