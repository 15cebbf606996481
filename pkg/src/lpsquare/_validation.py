"""Input validation helpers shared by the estimators and checks."""

import math

import numpy as np
from sklearn.utils import check_array

from .exceptions import DomainError


def check_points(X, n=None, name="X"):
    """Return ``X`` as a float array of shape (m, n).

    A single point of shape (n,) is promoted to (1, n).  Empty input is
    allowed and comes back with shape (0, n).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.size and (n is None or X.size == n):
        X = X[None, :]
    if X.size == 0:
        return np.zeros((0, n or (X.shape[-1] if X.ndim == 2 else 0)))
    X = check_array(X, ensure_2d=True, dtype=float)
    if n is not None and X.shape[1] != n:
        raise DomainError(f"{name} has dimension {X.shape[1]}, expected {n}")
    return X


def check_point(x, n=None, name="x"):
    x = np.asarray(x, dtype=float).reshape(-1)
    if n is not None and x.size != n:
        raise DomainError(f"{name} has dimension {x.size}, expected {n}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite")
    return x


def check_positive(value, name, strict=True):
    value = float(value)
    if not math.isfinite(value) or value < 0 or (strict and value == 0):
        raise DomainError(f"{name} must be {'>' if strict else '>='} 0, got {value}")
    return value


def check_exponent_p(p):
    p = float(p)
    if not 0 < p <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    return p


def check_unit_interval(value, name):
    value = float(value)
    if not 0 < value <= 1:
        raise DomainError(f"{name} must lie in (0, 1], got {value}")
    return value
