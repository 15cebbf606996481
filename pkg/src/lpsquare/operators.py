"""The area integral mu_S and the g*_lambda-type function mu_* with variable kernels.

    mu_S(f)(x)^2 = int int_{|y-x|<t} |F(y,t)|^2 dy dt / t^(n+2 rho+1)
    mu_*(f)(x)^2 = int int (t/(t+|x-y|))^(lam n) |F(y,t)|^2 dy dt / t^(n+2 rho+1)

with F(y, t) the truncated variable-kernel integral of ``quad``.  Values are
``Estimate`` pairs (value, uncertainty).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_point, check_points
from .exceptions import LPSquareError, ParameterError
from .kernel import KernelSpec, get_kernel
from .quad import (Estimate, ProfileField, QuadPlan, blocks_of, cone_integral,
                   halfspace_weighted_integral)

OPERATORS = ("mu_s", "mu_star")
_EPS = 1e-12


@dataclass(frozen=True)
class OperatorParams:
    """Exponents of the operators and of the atom spaces.

    ``beta=None`` picks 0.9 times the admissible bound.  ``hardy=True`` adds
    the restrictions rho in (n/2, n) and lam > 2 used for Hardy-space inputs;
    ``operator`` selects whether the mu_* constraint beta < (lam-2)n/3
    applies.  ``allow_endpoint`` admits p = n/(n+beta).  With ``unsafe=True``
    violations are recorded in ``violations`` instead of raised.
    """

    n: int = 2
    rho: float = 1.5
    lam: float = 3.0
    alpha: float = 1.0
    beta: float = None
    p: float = 1.0
    hardy: bool = True
    operator: str = "both"
    allow_endpoint: bool = False
    unsafe: bool = False
    violations: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.operator not in OPERATORS + ("both",):
            raise ParameterError("operator in {mu_s, mu_star, both}",
                                 f"operator must be one of mu_s, mu_star, both; got {self.operator!r}")
        if self.beta is None:
            b = self.beta_bound()
            object.__setattr__(self, "beta", 0.9 * b if math.isfinite(b) and b > 0 else 0.0)
        found = self.check()
        if found and not self.unsafe:
            raise ParameterError(found[0], "inadmissible parameters: " + "; ".join(found))
        object.__setattr__(self, "violations", tuple(found))

    # ------------------------------------------------------------------
    @property
    def k(self):
        return self.n + 2 * self.rho + 1

    def beta_bound(self):
        b = min(0.5, self.alpha, self.rho - self.n / 2)
        if self.operator in ("mu_star", "both"):
            b = min(b, (self.lam - 2) * self.n / 3)
        return b

    @property
    def p_min(self):
        return self.n / (self.n + self.beta)

    @property
    def domination_constant(self):
        """Pointwise: mu_S <= 2^(lam n/2) mu_*."""
        return 2.0 ** (self.lam * self.n / 2)

    @property
    def norm_constant(self):
        """Norm chain constant 2^(lam n)."""
        return 2.0 ** (self.lam * self.n)

    @property
    def watermark(self):
        return "UNSAFE: out-of-range parameters" if self.violations else ""

    def check(self):
        """Violated constraints, each named by its failing inequality."""
        n, rho, lam, alpha, beta, p = self.n, self.rho, self.lam, self.alpha, self.beta, self.p
        bad = []
        if int(n) != n or n < 2:
            bad.append(f"n < 2 (n = {n})")
        if not 0 < rho < n:
            bad.append(f"rho outside (0, n) (rho = {rho})")
        elif self.hardy and rho <= n / 2:
            bad.append(f"rho <= n/2 ({rho} <= {n / 2})")
        if not lam > 1:
            bad.append(f"lambda <= 1 (lambda = {lam})")
        elif self.hardy and not lam > 2:
            bad.append(f"lambda <= 2 (lambda = {lam})")
        if not 0 < alpha <= 1:
            bad.append(f"alpha outside (0, 1] (alpha = {alpha})")
        if not beta > 0:
            bad.append(f"beta <= 0 (beta = {beta})")
        if beta >= rho - n / 2:
            bad.append(f"beta >= rho - n/2 ({beta} >= {rho - n / 2:g})")
        if beta >= 0.5:
            bad.append(f"beta >= 1/2 ({beta} >= 0.5)")
        if beta >= alpha:
            bad.append(f"beta >= alpha ({beta} >= {alpha})")
        if self.operator in ("mu_star", "both") and beta >= (lam - 2) * n / 3:
            bad.append(f"beta >= (lambda - 2)n/3 ({beta} >= {(lam - 2) * n / 3:g})")
        if beta > 0:
            pm = n / (n + beta)
            low_ok = p >= pm - _EPS if self.allow_endpoint else p > pm + _EPS
            if not low_ok:
                rel = "<" if self.allow_endpoint else "<="
                bad.append(f"p {rel} n/(n + beta) ({p} {rel} {pm:.6g})")
        if p > 1:
            bad.append(f"p > 1 (p = {p})")
        return bad

    def with_(self, **kw):
        return replace(self, violations=(), **kw)

    def as_dict(self):
        return {"n": self.n, "rho": self.rho, "lambda": self.lam, "alpha": self.alpha,
                "beta": self.beta, "p": self.p, "hardy": self.hardy, "operator": self.operator,
                "allow_endpoint": self.allow_endpoint, "unsafe": self.unsafe,
                "violations": list(self.violations)}


def resolve_kernel(kernel):
    if isinstance(kernel, KernelSpec):
        return kernel
    if isinstance(kernel, str):
        return get_kernel(kernel)
    raise LPSquareError(f"kernel must be a KernelSpec or a built-in id, got {type(kernel).__name__}")


def _is_zero(f):
    if f is None:
        return True
    return len(blocks_of(f)) == 0


# small identity-keyed cache so repeated point evaluations reuse one field
_FIELDS = []
_FIELD_CACHE_SIZE = 8


def field_for(kernel, f, rho, plan=None):
    plan = plan or QuadPlan()
    for entry in _FIELDS:
        k, ff, r, pl, fld = entry
        if k is kernel and ff is f and r == rho and pl == plan:
            return fld
    fld = ProfileField(kernel, f, rho, plan).fit_grid()
    _FIELDS.insert(0, (kernel, f, rho, plan, fld))
    del _FIELDS[_FIELD_CACHE_SIZE:]
    return fld


def _evaluate(tag, kernel, f, x, params, plan, check=True):
    kernel = resolve_kernel(kernel)
    x = check_point(x, kernel.dimension, "x")
    if _is_zero(f):
        return Estimate(0.0, 0.0)
    fld = field_for(kernel, f, params.rho, plan)
    if tag == "mu_s":
        sq = cone_integral(fld, x, check=check)
    elif tag == "mu_star":
        sq = halfspace_weighted_integral(fld, x, params.lam, check=check)
    else:
        raise LPSquareError(f"unknown operator {tag!r}")
    return sq.sqrt()


def mu_s(kernel, f, x, params=None, plan=None):
    """Area-integral square function at x, as an Estimate."""
    return _evaluate("mu_s", kernel, f, x, params or OperatorParams(), plan)


def mu_star(kernel, f, x, params=None, plan=None):
    """Weighted (g*_lambda-type) square function at x, as an Estimate."""
    return _evaluate("mu_star", kernel, f, x, params or OperatorParams(), plan)


@dataclass
class GridResult:
    points: np.ndarray
    values: np.ndarray
    uncertainties: np.ndarray
    errors: dict

    def __len__(self):
        return len(self.values)

    def rows(self):
        for i, (pt, v, u) in enumerate(zip(self.points, self.values, self.uncertainties)):
            yield i, pt, v, u, self.errors.get(i, "")


def evaluate_on_grid(operator_tag, kernel, f, grid, params=None, plan=None):
    """Values and uncertainties at each grid point; per-point errors are collected."""
    if operator_tag not in OPERATORS:
        raise LPSquareError(f"unknown operator {operator_tag!r}")
    kernel = resolve_kernel(kernel)
    params = params or OperatorParams()
    pts = check_points(grid, kernel.dimension, "grid")
    vals = np.zeros(len(pts))
    unc = np.zeros(len(pts))
    errors = {}
    for i, x in enumerate(pts):
        try:
            e = _evaluate(operator_tag, kernel, f, x, params, plan)
            vals[i], unc[i] = e.value, e.uncertainty
        except LPSquareError as exc:
            vals[i] = unc[i] = np.nan
            errors[i] = f"{type(exc).__name__}: {exc}"
    return GridResult(pts, vals, unc, errors)


# --------------------------------------------------------------------------
# estimator interface


class _SquareFunction(TransformerMixin, BaseEstimator):
    _tag = None

    def __init__(self, kernel="circle-harmonic-1", rho=1.5, lam=3.0, alpha=1.0, beta=None, p=1.0,
                 plan=None, strict=True):
        self.kernel = kernel
        self.rho = rho
        self.lam = lam
        self.alpha = alpha
        self.beta = beta
        self.p = p
        self.plan = plan
        self.strict = strict

    def _make_params(self, n):
        return OperatorParams(n=n, rho=self.rho, lam=self.lam, alpha=self.alpha, beta=self.beta,
                              p=self.p, operator=self._tag, unsafe=not self.strict)

    def fit(self, f, y=None):
        """Build the inner field of ``f`` (an Atom or BlockSum) on the y-grid."""
        k = resolve_kernel(self.kernel)
        self.kernel_ = k
        self.params_ = self._make_params(k.dimension)
        self.n_features_in_ = k.dimension
        self.zero_ = _is_zero(f)
        self.field_ = None if self.zero_ else ProfileField(k, f, self.rho, self.plan).fit_grid()
        return self

    def _one(self, x):
        if self.zero_:
            return Estimate(0.0, 0.0)
        if self._tag == "mu_s":
            return cone_integral(self.field_, x).sqrt()
        return halfspace_weighted_integral(self.field_, x, self.lam).sqrt()

    def predict_with_uncertainty(self, X):
        check_is_fitted(self, "params_")
        X = check_points(X, self.n_features_in_, "X")
        vals = np.zeros(len(X))
        unc = np.zeros(len(X))
        for i, x in enumerate(X):
            e = self._one(x)
            vals[i], unc[i] = e.value, e.uncertainty
        return vals, unc

    def predict(self, X):
        return self.predict_with_uncertainty(X)[0]

    def transform(self, X):
        return self.predict(X)[:, None]


class AreaIntegral(_SquareFunction):
    """mu_S as an estimator: ``fit(atom)`` then ``predict(points)``."""

    _tag = "mu_s"


class GStarFunction(_SquareFunction):
    """mu_* as an estimator: ``fit(atom)`` then ``predict(points)``."""

    _tag = "mu_star"


def make_operator(tag, **kw):
    if tag == "mu_s":
        return AreaIntegral(**kw)
    if tag == "mu_star":
        return GStarFunction(**kw)
    raise LPSquareError(f"unknown operator {tag!r}")
