"""Numerical checks of the kernel-difference lemma, atom decay, L^p and weak-L^p bounds,
and pointwise cone domination.

Every check returns a three-valued verdict: ``"pass"``, ``"fail"``, or
``"inconclusive"`` when the outcome is limited by resolution rather than by
the inequality itself.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_point, check_positive
from .atoms import AtomProfile, build_atom, dilated_cover, level_of
from .exceptions import DomainError, WindowError
from .kernel import (DEFAULT_DELTA_GRID, ModulusTable, _loglog_eval, check_uniform_l2, evaluate,
                     omega2)
from .operators import OperatorParams, evaluate_on_grid, field_for, resolve_kernel
from .quad import QuadPlan, blocks_of, cone_integral, halfspace_weighted_integral
from .sphere import ball_volume, gauss_on, sphere_rule, surface_area

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
SLOPE_TOL = 0.15
STABILITY = 2.0
WEAK_STABILITY = 0.25

# bulk window sweeps use a lighter outer grid than single-point evaluations
WINDOW_PLAN = QuadPlan(y_angular=64, radial_panels=1)


def combine(verdicts):
    verdicts = list(verdicts)
    if FAIL in verdicts:
        return FAIL
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return PASS


# --------------------------------------------------------------------------
# kernel-difference lemma


@dataclass(frozen=True)
class Lemma25Case:
    """Annulus R <= |y| < 2R, evaluation shift h, offset z with |z| < ratio_beta R."""

    R: float
    h: tuple
    z: tuple
    ratio_beta: float = 0.25

    def __post_init__(self):
        check_positive(self.R, "R")
        if not 0 < self.ratio_beta < 0.5:
            raise DomainError("ratio_beta must lie in (0, 1/2)")
        z = np.asarray(self.z, dtype=float)
        if np.size(self.h) != z.size:
            raise DomainError("h and z must have the same dimension")
        if not np.linalg.norm(z) < self.ratio_beta * self.R:
            raise DomainError(f"|z| = {np.linalg.norm(z):g} must be < ratio_beta R = {self.ratio_beta * self.R:g}")

    def dilated(self, factor=2.0):
        return Lemma25Case(self.R * factor, tuple(np.asarray(self.h) * factor),
                           tuple(np.asarray(self.z) * factor), self.ratio_beta)


@dataclass
class Lemma25Result:
    lhs: float
    rhs: float
    ratio: float
    anomaly: bool = False


def _K(kernel, x, w, rho):
    n = w.shape[-1]
    return evaluate(kernel, x, w) * np.linalg.norm(w, axis=-1) ** (rho - n)


def lemma25_lhs(kernel, case, rho=1.5, radial=48, angular=512):
    """(int_{R<=|y|<2R} |K(y+h, y-z) - K(y+h, y)|^2 dy)^(1/2) by polar Gauss x trapezoid."""
    kernel = resolve_kernel(kernel)
    n = kernel.dimension
    h = check_point(case.h, n, "h")
    z = check_point(case.z, n, "z")
    if not np.any(z):
        return 0.0
    s, ws = gauss_on(case.R, 2 * case.R, radial)
    dirs, wd = sphere_rule(n, angular if n == 2 else 41)
    y = (s[:, None, None] * dirs[None]).reshape(-1, n)
    w = ((ws * s ** (n - 1))[:, None] * wd[None]).reshape(-1)
    diff = _K(kernel, y + h, y - z, rho) - _K(kernel, y + h, y, rho)
    return math.sqrt(float(w @ diff ** 2))


def lemma25_lhs_dense(kernel, case, rho=1.5, cells=1024):
    """Cartesian midpoint oracle for ``lemma25_lhs`` (n = 2)."""
    kernel = resolve_kernel(kernel)
    R = case.R
    ax = (np.arange(cells) + 0.5) / cells * 4 * R - 2 * R
    Y = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)
    r = np.linalg.norm(Y, axis=1)
    Y = Y[(r >= R) & (r < 2 * R)]
    h, z = np.asarray(case.h, float), np.asarray(case.z, float)
    diff = _K(kernel, Y + h, Y - z, rho) - _K(kernel, Y + h, Y, rho)
    return math.sqrt(float((diff ** 2).sum()) * (4 * R / cells) ** 2)


def _omega_integral(table, a, b, m=32):
    """int_a^b omega2(delta)/delta d delta, Gauss in log delta."""
    if a <= 0 or b <= a:
        return 0.0
    u, w = gauss_on(math.log(a), math.log(b), m)
    return float(w @ table(np.exp(u)))


def lemma25_check(kernel, case, plan=None, table=None, rho=1.5, omega_norm=None):
    """lhs, rhs and their ratio for one case.

    rhs = R^(rho-n/2) (||Omega|| |z|/R + int_{2|z|/R}^{4|z|/R} omega2(d)/d dd),
    where ||Omega|| is the uniform L^2(S^{n-1}) bound of the kernel.
    """
    kernel = resolve_kernel(kernel)
    n = kernel.dimension
    z = np.linalg.norm(check_point(case.z, n, "z"))
    R = case.R
    lhs = lemma25_lhs(kernel, case, rho)
    if table is None:
        grid = np.geomspace(2.0 ** -12, 2.0, 40)
        table = omega2(kernel, grid)
    if omega_norm is None:
        res = check_uniform_l2(kernel)
        omega_norm = res.analytic_bound if res.analytic_bound is not None else res.sampled_max
    rhs = R ** (rho - n / 2) * (omega_norm * z / R + _omega_integral(table, 2 * z / R, 4 * z / R))
    if rhs == 0:
        return Lemma25Result(lhs, rhs, 0.0 if lhs <= 1e-14 else math.inf, anomaly=lhs > 1e-14)
    return Lemma25Result(lhs, rhs, lhs / rhs)


DEFAULT_LEMMA25_CASES = (
    Lemma25Case(1.0, (0.0, 0.0), (0.2, 0.0)),
    Lemma25Case(2.0, (0.5, -0.3), (0.0, 0.3)),
    Lemma25Case(4.0, (0.0, 0.0), (0.5, 0.0)),
    Lemma25Case(3.0, (1.0, 1.0), (0.35, 0.35)),
    Lemma25Case(8.0, (-2.0, 0.5), (0.1, -0.6)),
)


@dataclass
class Lemma25Study:
    cases: list
    results: list
    dilated_results: list
    C_star: float
    max_change: float
    verdict: str


def lemma25_study(kernel, cases=DEFAULT_LEMMA25_CASES, rho=1.5, table=None, tol=0.25):
    """Ratios for each case and for its (2R, 2z) dilate; C* = max ratio."""
    kernel = resolve_kernel(kernel)
    if table is None:
        table = omega2(kernel, np.geomspace(2.0 ** -12, 2.0, 40))
    res = check_uniform_l2(kernel)
    norm = res.analytic_bound if res.analytic_bound is not None else res.sampled_max
    base = [lemma25_check(kernel, c, table=table, rho=rho, omega_norm=norm) for c in cases]
    dil = [lemma25_check(kernel, c.dilated(), table=table, rho=rho, omega_norm=norm) for c in cases]
    ratios = [r.ratio for r in base + dil]
    C = max(ratios)
    change = max(abs(d.ratio / b.ratio - 1) if b.ratio > 0 else 0.0 for b, d in zip(base, dil))
    if any(r.anomaly for r in base + dil) or not math.isfinite(C):
        verdict = FAIL
    elif not all(r > 0 for r in ratios):
        verdict = FAIL
    else:
        verdict = PASS if change < tol else INCONCLUSIVE
    return Lemma25Study(list(cases), base, dil, C, change, verdict)


# --------------------------------------------------------------------------
# decay


class PowerLawDecay(RegressorMixin, BaseEstimator):
    """Least-squares fit log v = intercept + slope log d."""

    def fit(self, d, v):
        d = np.asarray(d, dtype=float).ravel()
        v = np.asarray(v, dtype=float).ravel()
        if d.size != v.size or d.size < 2:
            raise DomainError("need at least two (distance, value) pairs")
        if np.any(d <= 0) or np.any(v <= 0):
            raise DomainError("distances and values must be positive for a log-log fit")
        A = np.stack([np.ones_like(d), np.log(d)], 1)
        coef, *_ = np.linalg.lstsq(A, np.log(v), rcond=None)
        self.intercept_, self.slope_ = float(coef[0]), float(coef[1])
        return self

    def predict(self, d):
        check_is_fitted(self, "slope_")
        return np.exp(self.intercept_) * np.asarray(d, dtype=float) ** self.slope_

    def score(self, d, v):
        r = np.log(np.asarray(v, dtype=float)) - np.log(self.predict(d))
        lv = np.log(np.asarray(v, dtype=float))
        return 1.0 - float(r @ r) / float(((lv - lv.mean()) ** 2).sum() or 1.0)


@dataclass
class DecayFit:
    direction: np.ndarray
    distances: np.ndarray
    values: np.ndarray
    uncertainties: np.ndarray
    slope: float
    C_fit: float
    C_fit_extended: float
    exponent: float
    verdict: str
    far_value: float = float("nan")

    @property
    def C_change(self):
        return self.C_fit_extended / self.C_fit if self.C_fit > 0 else math.inf


def c_fit(distances, values, sup_norm, radius, exponent):
    d = np.asarray(distances, dtype=float)
    return float(np.max(np.asarray(values) * d ** exponent) / (sup_norm * radius ** exponent))


def decay_from_values(distances, values, sup_norm, radius, exponent, far_distance=None, far_value=None,
                      uncertainties=None, direction=None, abs_tol=1e-300, slope_tol=SLOPE_TOL):
    """Slope, C_fit and verdict from sampled values (far point appended for the stability test)."""
    d = np.asarray(distances, dtype=float)
    v = np.asarray(values, dtype=float)
    if np.any(np.diff(d) <= 0):
        raise DomainError("distances must be strictly increasing")
    if np.any(v < 0):
        raise DomainError("values must be nonnegative")
    unc = np.zeros_like(v) if uncertainties is None else np.asarray(uncertainties, dtype=float)
    if np.all(v <= abs_tol):
        return DecayFit(direction, d, v, unc, math.nan, 0.0, 0.0, exponent, INCONCLUSIVE)
    if np.any(v <= abs_tol):
        return DecayFit(direction, d, v, unc, math.nan, math.nan, math.nan, exponent, INCONCLUSIVE)
    slope = PowerLawDecay().fit(d, v).slope_
    C = c_fit(d, v, sup_norm, radius, exponent)
    if far_distance is not None:
        C2 = c_fit(np.append(d, far_distance), np.append(v, far_value), sup_norm, radius, exponent)
    else:
        C2 = C
    ok_slope = slope <= -exponent + slope_tol
    ok_C = math.isfinite(C) and C2 / C < STABILITY
    if ok_slope and ok_C:
        verdict = PASS
    elif np.any(unc >= v):
        verdict = INCONCLUSIVE
    else:
        verdict = FAIL
    return DecayFit(direction, d, v, unc, float(slope), C, C2, exponent, verdict,
                    float("nan") if far_value is None else float(far_value))


def decay_fit(operator_tag, kernel, atom, params=None, ray=(1.0, 0.0), n_points=8, plan=None,
              d_range=(64.0, 1024.0)):
    """Evaluate mu(atom) along x0 + d ray for d in d_range (units of the radius) and fit.

    The C_fit stability check doubles the farthest distance.  Without an
    explicit plan the y-domain is widened to 2^19 r so the truncation bound
    stays below rel_tol at the far points.
    """
    kernel = resolve_kernel(kernel)
    params = params or OperatorParams(n=kernel.dimension)
    n = kernel.dimension
    ray = check_point(ray, n, "ray")
    ray = ray / np.linalg.norm(ray)
    lo, hi = d_range
    if lo < 64:
        raise DomainError("decay samples must lie outside 64B (d_range[0] >= 64)")
    r = atom.radius
    plan = plan or QuadPlan(R_y=2.0 ** 19 * r)
    d = np.geomspace(lo, hi, int(n_points)) * r
    dist = np.append(d, 2 * d[-1])
    pts = atom.center + dist[:, None] * ray
    res = evaluate_on_grid(operator_tag, kernel, atom, pts, params, plan)
    if res.errors:
        return DecayFit(ray, d, res.values[:-1], res.uncertainties[:-1], math.nan, math.nan, math.nan,
                        n + params.beta, INCONCLUSIVE)
    return decay_from_values(d, res.values[:-1], atom.sup_norm, r, n + params.beta, dist[-1],
                             res.values[-1], res.uncertainties[:-1], ray)


# --------------------------------------------------------------------------
# windows


@dataclass
class WindowGrid:
    """Evaluation points with the measure of the cell each one represents.

    ``inner_radius`` is the radius of the largest ball about ``center``
    contained in the window (used for exterior tails).
    """

    points: np.ndarray
    measures: np.ndarray
    center: np.ndarray
    inner_radius: float
    kind: str
    refinement: int = 1

    @property
    def total_measure(self):
        return float(self.measures.sum())


def polar_window(center, radius, outer=None, refinement=1, core_cells=8, per_octave=6, angular=32):
    """Polar cells about ``center``: uniform rings on [0, 2r], geometric rings on [2r, outer]."""
    center = np.asarray(center, dtype=float)
    n = center.size
    if n != 2:
        raise DomainError("polar windows are provided for n = 2")
    outer = 64.0 * radius if outer is None else float(outer)
    if outer <= 2 * radius:
        raise DomainError("outer radius must exceed 2 radii")
    m0 = core_cells * refinement
    m1 = max(1, int(math.ceil(per_octave * refinement * math.log2(outer / (2 * radius)))))
    edges = np.concatenate([np.linspace(0, 2 * radius, m0 + 1),
                            2 * radius * (outer / (2 * radius)) ** (np.arange(1, m1 + 1) / m1)])
    na = angular * refinement
    phi_e = 2 * math.pi * np.arange(na + 1) / na
    rc = 0.5 * (edges[:-1] + edges[1:])
    pc = 0.5 * (phi_e[:-1] + phi_e[1:])
    area = 0.5 * np.diff(edges ** 2)[:, None] * np.diff(phi_e)[None, :]
    pts = center + (rc[:, None, None] * np.stack([np.cos(pc), np.sin(pc)], -1)[None]).reshape(-1, 2)
    return WindowGrid(pts.reshape(-1, 2), area.reshape(-1), center, outer, "polar", refinement)


def cartesian_window(lo, hi, cell, center=None):
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    counts = np.maximum(1, np.ceil((hi - lo) / cell).astype(int))
    axes = [a + (np.arange(c) + 0.5) * (b - a) / c for a, b, c in zip(lo, hi, counts)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, lo.size)
    meas = np.full(len(pts), float(np.prod((hi - lo) / counts)))
    center = 0.5 * (lo + hi) if center is None else np.asarray(center, dtype=float)
    inner = float(min(np.min(center - lo), np.min(hi - center)))
    return WindowGrid(pts, meas, center, inner, "cartesian")


def default_window(supports, refinement=1, dilation=64.0):
    """Polar window for a single center; otherwise the bounding box of the
    dilated balls padded by 4 radii with >= 8 cells across the smallest ball."""
    centers = {tuple(np.round(c, 12)) for c, _ in supports}
    rmax = max(r for _, r in supports)
    if len(centers) == 1:
        c = np.asarray(supports[0][0], dtype=float)
        return polar_window(c, min(r for _, r in supports), dilation * rmax, refinement)
    lo = np.min([c - dilation * r for c, r in supports], axis=0) - 4 * rmax
    hi = np.max([c + dilation * r for c, r in supports], axis=0) + 4 * rmax
    cell = 2 * min(r for _, r in supports) / 8 / refinement
    return cartesian_window(lo, hi, cell)


def _window_contains(window, center, radius):
    d = np.linalg.norm(np.asarray(center) - window.center)
    return d + radius <= window.inner_radius * (1 + 1e-12)


# --------------------------------------------------------------------------
# L^p estimates


@dataclass
class LpEstimate:
    value: float
    window_part: float
    tail_part: float
    uncertainty: float
    p: float

    @property
    def tail_fraction(self):
        tot = self.window_part + self.tail_part
        return self.tail_part / tot if tot > 0 else 0.0


def exterior_tail(C, sup_norm, radius, exponent, p, n, inner_radius):
    """int_{|x-x0|>W} (C sup r^e / |x-x0|^e)^p dx = |S| (C sup r^e)^p W^(n-ep)/(ep-n)."""
    if exponent * p <= n:
        raise DomainError(f"(n + beta) p = {exponent * p:g} <= n: the exterior tail diverges")
    return surface_area(n) * (C * sup_norm * radius ** exponent) ** p * inner_radius ** (n - exponent * p) / (exponent * p - n)


def window_values(operator_tag, kernel, f, window, params, plan=None, cache=None):
    key = (operator_tag, window.kind, window.refinement, len(window.points))
    if cache is not None and key in cache:
        return cache[key]
    res = evaluate_on_grid(operator_tag, kernel, f, window.points, params, plan or WINDOW_PLAN)
    out = (res.values, res.uncertainties, res.errors)
    if cache is not None:
        cache[key] = out
    return out


def lp_norm_estimate(operator_tag, kernel, atom, params, window=None, decay=None, plan=None,
                     cache=None):
    """(int mu(a)^p over the window + analytic exterior tail)^(1/p)."""
    kernel = resolve_kernel(kernel)
    n = kernel.dimension
    p = params.p
    exponent = n + params.beta
    if exponent * p <= n:
        raise DomainError(f"(n + beta) p = {exponent * p:g} <= n: p is outside the L^p range")
    if blocks_of(atom) == [] or atom.sup_norm == 0:
        return LpEstimate(0.0, 0.0, 0.0, 0.0, p)
    window = window or polar_window(atom.center, atom.radius)
    if not _window_contains(window, atom.center, 64 * atom.radius):
        raise WindowError("window does not contain 64B", suggested=64 * atom.radius)
    if decay is None:
        decay = decay_fit(operator_tag, kernel, atom, params)
    if decay.verdict != PASS:
        raise DomainError(f"decay verdict is {decay.verdict}; the exterior tail needs a passing fit")
    vals, unc, errors = window_values(operator_tag, kernel, atom, window, params, plan, cache)
    if errors:
        raise DomainError(f"{len(errors)} window points failed to evaluate")
    inner = float(window.measures @ vals ** p)
    dinner = float(window.measures @ (p * np.where(vals > 0, vals, 1.0) ** (p - 1) * unc))
    tail = exterior_tail(decay.C_fit, atom.sup_norm, atom.radius, exponent, p, n, window.inner_radius)
    total = inner + tail
    value = total ** (1 / p)
    return LpEstimate(value, inner, tail, value / (p * total) * dinner, p)


# --------------------------------------------------------------------------
# distribution function and weak type


def distribution_function(values, cell_measure, lam):
    """Measure of {value > lam} by cell counting."""
    if not lam > 0:
        raise DomainError("lambda must be > 0")
    values = np.asarray(values, dtype=float)
    meas = np.broadcast_to(np.asarray(cell_measure, dtype=float), values.shape)
    return float(meas[values > lam].sum())


@dataclass
class DistributionEstimate:
    lam: float
    window_measure: float
    tail_measure: float

    @property
    def total(self):
        return self.window_measure + self.tail_measure


@dataclass
class WeakTypeResult:
    lambdas: np.ndarray
    estimates: list
    ratios: np.ndarray
    sup_ratio: float
    refined_sup_ratio: float
    verdict: str
    octaves: float
    window_outer: float

    @property
    def change(self):
        if not self.refined_sup_ratio or not math.isfinite(self.refined_sup_ratio):
            return math.nan
        return abs(self.refined_sup_ratio / self.sup_ratio - 1)


def default_lambdas(max_value, octaves=4, per_octave=4, top=0.5):
    top = top * max_value
    return top * 2.0 ** (-np.arange(octaves * per_octave + 1) / per_octave)


def required_outer(seq, lambdas):
    """Largest dilated radius (about each block center) over the lambda sweep."""
    out = 0.0
    for lam in lambdas:
        cover = dilated_cover(seq, level_of(lam))
        for c, rad, _ in cover.balls:
            out = max(out, rad)
    return max(out, max(64 * b.radius for b in seq.blocks))


def unit_decay(operator_tag, kernel, block, params, plan):
    """Decay fit for the block's shape on the unit ball (C_fit is scale-free)."""
    prof = block.profile
    while hasattr(prof, "func"):  # scaled or shifted wrappers
        prof = prof.func
    shape = prof.shape if isinstance(prof, AtomProfile) else block.shape_name
    unit = build_atom(block.dimension, block.p, (np.zeros(block.dimension), 1.0), shape, block.s)
    return decay_fit(operator_tag, kernel, unit, params, plan=plan)


def _tail_measure(blocks, C, exponent, lam, window, n):
    N = len(blocks)
    tot = 0.0
    for b in blocks:
        d = b.radius * (N * C * b.sup_norm / lam) ** (1 / exponent)
        inner = max(window.inner_radius - np.linalg.norm(b.center - window.center), 0.0)
        if d > inner:
            tot += ball_volume(n, d) - ball_volume(n, inner)
    return tot


def weak_type_check(operator_tag, kernel, seq, params, lambdas=None, plan=None, window=None,
                    refine=True, octaves=4, cache=None, decay=None):
    """lam^p |{mu(f) > lam}| / c over a lambda sweep, with a 2x-grid stability check."""
    kernel = resolve_kernel(kernel)
    n = kernel.dimension
    p = seq.p
    blocks = seq.blocks
    if not blocks:
        lam = np.ones(1) if lambdas is None else np.asarray(lambdas, dtype=float)
        z = np.zeros(len(lam))
        return WeakTypeResult(lam, [DistributionEstimate(l, 0.0, 0.0) for l in lam], z, 0.0, 0.0,
                              PASS, float(octaves), 0.0)
    f = seq.function()
    cache = {} if cache is None else cache
    exponent = n + params.beta
    decay = decay or unit_decay(operator_tag, kernel, blocks[0], params, plan)
    if decay.verdict != PASS:
        return WeakTypeResult(np.asarray(lambdas or []), [], np.array([]), math.nan, math.nan,
                              INCONCLUSIVE, 0.0, 0.0)

    def sweep(win, lams):
        vals, _, errors = window_values(operator_tag, kernel, f, win, params, plan, cache)
        if errors:
            raise DomainError(f"{len(errors)} window points failed to evaluate")
        if lams is None:
            lams = default_lambdas(float(vals.max()), octaves)
        need = required_outer(seq, lams)
        for b in blocks:
            if not _window_contains(win, b.center, need):
                raise WindowError(f"window (inner radius {win.inner_radius:g}) does not contain the "
                                  f"dilated balls (radius {need:g})", suggested=need + np.linalg.norm(b.center - win.center))
        ests = []
        for lam in lams:
            wm = distribution_function(vals, win.measures, lam)
            ests.append(DistributionEstimate(float(lam), wm, _tail_measure(blocks, decay.C_fit, exponent, lam, win, n)))
        ratios = np.array([e.lam ** p * e.total / seq.c for e in ests])
        return np.asarray(lams, dtype=float), ests, ratios

    supports = [(b.center, b.radius) for b in blocks]
    if window is None:
        # the maximum sits on the supports; a small probe window sets the sweep
        probe = default_window(supports, dilation=4.0)
        vals, _, _ = window_values(operator_tag, kernel, f, probe, params, plan, cache)
        lam0 = lambdas if lambdas is not None else default_lambdas(float(vals.max()), octaves)
        outer = required_outer(seq, lam0)
        window = default_window(supports, dilation=outer / max(b.radius for b in blocks))
        lambdas = lam0
    lams, ests, ratios = sweep(window, lambdas)
    sup = float(np.max(ratios))
    span = math.log2(lams.max() / lams.min()) if len(lams) > 1 else 0.0
    refined = math.nan
    if not np.all(np.isfinite(ratios)):
        verdict = FAIL
    elif span < 3:
        verdict = INCONCLUSIVE
    else:
        verdict = PASS
        if refine:
            fine = _refined(window, supports)
            _, _, r2 = sweep(fine, lams)
            refined = float(np.max(r2))
            if not math.isfinite(refined):
                verdict = FAIL
            elif abs(refined / sup - 1) >= WEAK_STABILITY:
                verdict = INCONCLUSIVE
    return WeakTypeResult(lams, ests, ratios, sup, refined, verdict, span, window.inner_radius)


def _refined(window, supports):
    if window.kind == "polar":
        c = window.center
        r = min(rr for _, rr in supports)
        return polar_window(c, r, window.inner_radius, refinement=2 * window.refinement)
    pts = window.points
    lo, hi = pts.min(0), pts.max(0)
    cell = math.sqrt(window.measures[0])
    return cartesian_window(lo - cell / 2, hi + cell / 2, cell / 2, window.center)


# --------------------------------------------------------------------------
# pointwise domination


@dataclass
class DominationResult:
    points: np.ndarray
    mu_s: np.ndarray
    mu_star: np.ndarray
    uncertainty: np.ndarray
    constant: float
    violations: int
    verdict: str
    margins: np.ndarray = field(default=None)


def domination_check(kernel, f, params, grid, plan=None):
    """Count points with mu_S > 2^(lam n/2) mu_* + combined uncertainty."""
    kernel = resolve_kernel(kernel)
    pts = np.asarray(grid, dtype=float).reshape(-1, kernel.dimension)
    const = params.domination_constant
    if not blocks_of(f) if f is not None else True:
        z = np.zeros(len(pts))
        return DominationResult(pts, z, z, z, const, 0, PASS, z)
    s = evaluate_on_grid("mu_s", kernel, f, pts, params, plan)
    m = evaluate_on_grid("mu_star", kernel, f, pts, params, plan)
    unc = s.uncertainties + const * m.uncertainties
    margin = const * m.values + unc - s.values
    bad = np.isnan(margin) | (margin < 0)
    failed = np.isnan(margin)
    if np.any(failed):
        verdict = INCONCLUSIVE if not np.any(margin < 0) else FAIL
    else:
        verdict = PASS if not np.any(bad) else FAIL
    return DominationResult(pts, s.values, m.values, unc, const, int(np.sum(margin < 0)), verdict, margin)
