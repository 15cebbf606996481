"""(p, inf, s)-atoms and synthetic weak-Hardy decompositions."""

import csv
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ._validation import check_exponent_p, check_point, check_positive
from .exceptions import DegenerateShapeError, DomainError, PackingError
from .sphere import ball_rule, ball_volume

MOMENT_TOL = 1e-9
HEADROOM = 0.05


def min_moment_order(n, p):
    """floor(n (1/p - 1)): the least admissible number of vanishing moments."""
    if int(n) < 1:
        raise DomainError("dimension must be >= 1")
    p = check_exponent_p(p)
    # guard the floor against representation error, e.g. p = 2/3
    return int(math.floor(n * (1.0 / p - 1.0) + 1e-12))


def multi_indices(n, order):
    """All multi-indices gamma in N^n with |gamma| <= order, graded order."""
    out = []
    for total in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            g = [0] * n
            for i in combo:
                g[i] += 1
            out.append(tuple(g))
    return out


def monomials(u, indices):
    """Matrix of u**gamma, shape (m, len(indices))."""
    u = np.asarray(u, dtype=float)
    cols = []
    for g in indices:
        col = np.ones(u.shape[0])
        for i, e in enumerate(g):
            if e:
                col = col * u[:, i] ** e
        cols.append(col)
    return np.stack(cols, axis=1)


# --------------------------------------------------------------------------
# shape families on the unit ball


@dataclass(frozen=True)
class Bump:
    """(1 - |u|^2)**power, optionally modulated by 1 + sum c_gamma u**gamma."""

    power: int = 2
    modulation: tuple = ()  # ((gamma, coeff), ...)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        base = np.clip(1.0 - (u * u).sum(-1), 0.0, None) ** self.power
        if not self.modulation:
            return base
        flat = u.reshape(-1, u.shape[-1])
        mod = np.ones(flat.shape[0])
        for g, c in self.modulation:
            mod = mod + c * monomials(flat, [tuple(g)])[:, 0]
        return base * mod.reshape(u.shape[:-1])


@dataclass(frozen=True)
class PolynomialShape:
    """A pure polynomial on the ball; degenerate once s reaches its degree."""

    terms: tuple  # ((gamma, coeff), ...)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1, u.shape[-1])
        out = np.zeros(flat.shape[0])
        for g, c in self.terms:
            out = out + c * monomials(flat, [tuple(g)])[:, 0]
        return out.reshape(u.shape[:-1])


SHAPES = {
    "bump": Bump(2),
    "bump3": Bump(3),
    "tilted-bump": Bump(2, (((1, 0), 0.6), ((0, 1), -0.3), ((2, 0), 0.4))),
}


def get_shape(shape, n=2):
    if callable(shape):
        return shape
    if shape == "tilted-bump" and n != 2:
        return Bump(2, ((tuple([1] + [0] * (n - 1)), 0.6), (tuple([0, 1] + [0] * (n - 2)), -0.3)))
    try:
        return SHAPES[shape]
    except KeyError:
        raise DomainError(f"unknown shape {shape!r}; known: {sorted(SHAPES)}") from None


def random_shape(rng, n=2, degree=2, power=2):
    """A bump modulated by a random polynomial of the given degree."""
    terms = tuple((g, float(rng.uniform(-0.8, 0.8))) for g in multi_indices(n, degree)[1:])
    return Bump(power, terms)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomProfile:
    """x -> scale * (shape(u) - poly(u)) on the ball, 0 outside; u = (x - c)/r."""

    center: np.ndarray
    radius: float
    shape: Callable
    indices: tuple
    coeffs: np.ndarray
    scale: float

    def local(self, u):
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1, u.shape[-1])
        vals = np.asarray(self.shape(flat), dtype=float).reshape(-1)
        if len(self.indices):
            vals = vals - monomials(flat, self.indices) @ self.coeffs
        return self.scale * vals.reshape(u.shape[:-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        u = (x - self.center) / self.radius
        inside = (u * u).sum(-1) < 1.0
        out = np.zeros(x.shape[:-1])
        if np.any(inside):
            out[inside] = self.local(u[inside])
        return out


@dataclass(frozen=True)
class _Shifted:
    func: Callable
    shift: np.ndarray

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float) - self.shift)


@dataclass(frozen=True)
class _Times:
    func: Callable
    factor: float

    def __call__(self, x):
        return self.factor * np.asarray(self.func(x), dtype=float)


@dataclass(frozen=True)
class Atom:
    """A function supported in the ball B(center, radius).

    ``sup_norm`` is the measured sup of |profile|; ``p`` and ``s`` give the
    (p, inf, s) normalization the atom was built for; ``level`` is set for
    blocks of a weak-Hardy decomposition.
    """

    center: np.ndarray
    radius: float
    p: float
    s: int
    profile: Callable
    sup_norm: float
    shape_name: str = "custom"
    level: int = None

    @property
    def dimension(self):
        return int(np.size(self.center))

    @property
    def measure(self):
        return ball_volume(self.dimension, self.radius)

    def __call__(self, x):
        return self.profile(x)

    def scaled(self, factor):
        """Profile multiplied by ``factor``; the declared ball is unchanged."""
        return replace(self, profile=_Times(self.profile, float(factor)),
                       sup_norm=abs(float(factor)) * self.sup_norm)

    def translated_profile(self, shift):
        """Profile moved by ``shift`` while the declared ball stays put."""
        return replace(self, profile=_Shifted(self.profile, np.asarray(shift, dtype=float)))

    def translated(self, shift):
        """Ball and profile moved together (a genuine translate)."""
        shift = np.asarray(shift, dtype=float)
        prof = self.profile
        if isinstance(prof, AtomProfile):
            prof = replace(prof, center=prof.center + shift)
        else:
            prof = _Shifted(prof, shift)
        return replace(self, center=self.center + shift, profile=prof)

    @property
    def supports(self):
        return [(np.asarray(self.center, dtype=float), float(self.radius))]


def _sup_on_ball(func, n, radial=160, angular=256):
    """Max of |func| on the closed unit ball: dense polar grid, then local polish."""
    r = np.linspace(0.0, 1.0, radial)
    if n == 2:
        th = 2 * np.pi * np.arange(angular) / angular
        dirs = np.stack([np.cos(th), np.sin(th)], -1)
    else:
        from .sphere import sphere_rule
        dirs = sphere_rule(n, 41)[0]
    pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    vals = np.abs(func(pts))
    best = float(vals.max())
    # polish: repeated zoomed grids about the top candidates, clipped to the ball
    step = max(1.0 / (radial - 1), 2 * np.pi / angular)
    offs = np.linspace(-1.0, 1.0, 9)
    local = np.stack(np.meshgrid(*([offs] * n), indexing="ij"), -1).reshape(-1, n)
    for i in np.argsort(vals)[-4:]:
        c, h = pts[i], step
        for _ in range(12):
            cand = c + h * local
            nrm = np.linalg.norm(cand, axis=1, keepdims=True)
            cand = np.where(nrm > 1, cand / np.maximum(nrm, 1e-300), cand)
            v = np.abs(func(cand))
            j = int(np.argmax(v))
            c, h = cand[j], h / 4
            best = max(best, float(v[j]))
    return best


def _project_out_polynomials(shape, n, s):
    """Coefficients of the L2(B) projection of ``shape`` on polynomials of degree <= s."""
    pts, w = ball_rule(n, 32, 64 if n == 2 else 41)
    idx = tuple(multi_indices(n, s))
    V = monomials(pts, idx)
    f = np.asarray(shape(pts), dtype=float)
    sw = np.sqrt(w)
    # least squares in the weighted norm is the orthogonal projection
    coeffs, *_ = np.linalg.lstsq(sw[:, None] * V, sw * f, rcond=None)
    resid = f - V @ coeffs
    norm_f = math.sqrt(float(w @ f ** 2))
    norm_r = math.sqrt(float(w @ resid ** 2))
    if norm_f == 0 or norm_r <= 1e-10 * norm_f:
        raise DegenerateShapeError(
            f"moment projection leaves the shape identically zero (degree <= {s})")
    return idx, coeffs


def _ball(ball, n=None):
    center, radius = ball
    center = check_point(center, n, "center")
    radius = check_positive(radius, "radius")
    return center, radius


def build_atom(n, p, ball, shape="bump", s=None, headroom=HEADROOM, target_sup=None):
    """A (p, inf, s)-atom on ``ball = (center, radius)``.

    The shape is moved to the ball, its projection onto polynomials of degree
    <= s is removed, and the result is scaled so that its sup norm equals
    ``(1 - headroom) |B|**(-1/p)`` (or ``target_sup`` when given).
    """
    p = check_exponent_p(p)
    n = int(n)
    center, radius = _ball(ball, n)
    smin = min_moment_order(n, p)
    s = smin if s is None else int(s)
    if s < smin:
        raise DomainError(f"s = {s} is below floor(n(1/p-1)) = {smin}")
    shape_fn = get_shape(shape, n)
    idx, coeffs = _project_out_polynomials(shape_fn, n, s)
    unit = AtomProfile(np.zeros(n), 1.0, shape_fn, idx, coeffs, 1.0)
    sup_unit = _sup_on_ball(unit.local, n)
    measure = ball_volume(n, radius)
    target = (1.0 - headroom) * measure ** (-1.0 / p) if target_sup is None else float(target_sup)
    scale = target / sup_unit
    prof = AtomProfile(center, radius, shape_fn, idx, coeffs, scale)
    name = shape if isinstance(shape, str) else type(shape).__name__
    return Atom(center, radius, p, s, prof, target, name)


# --------------------------------------------------------------------------
# verification of the three atom conditions


@dataclass
class ConditionCheck:
    passed: bool
    residual: float


@dataclass
class AtomReport:
    support: ConditionCheck
    size: ConditionCheck
    moments: ConditionCheck
    moment_residuals: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.support.passed and self.size.passed and self.moments.passed


def verify_atom(atom, moment_tol=MOMENT_TOL, size_slack=0.0, samples=4096, seed=0):
    """Check support, size and vanishing moments of ``atom``.

    Moments use a product rule on the declared ball that is independent of
    the one used for construction; residuals are relative to
    ``int |a(x)| |x**gamma| dx``.
    """
    n = atom.dimension
    c, r = np.asarray(atom.center, dtype=float), float(atom.radius)
    rng = np.random.default_rng(seed)

    # (i) support: sample outside the closed ball, and just outside its boundary
    d = rng.normal(size=(samples, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    rad = r * np.concatenate([1.0 + np.geomspace(1e-9, 1e-2, samples // 2),
                              rng.uniform(1.0, 4.0, samples - samples // 2)])
    outside = c + rad[:, None] * d
    out_vals = np.abs(atom.profile(outside))
    support = ConditionCheck(bool(np.all(out_vals == 0.0)), float(out_vals.max(initial=0.0)))

    # (ii) size: dense sampling inside the ball
    sup = _sup_on_ball(lambda u: atom.profile(c + r * u), n, radial=96, angular=192)
    cap = atom.measure ** (-1.0 / atom.p)
    size = ConditionCheck(bool(sup <= cap * (1.0 + size_slack)), float(sup / cap))

    # (iii) moments with a finer rule than construction
    pts, w = ball_rule(n, 40, 96 if n == 2 else 47)
    x = c + r * pts
    wx = w * r ** n
    vals = atom.profile(x)
    idx = multi_indices(n, atom.s)
    M = monomials(x, idx)
    worst = 0.0
    residuals = {}
    for j, g in enumerate(idx):
        mom = float(wx @ (vals * M[:, j]))
        scale = float(wx @ np.abs(vals * M[:, j]))
        rel = abs(mom) / scale if scale > 0 else 0.0
        residuals[g] = rel
        worst = max(worst, rel)
    moments = ConditionCheck(bool(worst <= moment_tol), worst)
    return AtomReport(support, size, moments, residuals)


# --------------------------------------------------------------------------
# weak-Hardy sequences


@dataclass
class BlockSum:
    """f = sum of blocks; a compactly supported function with a list of support balls."""

    blocks: list

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for b in self.blocks:
            out = out + b.profile(x)
        return out

    @property
    def supports(self):
        return [(np.asarray(b.center, dtype=float), float(b.radius)) for b in self.blocks]

    @property
    def dimension(self):
        return self.blocks[0].dimension if self.blocks else 0

    def scaled(self, factor):
        return BlockSum([b.scaled(factor) for b in self.blocks])


@dataclass
class WeakHardySequence:
    """Blocks b_i^k on balls B_i^k with per-level sup 2^k and measure budget c 2^{-kp}."""

    p: float
    levels: dict
    c: float
    C_ov: int = 1
    C_b: float = 1.0
    dimension: int = 2

    @property
    def blocks(self):
        return [b for k in sorted(self.levels) for b in self.levels[k]]

    def function(self):
        return BlockSum(self.blocks)

    def doubled(self, m=1):
        """The sequence of 2^m f: every block scaled by 2^m and moved up m levels."""
        m = int(m)
        f = 2.0 ** m
        levels = {k + m: [replace(b.scaled(f), level=k + m) for b in blocks]
                  for k, blocks in self.levels.items()}
        return replace(self, levels=levels, c=self.c * f ** self.p)

    def level_measure(self, k):
        return sum(b.measure for b in self.levels.get(k, []))

    def check(self, grid=None, moment_tol=MOMENT_TOL):
        """Machine check of the four structural conditions; returns a dict of ConditionChecks."""
        out = {}
        budget = max((self.level_measure(k) * 2.0 ** (k * self.p) for k in self.levels), default=0.0)
        out["measure_budget"] = ConditionCheck(budget <= self.c * (1 + 1e-12), budget)
        if grid is None and self.blocks:
            lo = np.min([b.center - b.radius for b in self.blocks], axis=0)
            hi = np.max([b.center + b.radius for b in self.blocks], axis=0)
            axes = [np.linspace(a, z, 201) for a, z in zip(lo, hi)]
            grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, self.dimension)
        overlap = 0
        for k, blocks in self.levels.items():
            if not blocks:
                continue
            cnt = np.zeros(len(grid), dtype=int)
            for b in blocks:
                cnt += (np.linalg.norm(grid - b.center, axis=1) < b.radius)
            overlap = max(overlap, int(cnt.max()))
        out["overlap"] = ConditionCheck(overlap <= self.C_ov, float(overlap))
        sup_ratio = max((b.sup_norm / 2.0 ** b.level for b in self.blocks), default=0.0)
        out["sup_bound"] = ConditionCheck(sup_ratio <= self.C_b * (1 + 1e-12), sup_ratio)
        worst = max((verify_atom(b, moment_tol).moments.residual for b in self.blocks), default=0.0)
        out["moments"] = ConditionCheck(worst <= moment_tol, worst)
        return out


def build_weak_hardy(plan, shape="bump", p=1.0, c=None, n=2):
    """Assemble blocks level by level from ``plan = {k: [(center, radius), ...]}``.

    Each block is a moment-free profile with sup exactly 2^k.  Balls within a
    level must be disjoint and, if ``c`` is given, sum_i |B_i^k| <= c 2^{-kp}.
    The achieved budget ``max_k 2^{kp} sum_i |B_i^k|`` is recorded as ``c``
    when none is supplied.
    """
    p = check_exponent_p(p)
    s = min_moment_order(n, p)
    levels = {}
    achieved = 0.0
    for k in sorted(plan):
        k = int(k)
        balls = [_ball(b, n) for b in plan[k]]
        for (c1, r1), (c2, r2) in itertools.combinations(balls, 2):
            if np.linalg.norm(c1 - c2) < r1 + r2:
                raise PackingError(f"balls at level {k} overlap: {c1}, {c2}")
        measure = sum(ball_volume(n, r) for _, r in balls)
        if c is not None and measure > c * 2.0 ** (-k * p) * (1 + 1e-12):
            raise PackingError(
                f"level {k}: measure {measure:.6g} exceeds budget c 2^(-kp) = {c * 2.0 ** (-k * p):.6g}")
        achieved = max(achieved, measure * 2.0 ** (k * p))
        blocks = []
        for center, radius in balls:
            a = build_atom(n, p, (center, radius), shape, s, target_sup=2.0 ** k)
            blocks.append(replace(a, level=k))
        levels[k] = blocks
    return WeakHardySequence(p, levels, achieved if c is None else float(c), 1, 1.0, n)


@dataclass
class LevelSplit:
    k0: int
    F1: list
    F2: list
    l4_sum: float
    l4_claim: float


def level_of(lam):
    """Integer k0 with 2^k0 <= lam < 2^(k0+1)."""
    lam = float(lam)
    if not lam > 0 or not math.isfinite(lam):
        raise DomainError(f"lambda must be > 0, got {lam}")
    m, e = math.frexp(lam)  # lam = m 2^e with 0.5 <= m < 1
    return e - 1


def split_at_level(seq, lam):
    """Blocks with k <= k0 (F1) and k > k0 (F2).

    ``l4_sum`` is sum_{k<=k0} sum_i ||b||_inf |B|^{1/4} (the bound the
    Minkowski step produces) and ``l4_claim`` is lam^{1-p/4} c^{1/4}.
    """
    k0 = level_of(lam)
    F1 = [b for b in seq.blocks if b.level <= k0]
    F2 = [b for b in seq.blocks if b.level > k0]
    l4 = sum(b.sup_norm * b.measure ** 0.25 for b in F1)
    claim = float(lam) ** (1 - seq.p / 4) * seq.c ** 0.25
    return LevelSplit(k0, F1, F2, float(l4), float(claim))


@dataclass
class DilatedCover:
    k0: int
    balls: list  # (center, dilated radius, level)
    total_measure: float
    bound: float
    dimensional_constant: float


def dilation_factor(k, k0, p, n):
    return 64.0 * 1.5 ** ((k - k0) * p / n)


def dilated_cover(seq, k0):
    """Balls B(x_i^k, 64 (3/2)^{(k-k0)p/n} r_i^k) for k > k0, with total measure.

    ``bound`` is 64^n sum_{k>k0} (3/2)^{(k-k0)p} 2^{-kp} c.
    """
    k0 = int(k0)
    n, p = seq.dimension, seq.p
    balls = []
    total = 0.0
    for b in seq.blocks:
        if b.level > k0:
            rad = dilation_factor(b.level, k0, p, n) * b.radius
            balls.append((np.asarray(b.center, dtype=float), rad, b.level))
            total += ball_volume(n, rad)
    const = 64.0 ** n
    bound = const * sum(1.5 ** ((k - k0) * p) * 2.0 ** (-k * p) * seq.c
                        for k in seq.levels if k > k0)
    return DilatedCover(k0, balls, total, bound, const)


# --------------------------------------------------------------------------
# config and export


def _parse_balls(text, n):
    balls = []
    for item in str(text).split(";"):
        item = item.strip()
        if not item:
            continue
        where, _, rad = item.partition("@")
        center = [float(v) for v in where.replace("(", "").replace(")", "").split(",")]
        if len(center) != n:
            raise DomainError(f"ball center {item!r} does not have {n} coordinates")
        balls.append((center, float(rad)))
    return balls


def plan_from_config(cfg):
    """Decomposition plan from flat keys: ``p``, ``c``, ``shape``, ``dimension``,
    and ``level.<k> = "x,y@r; x,y@r"``.
    """
    n = int(cfg.get("dimension", 2))
    plan = {}
    for key, value in cfg.items():
        if key.startswith("level."):
            plan[int(key.split(".", 1)[1])] = _parse_balls(value, n)
    c = cfg.get("c")
    return dict(plan=plan, shape=cfg.get("shape", "bump"), p=float(cfg.get("p", 1.0)),
                c=None if c in (None, "") else float(c), n=n)


def export_atom_csv(atom, path, resolution=65):
    """Write the atom sampled on a square grid over its ball as ``x1,..,xn,value`` rows."""
    n = atom.dimension
    axes = [np.linspace(c - atom.radius, c + atom.radius, resolution) for c in atom.center]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    vals = atom.profile(pts)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(n)] + ["value"])
        for pt, v in zip(pts, vals):
            w.writerow([f"{c:.17g}" for c in pt] + [f"{v:.17g}"])
    return path

