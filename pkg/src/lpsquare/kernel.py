"""Variable kernels Omega(x, z) = b(x) * Y(z/|z|) and their regularity moduli.

A kernel is homogeneous of degree zero in ``z`` by construction: every
evaluation normalizes ``z`` before the angular part is looked up.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma, gammaincc

from ._validation import check_points, check_unit_interval
from .exceptions import DomainError
from .sphere import circle_rule, sphere_rule, surface_area

CANCEL_TOL = 1e-8
DEFAULT_DELTA_GRID = np.geomspace(2.0 ** -20, 1.0, 64)
FIT_POINTS = 8
SLOPE_EPS = 1e-6  # fitted slopes this close to the critical power count as divergent


# --------------------------------------------------------------------------
# angular and coefficient families (picklable callables)


@dataclass(frozen=True)
class CircularHarmonic:
    """Y(theta) = cos(order * theta + phase) on the circle."""

    order: int = 1
    phase: float = 0.0

    def __call__(self, u):
        # complex power keeps axis values exact (cos(pi/2) is not 0 in floats)
        w = (u[..., 0] + 1j * u[..., 1]) ** self.order
        if self.phase:
            w = w * np.exp(1j * self.phase)
        return w.real


@dataclass(frozen=True)
class CoordinateMonomial:
    """Y(u) = u**exponents - offset (offset is the sphere mean when centered)."""

    exponents: tuple
    offset: float = 0.0

    def __call__(self, u):
        out = np.ones(u.shape[:-1])
        for i, e in enumerate(self.exponents):
            if e:
                out = out * u[..., i] ** e
        return out - self.offset


@dataclass(frozen=True)
class ConstantAngular:
    value: float = 1.0

    def __call__(self, u):
        return np.full(u.shape[:-1], float(self.value))


@dataclass(frozen=True)
class SignAngular:
    """Y(u) = sign(u_axis): mean zero, discontinuous on a great circle."""

    axis: int = 1

    def __call__(self, u):
        return np.where(u[..., self.axis] >= 0.0, 1.0, -1.0)


@dataclass(frozen=True)
class SampleTable:
    """Angular part interpolated from samples.

    On the circle ``nodes`` are angles and interpolation is periodic linear;
    on S^2 ``nodes`` are unit vectors and the nearest sample is used.
    """

    nodes: tuple
    values: tuple
    dimension: int = 2

    def __call__(self, u):
        vals = np.asarray(self.values, dtype=float)
        if self.dimension == 2:
            ang = np.asarray(self.nodes, dtype=float)
            order = np.argsort(ang)
            theta = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * np.pi)
            return np.interp(theta, np.mod(ang[order], 2 * np.pi), vals[order],
                             period=2 * np.pi)
        nodes = np.asarray(self.nodes, dtype=float).reshape(-1, self.dimension)
        idx = np.argmax(u.reshape(-1, self.dimension) @ nodes.T, axis=1)
        return vals[idx].reshape(u.shape[:-1])


@dataclass(frozen=True)
class ConstantCoefficient:
    value: float = 1.0

    def __call__(self, x):
        return np.full(np.shape(x)[:-1], float(self.value))


@dataclass(frozen=True)
class SinusoidalCoefficient:
    """b(x) = 1 + amplitude * sin(frequency * x[axis] + phase), |amplitude| < 1."""

    amplitude: float = 0.5
    frequency: float = 1.0
    axis: int = 0
    phase: float = 0.0

    def __call__(self, x):
        return 1.0 + self.amplitude * np.sin(self.frequency * x[..., self.axis] + self.phase)


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelSpec:
    """A variable kernel Omega(x, z) = coefficient(x) * angular(z').

    ``general`` may hold a two-argument function ``(x, z') -> value`` for a
    non-separable kernel; it then replaces the product form.
    """

    dimension: int
    angular: Callable
    coefficient: Callable = field(default_factory=ConstantCoefficient)
    coeff_sup: float = 1.0
    cancellation_exempt: bool = False
    lipschitz_alpha: Optional[tuple] = None
    name: str = "custom"
    general: Optional[Callable] = None

    def __post_init__(self):
        if self.dimension < 2:
            raise DomainError("kernel dimension must be >= 2")
        if self.coeff_sup < 0:
            raise DomainError("coeff_sup must be nonnegative")

    @property
    def separable(self):
        return self.general is None

    @property
    def translation_invariant(self):
        return self.separable and isinstance(self.coefficient, ConstantCoefficient)

    def angular_values(self, u):
        return np.asarray(self.angular(np.asarray(u, dtype=float)), dtype=float)

    def coefficient_values(self, x):
        return np.asarray(self.coefficient(np.asarray(x, dtype=float)), dtype=float)

    def on_sphere(self, x, u):
        """Omega(x, u) for unit vectors ``u`` (broadcasting over leading axes)."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if self.general is not None:
            x, u = np.broadcast_arrays(x, u)
            return np.asarray(self.general(x, u), dtype=float)
        return self.coefficient_values(x) * self.angular_values(u)

    def scaled(self, c):
        """The kernel c * Omega."""
        c = float(c)
        if self.general is not None:
            g = self.general
            return _replace(self, general=_Scaled(g, c), coeff_sup=abs(c) * self.coeff_sup,
                            name=f"{c:g}*{self.name}")
        return _replace(self, angular=_Scaled(self.angular, c),
                        lipschitz_alpha=None if self.lipschitz_alpha is None else
                        (self.lipschitz_alpha[0], abs(c) * self.lipschitz_alpha[1]),
                        name=f"{c:g}*{self.name}")

    def describe(self):
        return {
            "name": self.name,
            "dimension": self.dimension,
            "angular": repr(self.angular),
            "coefficient": repr(self.coefficient),
            "coeff_sup": self.coeff_sup,
            "cancellation_exempt": self.cancellation_exempt,
            "lipschitz_alpha": None if self.lipschitz_alpha is None else list(self.lipschitz_alpha),
        }


@dataclass(frozen=True)
class _Scaled:
    func: Callable
    c: float

    def __call__(self, *args):
        return self.c * np.asarray(self.func(*args), dtype=float)


def _replace(spec, **changes):
    from dataclasses import replace
    return replace(spec, **changes)


def evaluate(kernel, x, z):
    """Omega(x, z); ``z`` is normalized before lookup so z -> lam*z is exact.

    Broadcasts over leading axes of ``x`` and ``z``.
    """
    z = np.asarray(z, dtype=float)
    norm = np.linalg.norm(z, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise DomainError("Omega(x, z) is undefined at z = 0")
    out = kernel.on_sphere(x, z / norm)
    return out[()] if out.ndim == 0 else out


# --------------------------------------------------------------------------
# built-in catalog


def _builtin_specs():
    return [
        KernelSpec(2, CircularHarmonic(1), name="circle-harmonic-1",
                   lipschitz_alpha=(1.0, 1.0)),
        KernelSpec(2, CircularHarmonic(2), name="circle-harmonic-2",
                   lipschitz_alpha=(1.0, 2.0)),
        KernelSpec(2, CircularHarmonic(1), SinusoidalCoefficient(0.5), coeff_sup=1.5,
                   name="circle-harmonic-1-varcoef", lipschitz_alpha=(1.0, 1.0)),
        KernelSpec(3, CoordinateMonomial((0, 0, 1)), name="sphere-harmonic-1",
                   lipschitz_alpha=(1.0, 1.0)),
        KernelSpec(2, ConstantAngular(1.0), name="test-constant", cancellation_exempt=True,
                   lipschitz_alpha=(1.0, 0.0)),
        KernelSpec(2, SignAngular(1), name="test-jump"),
    ]


BUILTIN_KERNELS = {k.name: k for k in _builtin_specs()}


def get_kernel(name):
    try:
        return BUILTIN_KERNELS[name]
    except KeyError:
        raise DomainError(f"unknown kernel {name!r}; known: {sorted(BUILTIN_KERNELS)}") from None


def load_sample_table(path, dimension=2):
    """Read a CSV of ``angle,value`` (n=2) or ``x,y,z,value`` (n=3) rows."""
    nodes, values = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                nums = [float(v) for v in row]
            except ValueError:
                continue  # header
            if dimension == 2:
                nodes.append(nums[0])
            else:
                v = np.asarray(nums[:dimension])
                nodes.extend((v / np.linalg.norm(v)).tolist())
            values.append(nums[-1] if dimension == 2 else nums[dimension])
    if not values:
        raise DomainError(f"sample table {path} has no rows")
    return SampleTable(tuple(nodes), tuple(values), dimension)


def kernel_from_config(cfg, base_dir="."):
    """Build a kernel from a flat config mapping (keys without the ``kernel.`` prefix).

    Recognized keys: ``family`` (coordinate-monomial | circular-harmonic |
    custom-sample-table), ``dimension``, ``order``, ``phase``, ``exponents``,
    ``table``, ``coefficient`` (constant | sinusoidal), ``value``,
    ``amplitude``, ``frequency``, ``axis``, ``exempt``, ``name``.
    Alternatively ``id`` names a built-in.
    """
    import os

    if "id" in cfg:
        return get_kernel(cfg["id"])
    family = cfg.get("family", "circular-harmonic")
    n = int(cfg.get("dimension", 2))
    lip = None
    if family == "circular-harmonic":
        if n != 2:
            raise DomainError("circular-harmonic kernels live on the circle (n=2)")
        order = int(cfg.get("order", 1))
        angular = CircularHarmonic(order, float(cfg.get("phase", 0.0)))
        lip = (1.0, float(order))
    elif family == "coordinate-monomial":
        exps = cfg.get("exponents", (1,) + (0,) * (n - 1))
        if isinstance(exps, str):
            exps = tuple(int(e) for e in exps.replace(";", ",").split(","))
        exps = tuple(int(e) for e in exps)
        if len(exps) != n:
            raise DomainError("exponents must have one entry per dimension")
        raw = CoordinateMonomial(exps)
        pts, w = sphere_rule(n, 256 if n == 2 else 41)
        mean = float(w @ raw(pts)) / surface_area(n)
        angular = CoordinateMonomial(exps, 0.0 if abs(mean) < 1e-14 else mean)
    elif family == "custom-sample-table":
        path = os.path.join(base_dir, str(cfg["table"]))
        angular = load_sample_table(path, n)
    else:
        raise DomainError(f"unknown kernel family {family!r}")

    coef_kind = cfg.get("coefficient", "constant")
    if coef_kind == "constant":
        value = float(cfg.get("value", 1.0))
        coefficient, sup = ConstantCoefficient(value), abs(value)
    elif coef_kind == "sinusoidal":
        amp = float(cfg.get("amplitude", 0.5))
        if not abs(amp) < 1:
            raise DomainError("sinusoidal coefficient needs |amplitude| < 1")
        coefficient = SinusoidalCoefficient(amp, float(cfg.get("frequency", 1.0)),
                                            int(cfg.get("axis", 0)))
        sup = 1.0 + abs(amp)
    else:
        raise DomainError(f"unknown coefficient family {coef_kind!r}")
    exempt = cfg.get("exempt", False)
    if isinstance(exempt, str):
        exempt = exempt.lower() in ("1", "true", "yes")
    return KernelSpec(n, angular, coefficient, coeff_sup=sup, cancellation_exempt=bool(exempt),
                      lipschitz_alpha=lip, name=str(cfg.get("name", family)))


# --------------------------------------------------------------------------
# conditions (1.1)-(1.3)


def default_sphere_order(n):
    return 256 if n == 2 else 41


def check_cancellation(kernel, order=None, x=None):
    """|integral over the sphere of Omega(x, .)| by a fixed sphere rule.

    For separable kernels the x-dependence factors out and the angular part
    alone is integrated (``x`` is ignored).  On the circle the nodes sit at
    half steps so none lands on a coordinate axis, where test kernels jump.
    """
    n = kernel.dimension
    order = order or default_sphere_order(n)
    pts, w = circle_rule(order, np.pi / order) if n == 2 else sphere_rule(n, order)
    if kernel.separable:
        vals = kernel.angular_values(pts)
    else:
        x = np.zeros(n) if x is None else np.asarray(x, dtype=float)
        vals = kernel.on_sphere(x, pts)
    return float(abs(w @ vals))


def cancellation_passes(kernel, residual, tol=CANCEL_TOL):
    return bool(kernel.cancellation_exempt or residual <= tol)


def default_x_samples(n, half_width=4.0, per_axis=None):
    per_axis = per_axis or (21 if n == 2 else 9)
    axes = [np.linspace(-half_width, half_width, per_axis)] * n
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)


DEFAULT_R_SAMPLES = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)


@dataclass
class UniformL2Result:
    sampled_max: float
    analytic_bound: Optional[float]


def angular_l2_norm(kernel, order=None):
    n = kernel.dimension
    pts, w = sphere_rule(n, order or default_sphere_order(n))
    return float(np.sqrt(w @ kernel.angular_values(pts) ** 2))


def check_uniform_l2(kernel, x_samples=None, r_samples=DEFAULT_R_SAMPLES, order=None):
    """Max over sampled (x, r) of ||Omega(x + r z', z')||_{L2(dsigma(z'))}."""
    n = kernel.dimension
    X = default_x_samples(n) if x_samples is None else check_points(x_samples, n)
    R = np.asarray(r_samples, dtype=float).reshape(-1)
    if X.shape[0] == 0 or R.size == 0:
        raise DomainError("uniform L2 check needs nonempty sample sets")
    if np.any(R < 0):
        raise DomainError("r samples must be >= 0")
    pts, w = sphere_rule(n, order or default_sphere_order(n))
    best = 0.0
    for r in R:
        where = X[:, None, :] + r * pts[None, :, :]
        vals = kernel.on_sphere(where, np.broadcast_to(pts, where.shape))
        best = max(best, float(np.sqrt((vals ** 2 @ w).max())))
    bound = kernel.coeff_sup * angular_l2_norm(kernel, order) if kernel.separable else None
    return UniformL2Result(best, bound)


# --------------------------------------------------------------------------
# continuity modulus omega_2


@dataclass
class ModulusTable:
    """omega_2 sampled on an increasing delta grid.

    Cap suprema come from a discrete search, so values are lower estimates
    of the true modulus (``one_sided`` records this).
    """

    delta_grid: np.ndarray
    omega2_values: np.ndarray
    raw_values: np.ndarray = None
    estimation_meta: dict = field(default_factory=dict)
    one_sided: bool = True

    def __post_init__(self):
        self.delta_grid = np.asarray(self.delta_grid, dtype=float)
        self.omega2_values = np.asarray(self.omega2_values, dtype=float)
        if self.raw_values is None:
            self.raw_values = self.omega2_values.copy()
        if self.delta_grid.shape != self.omega2_values.shape:
            raise DomainError("delta grid and values differ in length")

    @classmethod
    def from_function(cls, func, delta_grid=DEFAULT_DELTA_GRID):
        d = np.asarray(delta_grid, dtype=float)
        return cls(d, np.maximum.accumulate(np.asarray(func(d), dtype=float)))

    def __call__(self, delta):
        """Log-log interpolation, power-law extrapolation past both ends."""
        return _loglog_eval(self.delta_grid, self.omega2_values, np.asarray(delta, dtype=float))


def _cap_points(a, spacing):
    """Offsets in [-a, a] including both endpoints, at most ``spacing`` apart."""
    k = max(3, int(math.ceil(2 * a / spacing)) + 1)
    return np.linspace(-a, a, k)


def _cap_sup_circle(diff, theta, a, spacing):
    offs = _cap_points(a, spacing)
    base = np.stack([np.cos(theta), np.sin(theta)], -1)[:, None, :]
    best = np.zeros_like(theta)
    for chunk in np.array_split(offs, max(1, offs.size // 512)):
        t = theta[:, None] + chunk[None, :]
        v = np.stack([np.cos(t), np.sin(t)], -1)
        best = np.maximum(best, diff(base, v).max(axis=1))
    return best


def _frame(u):
    """Two unit tangents orthogonal to each row of ``u`` (S^2)."""
    a = np.where(np.abs(u[:, :1]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    e1 = a - (a * u).sum(1, keepdims=True) * u
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(u, e1)
    return e1, e2


def _cap_sup_sphere(diff, u, a, spacing):
    """sup over the spherical cap of angular radius ``a`` about each ``u``."""
    e1, e2 = _frame(u)
    rings = np.linspace(0.0, a, max(2, int(math.ceil(a / spacing)) + 1))[1:]
    best = np.zeros(u.shape[0])
    for psi in rings:
        k = max(6, int(math.ceil(2 * np.pi * math.sin(psi) / spacing)))
        phi = 2 * np.pi * np.arange(k) / k
        d = (np.cos(phi)[None, :, None] * e1[:, None, :] + np.sin(phi)[None, :, None] * e2[:, None, :])
        v = math.cos(psi) * u[:, None, :] + math.sin(psi) * d
        best = np.maximum(best, diff(u[:, None, :], v).max(axis=1))
    return best


@dataclass(frozen=True)
class _AngularDiff:
    kernel: "KernelSpec"

    def __call__(self, u, v):
        return np.abs(self.kernel.angular_values(v) - self.kernel.angular_values(u))


@dataclass(frozen=True)
class _ShiftedDiff:
    """|Omega(x + r z', y') - Omega(x + r z', z')| with z' the cap center."""

    kernel: "KernelSpec"
    x: np.ndarray
    r: float

    def __call__(self, u, v):
        where = self.x + self.r * u
        return np.abs(self.kernel.on_sphere(where, v) - self.kernel.on_sphere(where, u))


def omega2(kernel, delta_grid=DEFAULT_DELTA_GRID, meta=None):
    """Estimate omega_2 on ``delta_grid`` (chord radii in (0, 2]).

    ``meta`` keys: ``sphere_order``, ``cap_refinement`` (cap sub-grid is
    this many times finer than the outer sphere grid, default 10),
    ``x_samples``/``r_samples`` (non-separable kernels only).
    """
    meta = dict(meta or {})
    d = np.asarray(delta_grid, dtype=float).reshape(-1)
    if d.size == 0:
        raise DomainError("omega2 needs a nonempty delta grid")
    if np.any(d <= 0) or np.any(d > 2) or np.any(np.diff(d) <= 0):
        raise DomainError("delta grid must be increasing within (0, 2]")
    n = kernel.dimension
    order = meta.setdefault("sphere_order", default_sphere_order(n))
    refine = meta.setdefault("cap_refinement", 10)
    pts, w = sphere_rule(n, order)
    outer_spacing = 2 * np.pi / order if n == 2 else math.sqrt(4 * np.pi / len(w))
    spacing = outer_spacing / refine
    caps = 2 * np.arcsin(np.minimum(d, 2.0) / 2)

    if kernel.separable:
        funcs = [_AngularDiff(kernel)]
        scale = kernel.coeff_sup
    else:
        xs = check_points(meta.get("x_samples", default_x_samples(n, per_axis=5)), n)
        rs = np.asarray(meta.get("r_samples", (0.0, 1.0)), dtype=float)
        funcs = [_ShiftedDiff(kernel, x, r) for x in xs for r in rs]
        scale = 1.0
    raw = np.zeros(d.size)
    for j, a in enumerate(caps):
        best = 0.0
        for fn in funcs:
            if n == 2:
                theta = np.arctan2(pts[:, 1], pts[:, 0])
                sup = _cap_sup_circle(fn, theta, a, spacing)
            else:
                sup = _cap_sup_sphere(fn, pts, a, spacing)
            best = max(best, float(np.sqrt(w @ sup ** 2)))
        raw[j] = scale * best
    meta["cap_spacing"] = spacing
    return ModulusTable(d, np.maximum.accumulate(raw), raw, meta)


# --------------------------------------------------------------------------
# Dini-type integrals


def _loglog_eval(xg, yg, x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = yg > 0
    if not np.any(pos):
        out[...] = 0.0
        return out
    lx = np.log(xg)
    with np.errstate(divide="ignore"):
        ly = np.where(pos, np.log(np.where(pos, yg, 1.0)), -np.inf)
    flat = x.reshape(-1)
    res = np.interp(np.log(flat), lx, ly)
    # power-law extrapolation from the end segments
    for end, sl in ((flat < xg[0], slice(0, 2)), (flat > xg[-1], slice(-2, None))):
        if np.any(end) and np.all(pos[sl]):
            s = (ly[sl][1] - ly[sl][0]) / (lx[sl][1] - lx[sl][0])
            ref = 0 if sl.start == 0 else -1
            res[end] = ly[ref] + s * (np.log(flat[end]) - lx[ref])
    out[...] = np.exp(res).reshape(x.shape)
    return out


def fit_local_power(table, points=FIT_POINTS):
    """Slope and intercept of log omega_2 vs log delta on the smallest grid points.

    Returns ``None`` when those values are all zero (modulus vanishes there).
    """
    d, w = table.delta_grid[:points], table.omega2_values[:points]
    pos = w > 0
    if pos.sum() < 2:
        return None
    slope, intercept = np.polyfit(np.log(d[pos]), np.log(w[pos]), 1)
    return float(slope), float(intercept)


def _segment_integral(table, weight, upper=1.0, nodes=16):
    """Integral of omega_2(delta) * weight(delta) over [delta_min, upper]."""
    d, w = table.delta_grid, table.omega2_values
    lo = d[0]
    hi = upper
    if hi <= lo:
        return 0.0
    knots = np.concatenate([d[(d > lo) & (d < hi)], [hi]])
    knots = np.concatenate([[lo], knots])
    # integrate in log(delta); log-linear interpolation is exact for power laws
    a, b = np.log(knots[:-1]), np.log(knots[1:])
    from .sphere import gauss_on
    s, ws = gauss_on(a, b, nodes)
    delta = np.exp(s)
    vals = table(delta) * weight(delta) * delta
    return float((vals * ws).sum())


def _check_table(table):
    if table.delta_grid.size < 3:
        raise DomainError("modulus table needs at least 3 points to fit the local power")


def dini_integral(table, alpha):
    """Integral over (0, 1] of omega_2(delta) / delta**(1 + alpha).

    Returns ``math.inf`` when the fitted local power of omega_2 near 0 is
    <= alpha (divergent integrand).
    """
    alpha = check_unit_interval(alpha, "alpha")
    _check_table(table)
    if not np.any(table.omega2_values > 0):
        return 0.0
    fit = fit_local_power(table)
    main = _segment_integral(table, lambda t: t ** (-1.0 - alpha))
    if fit is None:
        return main
    slope, intercept = fit
    if slope <= alpha + SLOPE_EPS:
        return math.inf
    dmin = table.delta_grid[0]
    tail = math.exp(intercept) * dmin ** (slope - alpha) / (slope - alpha)
    return main + tail


def log_dini_integral(table, sigma):
    """Integral over (0, 1] of omega_2(delta)/delta * (1 + |log delta|)**sigma."""
    sigma = float(sigma)
    if not sigma > 1:
        raise DomainError(f"sigma must exceed 1, got {sigma}")
    _check_table(table)
    if not np.any(table.omega2_values > 0):
        return 0.0
    fit = fit_local_power(table)
    main = _segment_integral(table, lambda t: (1.0 + np.abs(np.log(t))) ** sigma / t)
    if fit is None:
        return main
    slope, intercept = fit
    if slope <= SLOPE_EPS:
        return math.inf
    # with u = -log delta:  C * int_U^inf exp(-s u) (1+u)^sigma du
    big_u = -math.log(table.delta_grid[0])
    tail = (math.exp(intercept) * math.exp(slope) * slope ** (-sigma - 1)
            * gamma(sigma + 1) * gammaincc(sigma + 1, slope * (1 + big_u)))
    return main + float(tail)


# --------------------------------------------------------------------------
# Lipschitz condition


@dataclass
class LipschitzFit:
    constant: float
    refined_constant: float
    bounded: bool


def _lipschitz_sample(kernel, alpha, budget, rng, x_samples):
    n = kernel.dimension
    z = rng.normal(size=(budget, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    t = rng.normal(size=(budget, n))
    t -= (t * z).sum(1, keepdims=True) * z
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    psi = np.exp(rng.uniform(math.log(2 * np.pi / budget), math.log(np.pi), size=(budget, 1)))
    y = np.cos(psi) * z + np.sin(psi) * t
    chord = np.linalg.norm(y - z, axis=1)
    best = 0.0
    if kernel.separable:
        diff = np.abs(kernel.angular_values(y) - kernel.angular_values(z))
        best = kernel.coeff_sup * float(np.max(diff / chord ** alpha))
    else:
        for x in x_samples:
            diff = np.abs(kernel.on_sphere(x, y) - kernel.on_sphere(x, z))
            best = max(best, float(np.max(diff / chord ** alpha)))
    return best


def lipschitz_check(kernel, alpha, pair_budget=20000, seed=0, x_samples=None, growth_tol=0.25):
    """Largest sampled |Omega(x,y') - Omega(x,z')| / |y' - z'|**alpha.

    The search is repeated with sixteen times the budget; ``bounded`` is False
    when the constant keeps growing (the kernel is not Lipschitz-alpha at the
    sampled resolution).
    """
    alpha = check_unit_interval(alpha, "alpha")
    pair_budget = int(pair_budget)
    if pair_budget < 2:
        raise DomainError("pair_budget must be >= 2")
    n = kernel.dimension
    xs = default_x_samples(n, per_axis=5) if x_samples is None else check_points(x_samples, n)
    c1 = _lipschitz_sample(kernel, alpha, pair_budget, np.random.default_rng(seed), xs)
    c2 = _lipschitz_sample(kernel, alpha, 16 * pair_budget, np.random.default_rng(seed + 1), xs)
    bounded = c2 <= (1 + growth_tol) * c1 + 1e-300
    return LipschitzFit(c1, c2, bool(bounded))
