"""Quadrature engines for the inner field F(y, t) and the outer (y, t) integrals.

The inner field of a compactly supported f is

    F(y, t) = int_{|y-z|<t} Omega(y, y-z) |y-z|^(rho-n) f(z) dz.

In polar coordinates about y, w = y - z = u*theta, the radial factor
u^(rho-n) u^(n-1) = u^(rho-1) is integrable, so F(y, .) is the cumulative
integral of a one-dimensional profile.  For f supported in balls the profile
is computed once per y (directions that hit each ball form a cap whose
half-angle is known in closed form), represented by Legendre antiderivatives,
and then evaluated at any t.  F(y, t) is constant once B(y, t) covers the
supports, which makes the t-direction of the square-function integrals exact.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import legendre as L
from scipy.special import hyp2f1

from ._validation import check_point, check_points, check_positive
from .exceptions import DomainError, TruncationError
from .sphere import ball_volume, gauss_legendre, gauss_on, sphere_rule, surface_area


@dataclass(frozen=True)
class QuadPlan:
    """Resolution and truncation settings.

    ``t_min`` defaults to 1e-3 times the smallest support radius and ``R_y``
    (radius of the outer y-domain) to 2**16 times the largest.  ``t_max`` is
    used by the generic cone route only.
    """

    sphere_order: int = 64
    arc_nodes: int = 24
    radial_nodes: int = 24
    t_nodes: int = 16
    y_radial_nodes: int = 8
    y_angular: int = 128
    radial_panels: int = 2
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    R_y: Optional[float] = None
    rel_tol: float = 1e-2
    abs_tol: float = 1e-30

    def __post_init__(self):
        if self.t_min is not None and not self.t_min > 0:
            raise DomainError("t_min must be > 0")
        if self.t_max is not None and self.t_min is not None and not self.t_max > self.t_min:
            raise DomainError("t_max must exceed t_min")
        if not 0 < self.rel_tol <= 0.1:
            raise DomainError("rel_tol must lie in (0, 0.1]")
        for name in ("sphere_order", "arc_nodes", "radial_nodes", "t_nodes",
                     "y_radial_nodes", "y_angular", "radial_panels"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be a positive integer")

    def refined(self):
        """Twice the sphere order and radial resolution everywhere."""
        return replace(self, sphere_order=2 * self.sphere_order, arc_nodes=2 * self.arc_nodes,
                       radial_nodes=2 * self.radial_nodes, t_nodes=2 * self.t_nodes,
                       y_angular=2 * self.y_angular, radial_panels=2 * self.radial_panels)

    def resolved(self, supports):
        rmin = min(r for _, r in supports) if supports else 1.0
        rmax = max(r for _, r in supports) if supports else 1.0
        return replace(self,
                       t_min=self.t_min if self.t_min is not None else 1e-3 * rmin,
                       R_y=self.R_y if self.R_y is not None else 2.0 ** 16 * rmax)

    def as_dict(self):
        from dataclasses import asdict
        return asdict(self)


# --------------------------------------------------------------------------
# supports


def blocks_of(f):
    """(center, radius, profile) triples of a compactly supported input."""
    if hasattr(f, "blocks"):
        items = list(f.blocks)
    elif all(hasattr(f, a) for a in ("center", "radius", "profile")):
        items = [f]
    else:
        raise DomainError("f must be an Atom, a BlockSum, or expose center/radius/profile")
    return [(np.asarray(b.center, dtype=float), float(b.radius), b.profile) for b in items]


def supports_of(f):
    return [(c, r) for c, r, _ in blocks_of(f)]


# --------------------------------------------------------------------------
# Legendre helpers


@lru_cache(maxsize=32)
def _legendre_setup(m):
    xi, w = gauss_legendre(m)
    V = L.legvander(xi, m - 1)
    Vinv = np.linalg.inv(V)
    Vinv.setflags(write=False)
    return xi, w, Vinv


def _antiderivative(G):
    """Legendre coefficients (rows) of the antiderivative from -1 of node values G."""
    m = G.shape[-1]
    _, _, Vinv = _legendre_setup(m)
    coef = G @ Vinv.T
    return L.legint(coef, lbnd=-1, axis=-1)


def _legval_rows(xi, coef):
    """Evaluate row-wise Legendre series: xi (m, T), coef (m, K) -> (m, T)."""
    c = np.moveaxis(coef, -1, 0)[..., None]
    return L.legval(xi, c, tensor=False)


# --------------------------------------------------------------------------
# cap rules: directions theta with |theta - axis| angle <= phi


def _perp2(e):
    return np.stack([-e[..., 1], e[..., 0]], axis=-1)


def _frame3(e):
    a = np.where(np.abs(e[..., :1]) < 0.9, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
    e1 = a - (a * e).sum(-1, keepdims=True) * e
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    return e1, np.cross(e, e1)


def _cap_rule(n, axis, phi, plan):
    """Directions (m, M, Q, n) and weights (m, M, Q) on caps of half-angle phi (m, M)."""
    if n == 2:
        xi, w = gauss_legendre(plan.arc_nodes)
        psi = phi[..., None] * xi
        wt = phi[..., None] * w
        e = axis[:, None, None, :]
        dirs = np.cos(psi)[..., None] * e + np.sin(psi)[..., None] * _perp2(e)
        return dirs, wt
    if n == 3:
        xi, w = gauss_legendre(max(4, plan.arc_nodes // 2))
        k = max(8, plan.arc_nodes)
        chi = 2 * np.pi * np.arange(k) / k
        psi = 0.5 * phi[..., None] * (1 + xi)  # (m, M, A)
        wpsi = 0.5 * phi[..., None] * w * np.sin(psi)
        e1, e2 = _frame3(axis)
        ring = (np.cos(chi)[:, None] * e1[:, None, :] + np.sin(chi)[:, None] * e2[:, None, :])  # (m,K,3)
        dirs = (np.cos(psi)[..., None, None] * axis[:, None, None, None, :]
                + np.sin(psi)[..., None, None] * ring[:, None, None, :, :])
        wt = (wpsi[..., None] * (2 * np.pi / k)) * np.ones(k)
        m, M = phi.shape
        return dirs.reshape(m, M, -1, 3), wt.reshape(m, M, -1)
    raise DomainError(f"quadrature is provided for n in (2, 3), got {n}")


def _full_rule(n, plan):
    return sphere_rule(n, plan.sphere_order if n == 2 else min(plan.sphere_order // 2 + 1, 131))


# --------------------------------------------------------------------------
# per-y profiles


@dataclass
class BlockProfile:
    """Profile of one block for a batch of y: pieces A (full sphere) and B (caps)."""

    LA: np.ndarray
    antiA: np.ndarray
    totalA: np.ndarray
    mB: np.ndarray
    hB: np.ndarray
    antiB: np.ndarray
    totalB: np.ndarray

    @property
    def lo(self):
        return np.where(self.LA > 0, 0.0, self.mB - self.hB)

    @property
    def hi(self):
        return self.mB + self.hB

    def F(self, t):
        """Cumulative field at t (m, T)."""
        t = np.asarray(t, dtype=float)
        LA = self.LA[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            vA = np.sqrt(np.clip(t / np.where(LA > 0, LA, 1.0), 0.0, 1.0))
        partA = _legval_rows(2 * vA - 1, self.antiA)
        FA = np.where(t >= LA, self.totalA[:, None], partA)
        FA = np.where(LA > 0, FA, 0.0)
        mB, hB = self.mB[:, None], self.hB[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.clip((mB - t) / np.where(hB > 0, hB, 1.0), -1.0, 1.0)
        tau = np.arccos(c)
        partB = _legval_rows(2 * tau / np.pi - 1, self.antiB)
        FB = np.where(t <= mB - hB, 0.0, np.where(t >= mB + hB, self.totalB[:, None], partB))
        FB = np.where(hB > 0, FB, 0.0)
        return FA + FB


def _block_profile(kernel, Y, center, radius, prof, rho, plan):
    n = Y.shape[1]
    m = Y.shape[0]
    xi, w, _ = _legendre_setup(plan.radial_nodes)
    diff = Y - center
    D = np.linalg.norm(diff, axis=1)
    safe = np.where(D > 0, D, 1.0)
    axis = np.where(D[:, None] > 0, diff / safe[:, None], np.eye(n)[0])
    r = radius
    Yb = Y[:, None, None, :]

    # piece A: u = LA v^2 over the full sphere
    LA = np.clip(r - D, 0.0, None)
    v = 0.5 * (xi + 1)
    uA = LA[:, None] * v ** 2
    dirs, wd = _full_rule(n, plan)
    GA = np.zeros((m, xi.size))
    act = LA > 0
    if np.any(act):
        Ya = Yb[act]
        z = Ya - uA[act][:, :, None, None] * dirs
        om = kernel.on_sphere(Ya, np.broadcast_to(dirs, z.shape))
        g = (om * prof(z)) @ wd
        GA[act] = uA[act] ** (rho - 1) * g * (LA[act][:, None] * v)

    # piece B: u = mB - hB cos(tau) over caps toward the ball
    inside = D < r
    mB = np.where(inside, r, D)
    hB = np.where(inside, D, r)
    tau = 0.5 * np.pi * (xi + 1)
    uB = mB[:, None] - hB[:, None] * np.cos(tau)
    GB = np.zeros((m, xi.size))
    act = hB > 0
    if np.any(act):
        u = uB[act]
        Dd = D[act][:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            cphi = (Dd ** 2 + u ** 2 - r ** 2) / (2 * u * Dd)
        phi = np.arccos(np.clip(np.nan_to_num(cphi, nan=1.0), -1.0, 1.0))
        dirs_b, wb = _cap_rule(n, axis[act], phi, plan)
        Ya = Yb[act]
        z = Ya - u[:, :, None, None] * dirs_b
        om = kernel.on_sphere(np.broadcast_to(Ya, dirs_b.shape), dirs_b)
        g = (om * prof(z) * wb).sum(-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            radial = np.where(u > 0, u ** (rho - 1), 0.0)
        GB[act] = radial * g * (hB[act][:, None] * np.sin(tau) * 0.5 * np.pi)

    # d(piece variable) = d(xi)/2 for A's v in [0,1]; tau already carries pi/2
    antiA = _antiderivative(GA)
    antiB = _antiderivative(GB)
    return BlockProfile(LA, antiA, antiA.sum(-1), mB, hB, antiB, antiB.sum(-1))


@dataclass
class Profiles:
    """Field profiles for a batch of y, plus the fixed t-intervals in [t_min, U]."""

    Y: np.ndarray
    blocks: list
    edges: np.ndarray      # (m, I+1)
    q_anti: np.ndarray     # (m, I, Mt+1) antiderivative of |F|^2 t^-k in interval variable
    q_total: np.ndarray    # (m, I)
    t_nodes: np.ndarray    # (m, I, Mt)
    q_weighted: np.ndarray  # (m, I, Mt): |F|^2 t^-k dt at nodes
    F_inf: np.ndarray      # (m,)
    U: np.ndarray          # (m,)
    k: float
    t_min: float

    def F(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(np.broadcast_shapes(t.shape, (self.Y.shape[0], 1)))
        for b in self.blocks:
            out = out + b.F(t)
        return out

    def cone_tail(self, T):
        """int_T^inf |F(y,t)|^2 t^-k dt for T >= t_min, one value per y."""
        T = np.maximum(np.asarray(T, dtype=float), self.t_min)
        k = self.k
        e = self.edges
        beyond = (self.F_inf ** 2) * np.maximum(T, self.U) ** (1 - k) / (k - 1)
        lo, hi = e[:, :-1], e[:, 1:]
        full = lo >= T[:, None]
        total = beyond + np.where(full, self.q_total, 0.0).sum(1)
        inside = (lo < T[:, None]) & (hi > T[:, None])
        if np.any(inside):
            rows, cols = np.nonzero(inside)
            a, b = lo[rows, cols], hi[rows, cols]
            half, mid = 0.5 * (b - a), 0.5 * (a + b)
            tau = np.arccos(np.clip((mid - T[rows]) / half, -1.0, 1.0))
            xi = 2 * tau / np.pi - 1
            part = _legval_rows(xi[:, None], self.q_anti[rows, cols])[:, 0]
            total[rows] += self.q_total[rows, cols] - part
        return total

    def _sparse(self):
        if not hasattr(self, "_sp"):
            rows, cols, nodes = np.nonzero(self.q_weighted)
            self._sp = (rows, self.t_nodes[rows, cols, nodes], self.q_weighted[rows, cols, nodes])
        return self._sp

    def weighted_all(self, a, lam_n, t_cut=None):
        """int_{t_min}^inf (t/(t+a))^{lam n} |F|^2 t^-k dt (optionally only t > t_cut)."""
        k = self.k
        rows, t, q = self._sparse()
        vals = (t / (t + a[rows])) ** lam_n * q
        if t_cut is not None:
            vals = np.where(t > t_cut[rows], vals, 0.0)
        body = np.bincount(rows, weights=vals, minlength=self.Y.shape[0])
        U = self.U if t_cut is None else np.maximum(self.U, t_cut)
        tail = (self.F_inf ** 2 * U ** (1 - k) / (k - 1)
                * hyp2f1(lam_n, k - 1, k, -a / U))
        return body + tail


def _ladder(t_min, top):
    j = max(0, int(math.ceil(math.log(max(top, t_min) / t_min, 4.0))))
    return t_min * 4.0 ** np.arange(j + 1)


def compute_profiles(kernel, f, Y, rho, plan, chunk=256):
    """Profiles of the inner field of ``f`` at the points ``Y`` (m, n)."""
    blocks = blocks_of(f)
    n = kernel.dimension
    Y = check_points(Y, n, "y")
    plan = plan.resolved([(c, r) for c, r, _ in blocks])
    k = n + 2 * rho + 1
    parts = []
    for s in range(0, Y.shape[0], chunk):
        Yc = Y[s:s + chunk]
        bps = [_block_profile(kernel, Yc, c, r, p, rho, plan) for c, r, p in blocks]
        parts.append(_finish_profiles(Yc, bps, k, plan, max(r for _, r, _ in blocks)))
    return _concat_profiles(parts, k, plan.t_min) if parts else None


def _finish_profiles(Y, bps, k, plan, rmax):
    m = Y.shape[0]
    t_min = plan.t_min
    pts = [np.stack([b.lo, np.where(b.LA > 0, b.LA, b.lo), b.hi], 1) for b in bps]
    U = np.max([b.hi for b in bps], axis=0)
    ladder = _ladder(t_min, 4 * rmax)
    allp = np.concatenate(pts + [np.broadcast_to(ladder, (m, ladder.size))], axis=1)
    edges = np.sort(np.clip(allp, t_min, U[:, None]), axis=1)
    edges = np.concatenate([np.full((m, 1), t_min), edges, U[:, None]], axis=1)
    edges = np.maximum.accumulate(np.minimum(edges, np.maximum(U, t_min)[:, None]), axis=1)
    xi, w, _ = _legendre_setup(plan.t_nodes)
    tau = 0.5 * np.pi * (xi + 1)
    a, b = edges[:, :-1, None], edges[:, 1:, None]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    t = mid - half * np.cos(tau)
    dt = half * np.sin(tau) * 0.5 * np.pi  # d t / d xi
    I = edges.shape[1] - 1
    F = np.zeros((m, I * xi.size))
    tt = t.reshape(m, -1)
    for bp in bps:
        F += bp.F(tt)
    F = F.reshape(m, I, xi.size)
    q = F ** 2 * t ** (-k) * dt
    anti = _antiderivative(q)
    F_inf = sum(bp.totalA + bp.totalB for bp in bps)
    return Profiles(Y, bps, edges, anti, anti.sum(-1), t, q * w, F_inf, np.maximum(U, t_min),
                    k, t_min)


def _concat_profiles(parts, k, t_min):
    if len(parts) == 1:
        return parts[0]
    cat = lambda name: np.concatenate([getattr(p, name) for p in parts], axis=0)
    blocks = []
    for j in range(len(parts[0].blocks)):
        bs = [p.blocks[j] for p in parts]
        blocks.append(BlockProfile(*[np.concatenate([getattr(b, f) for b in bs], axis=0)
                                     for f in ("LA", "antiA", "totalA", "mB", "hB", "antiB", "totalB")]))
    return Profiles(cat("Y"), blocks, cat("edges"), cat("q_anti"), cat("q_total"), cat("t_nodes"),
                    cat("q_weighted"), cat("F_inf"), cat("U"), k, t_min)


def inner_integral(kernel, f, y, t, plan=None, rho=1.5):
    """F(y, t) = int_{|y-z|<t} Omega(y, y-z)/|y-z|^(n-rho) f(z) dz."""
    n = kernel.dimension
    if not 0 < rho < n:
        raise DomainError(f"rho must lie in (0, n) for local integrability, got {rho}")
    t = float(t)
    if not t > 0:
        raise DomainError("t must be > 0")
    y = check_point(y, n, "y")
    plan = plan or QuadPlan()
    prof = compute_profiles(kernel, f, y[None, :], rho, plan.resolved(supports_of(f)))
    return float(prof.F(np.array([[t]]))[0, 0])


# --------------------------------------------------------------------------
# inner fields


class InnerField:
    """F(y, t) given by a vectorized callable ``func(Y (..., n), T (...))``.

    Scalar lookups are memoized on (y, t) rounded to 12 significant digits.
    ``supports`` (list of (center, radius)) enables the tail bound.
    """

    def __init__(self, func, dimension, rho, supports=None):
        self.func = func
        self.dimension = int(dimension)
        self.rho = float(rho)
        self.supports = supports
        self._memo = {}

    def _key(self, y, t):
        return tuple(float(f"{v:.12g}") for v in np.ravel(y)) + (float(f"{t:.12g}"),)

    def __call__(self, y, t):
        if np.ndim(t) == 0 and np.ndim(y) == 1:
            key = self._key(y, t)
            if key not in self._memo:
                self._memo[key] = float(self.func(np.asarray(y, float)[None, :], np.array([t]))[0])
            return self._memo[key]
        return np.asarray(self.func(np.asarray(y, float), np.asarray(t, float)), dtype=float)

    def evaluate(self, Y, T):
        return np.asarray(self.func(Y, T), dtype=float)


class ProfileField(InnerField):
    """Inner field of a compactly supported ``f`` backed by per-y profiles.

    ``fit_grid`` computes profiles on the outer y-grid once; every
    evaluation point x then reuses them.
    """

    def __init__(self, kernel, f, rho, plan=None):
        n = kernel.dimension
        if not 0 < rho < n:
            raise DomainError(f"rho must lie in (0, n), got {rho}")
        self.kernel = kernel
        self.f = f
        self.plan = (plan or QuadPlan()).resolved(supports_of(f))
        super().__init__(self._evaluate, n, rho, supports_of(f))
        self.grid = None
        self.profiles = None

    def _evaluate(self, Y, T):
        Y = np.asarray(Y, dtype=float)
        T = np.asarray(T, dtype=float)
        Yf, Tf = np.broadcast_arrays(Y, T[..., None])
        flat_y = Yf.reshape(-1, self.dimension)
        flat_t = Tf[..., 0].reshape(-1)
        if np.any(flat_t <= 0):
            raise DomainError("t must be > 0")
        prof = compute_profiles(self.kernel, self.f, flat_y, self.rho, self.plan)
        return prof.F(flat_t[:, None])[:, 0].reshape(T.shape if T.ndim >= Y.ndim - 1 else Yf.shape[:-1])

    def fit_grid(self):
        if self.profiles is None:
            self.grid = y_grid(self.supports, self.plan, self.dimension)
            self.profiles = compute_profiles(self.kernel, self.f, self.grid.points, self.rho, self.plan)
        return self

    def amplitude_bound(self):
        """A with |F(y,t)| <= A dist(y, supp)^(rho-n) (no cancellation used)."""
        n = self.dimension
        pts, w = sphere_rule(n, 256 if n == 2 else 41)
        if self.kernel.separable:
            sup_omega = self.kernel.coeff_sup * float(np.abs(self.kernel.angular_values(pts)).max())
        else:
            sup_omega = float(np.abs(self.kernel.on_sphere(np.zeros(n), pts)).max())
        total = 0.0
        from .sphere import ball_rule
        bp, bw = ball_rule(n, 24, 48 if n == 2 else 41)
        for c, r, prof in blocks_of(self.f):
            total += float(bw @ np.abs(prof(c + r * bp))) * r ** n
        return sup_omega * total


# --------------------------------------------------------------------------
# outer y-grids


@dataclass
class YGrid:
    points: np.ndarray
    weights: np.ndarray
    weights_half: np.ndarray   # embedded coarser rule for error estimates
    center: np.ndarray
    extent: float              # all supports lie in B(center, extent)
    R: float


def _radial_breaks(radii, R, panels):
    r0 = min(radii)
    br = {0.0, 0.5 * r0, R}
    for r in radii:
        br.add(r)
    x = 2 * max(radii)
    while x < R:
        br.add(x)
        x *= 2
    br = np.array(sorted(b for b in br if b <= R))
    if panels > 1:
        fine = [np.linspace(a, b, panels + 1)[:-1] for a, b in zip(br[:-1], br[1:])]
        br = np.concatenate(fine + [[br[-1]]])
    return br


def _polar_grid(center, radii, R, plan, n):
    br = _radial_breaks(radii, R, plan.radial_panels)
    rho_, wr = gauss_on(br[:-1], br[1:], plan.y_radial_nodes)
    rho_, wr = rho_.reshape(-1), wr.reshape(-1)
    if n == 2:
        m = plan.y_angular
        dirs, wa = sphere_rule(2, m)
        dirs_h, _ = sphere_rule(2, m)
        wa_half = np.where(np.arange(m) % 2 == 0, 2 * wa, 0.0)
    else:
        dirs, wa = sphere_rule(3, min(plan.y_angular // 2 + 1, 131))
        wa_half = _lebedev_half(dirs, plan)
    pts = center + rho_[:, None, None] * dirs[None, :, :]
    w = (wr * rho_ ** (n - 1))[:, None] * wa[None, :]
    wh = (wr * rho_ ** (n - 1))[:, None] * wa_half[None, :]
    return pts.reshape(-1, n), w.reshape(-1), wh.reshape(-1)


def _lebedev_half(dirs, plan):
    # coarser Lebedev rule interpolated onto the fine nodes by nearest neighbour
    coarse, wc = sphere_rule(3, max(3, min(plan.y_angular // 4 + 1, 131)))
    idx = np.argmax(coarse @ dirs.T, axis=1)
    wh = np.zeros(dirs.shape[0])
    np.add.at(wh, idx, wc)
    return wh


def y_grid(supports, plan, n):
    """Outer integration grid: polar grids about each distinct support center,
    glued by the partition of unity w_j = (r_j/|y-c_j|)^4 / sum."""
    centers = {}
    for c, r in supports:
        key = tuple(np.round(np.asarray(c, dtype=float), 12))
        centers.setdefault(key, []).append(r)
    cs = [np.array(k) for k in centers]
    allc = np.array(cs)
    ref = allc.mean(axis=0)
    extent = max(np.linalg.norm(np.asarray(c) - ref) + r for c, r in supports)
    R = max(plan.R_y, 4 * extent)
    pts_all, w_all, wh_all = [], [], []
    scales = np.array([min(centers[k]) for k in centers])
    for j, c in enumerate(cs):
        pts, w, wh = _polar_grid(c, centers[tuple(np.round(c, 12))], R, plan, n)
        if len(cs) > 1:
            d = np.linalg.norm(pts[:, None, :] - allc[None, :, :], axis=2)
            d = np.maximum(d, 1e-300)
            logw = 4 * (np.log(scales)[None, :] - np.log(d))
            logw -= logw.max(axis=1, keepdims=True)
            ww = np.exp(logw)
            share = ww[:, j] / ww.sum(axis=1)
            w, wh = w * share, wh * share
        pts_all.append(pts)
        w_all.append(w)
        wh_all.append(wh)
    return YGrid(np.concatenate(pts_all), np.concatenate(w_all), np.concatenate(wh_all),
                 ref, extent, R)


# --------------------------------------------------------------------------
# outer integrals


@dataclass
class Estimate:
    """A quadrature value with its uncertainty (never a bare number)."""

    value: float
    uncertainty: float
    tail: float = 0.0
    quad_error: float = 0.0

    def sqrt(self):
        v = math.sqrt(max(self.value, 0.0))
        u = self.uncertainty / (2 * v) if v > 0 else math.sqrt(max(self.uncertainty, 0.0))
        return Estimate(v, u, self.tail, self.quad_error)

    def as_dict(self):
        return {"value": self.value, "uncertainty": self.uncertainty}


def y_tail_bound(field, k, R):
    """Bound on the part of a square-function integral from |y - c| > R.

    Uses |F(y,t)| <= A s^(rho-n) and F = 0 for t < s, s = |y-c| - extent:
    integral <= |S^{n-1}| A^2 2^(n-1) (R - extent)^(-2n) / ((k-1) 2n), valid
    for R >= 2 extent.
    """
    grid = field.grid
    n = field.dimension
    ext = grid.extent
    if R < 2 * ext:
        return math.inf
    A = field.amplitude_bound()
    return surface_area(n) * A ** 2 * 2 ** (n - 1) * (R - ext) ** (-2 * n) / ((k - 1) * 2 * n)


def _profile_sum(field, vals):
    g = field.grid
    full = float(g.weights @ vals)
    half = float(g.weights_half @ vals)
    return full, abs(full - half)


def _check_tail(value, tail, plan, R):
    if tail > plan.rel_tol * abs(value) and abs(value) > plan.abs_tol:
        raise TruncationError(
            f"y-truncation tail {tail:.3g} exceeds rel_tol * value ({plan.rel_tol * value:.3g})",
            suggested=4 * R)


def _check_reach(field, x):
    g = field.grid
    d = float(np.min(np.linalg.norm(np.atleast_2d(g.center) - x, axis=-1)))
    if d > g.R / 4:
        raise TruncationError(f"x lies {d:.3g} from the supports, beyond the resolved y-domain "
                              f"(R_y = {g.R:.3g})", suggested=8 * d)


def _cone_profile(field, x, check=True):
    field.fit_grid()
    pr, g = field.profiles, field.grid
    x = check_point(x, field.dimension, "x")
    _check_reach(field, x)
    a = np.linalg.norm(g.points - x, axis=1)
    vals = pr.cone_tail(np.maximum(a, pr.t_min))
    full, err = _profile_sum(field, vals)
    tail = y_tail_bound(field, pr.k, g.R)
    if check:
        _check_tail(full, tail, field.plan, g.R)
    return Estimate(full, err + tail, tail, err)


def _halfspace_profile(field, x, lam, region="all", check=True):
    field.fit_grid()
    pr, g = field.profiles, field.grid
    x = check_point(x, field.dimension, "x")
    _check_reach(field, x)
    a = np.linalg.norm(g.points - x, axis=1)
    cut = np.maximum(a, pr.t_min) if region == "cone" else None
    vals = pr.weighted_all(a, lam * field.dimension, cut)
    full, err = _profile_sum(field, vals)
    tail = y_tail_bound(field, pr.k, g.R)
    if check:
        _check_tail(full, tail, field.plan, g.R)
    return Estimate(full, err + tail, tail, err)


def _cone_nodes(field, x, plan):
    """Generic route: y = x + t v, |v| < 1; returns nodes and weights per t panel."""
    n = field.dimension
    t_min = plan.t_min
    t_max = plan.t_max
    br = np.geomspace(t_min, t_max, max(2, int(math.ceil(math.log2(t_max / t_min))) + 1))
    t, wt = gauss_on(br[:-1], br[1:], plan.t_nodes)
    t, wt = t.reshape(-1), wt.reshape(-1)
    s, ws = gauss_on(0.0, 1.0, plan.y_radial_nodes * 2)
    dirs, wd = sphere_rule(n, plan.y_angular if n == 2 else 17)
    v = (s[:, None, None] * dirs[None]).reshape(-1, n)
    wv = ((ws * s ** (n - 1))[:, None] * wd[None]).reshape(-1)
    return t, wt, v, wv


def _resolve_generic(field, plan):
    if plan.t_max is None:
        if field.supports:
            ext = max(r for _, r in field.supports)
            tmax = 4 * (2 * ext + max(np.linalg.norm(c) for c, _ in field.supports) + 1)
        else:
            raise DomainError("generic fields without supports need plan.t_max")
        plan = replace(plan, t_max=tmax)
    if plan.t_min is None:
        plan = replace(plan, t_min=1e-3 * (min(r for _, r in field.supports) if field.supports else 1.0))
    return plan


def _cone_generic(field, x, plan, t_min=None):
    n, rho = field.dimension, field.rho
    k = n + 2 * rho + 1
    if t_min is not None:
        plan = replace(plan, t_min=t_min)
    t, wt, v, wv = _cone_nodes(field, x, plan)
    Y = x + t[:, None, None] * v[None, :, :]
    F = field.evaluate(Y, np.broadcast_to(t[:, None], Y.shape[:-1]))
    inner = (F ** 2) @ wv
    return float(((t ** (n - k)) * inner) @ wt)


def tail_bound(field, x, plan):
    """Bound on the cone integral beyond t_max.

    c_n sup|F(y, inf)|^2 t_max^(-2 rho) / (2 rho), with c_n the unit-ball
    volume; sup taken over sampled y with |y - x| <= t_max.  Requires
    t_max >= dist(x, supp f) + diam(supp f) when supports are known.
    """
    n, rho = field.dimension, field.rho
    x = check_point(x, n, "x")
    t_max = plan.t_max
    if t_max is None:
        raise DomainError("tail_bound needs plan.t_max")
    if field.supports:
        dist = min(max(np.linalg.norm(x - c) - r, 0.0) for c, r in field.supports)
        diam = 2 * max(r for _, r in field.supports)
        need = dist + diam
        if t_max < need:
            raise TruncationError(f"t_max = {t_max:g} is below dist + diam = {need:g}", suggested=4 * need)
    s, _ = gauss_on(0.0, 1.0, 16)
    dirs, _ = sphere_rule(n, 64 if n == 2 else 17)
    Y = x + t_max * (s[:, None, None] * dirs[None]).reshape(-1, n)
    big = np.full(Y.shape[0], 1e6 * t_max)
    F = field.evaluate(Y, big)
    sup = float(np.max(np.abs(F))) if F.size else 0.0
    return ball_volume(n) * sup ** 2 * t_max ** (-2 * rho) / (2 * rho)


def cone_integral(field, x, plan=None, check=True):
    """int int_{|y-x|<t} |F(y,t)|^2 dy dt / t^(n+2 rho+1), as an Estimate.

    Profile-backed fields integrate t exactly and report the y-truncation
    bound as uncertainty; generic fields integrate over [t_min, t_max],
    report ``tail_bound`` as uncertainty, and are checked for t_min
    sensitivity (halving t_min must move the value by < rel_tol).
    """
    x = check_point(x, field.dimension, "x")
    if isinstance(field, ProfileField):
        return _cone_profile(field, x, check)
    plan = _resolve_generic(field, plan or QuadPlan())
    val = _cone_generic(field, x, plan)
    if check:
        half = _cone_generic(field, x, plan, t_min=plan.t_min / 2)
        if abs(half - val) > plan.rel_tol * max(abs(val), plan.abs_tol):
            raise TruncationError(
                f"cone integral moves by {abs(half - val):.3g} when t_min is halved "
                f"(value {val:.3g}); the integrand is not integrable at t -> 0",
                suggested=plan.t_min / 2)
    tb = tail_bound(field, x, plan)
    if check and tb > plan.rel_tol * abs(val) and abs(val) > plan.abs_tol:
        raise TruncationError(f"tail bound {tb:.3g} exceeds rel_tol * value", suggested=4 * plan.t_max)
    return Estimate(val, tb, tb, 0.0)


def _halfspace_generic(field, x, lam, plan, region):
    n, rho = field.dimension, field.rho
    k = n + 2 * rho + 1
    t, wt, v, wv = _cone_nodes(field, x, plan)
    if region == "cone":
        vv, ww = v, wv
    else:
        # |w| in [1, Rw] off the cone, geometric panels
        Rw = (plan.rel_tol * 1e-3) ** (-1.0 / max(lam * n - n, 1e-9))
        br = np.geomspace(1.0, max(Rw, 2.0), 24)
        s, ws = gauss_on(br[:-1], br[1:], 8)
        s, ws = s.reshape(-1), ws.reshape(-1)
        dirs, wd = sphere_rule(n, plan.y_angular if n == 2 else 17)
        vo = (s[:, None, None] * dirs[None]).reshape(-1, n)
        wo = ((ws * s ** (n - 1))[:, None] * wd[None]).reshape(-1)
        vv = np.concatenate([v, vo])
        ww = np.concatenate([wv, wo])
    weight = (1.0 / (1.0 + np.linalg.norm(vv, axis=1))) ** (lam * n)
    Y = x + t[:, None, None] * vv[None, :, :]
    F = field.evaluate(Y, np.broadcast_to(t[:, None], Y.shape[:-1]))
    inner = (F ** 2) @ (ww * weight)
    return float(((t ** (n - k)) * inner) @ wt)


def halfspace_weighted_integral(field, x, lam, plan=None, region="all", check=True):
    """int int (t/(t+|x-y|))^(lam n) |F(y,t)|^2 dy dt / t^(n+2 rho+1), as an Estimate.

    ``region="cone"`` restricts to |y - x| < t on the same (y, t) nodes.
    """
    lam = float(lam)
    if not lam > 1:
        raise DomainError(f"lambda must exceed 1, got {lam}")
    x = check_point(x, field.dimension, "x")
    if isinstance(field, ProfileField):
        return _halfspace_profile(field, x, lam, region, check)
    plan = _resolve_generic(field, plan or QuadPlan())
    val = _halfspace_generic(field, x, lam, plan, region)
    tb = tail_bound(field, x, plan)
    return Estimate(val, tb, tb, 0.0)
