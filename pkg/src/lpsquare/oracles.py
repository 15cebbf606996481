"""Brute-force reference evaluations of the square functions (used in tests).

Two oracles, both independent of the Legendre-profile t-integration:

* ``dense_oracle``: Cartesian z-cells (cell-averaged f), F(y, .) assembled from
  sorted cell distances, uniform t-nodes, and midpoint y-rings whose angular
  density grows with the radius.
* ``monte_carlo_oracle``: heavy-tailed importance sampling in (y, t).
"""

import math

import numpy as np

from ._validation import check_points
from .exceptions import DomainError
from .quad import QuadPlan, blocks_of, compute_profiles


# --------------------------------------------------------------------------
# dense tensor-grid oracle


def _subcell_offsets(h, sub, n):
    off = ((np.arange(sub) + 0.5) / sub - 0.5) * h
    return np.stack(np.meshgrid(*([off] * n), indexing="ij"), -1).reshape(-1, n)


def _cells(blocks, n, resolution, sub=4, edge_sub=32):
    """Cell centers, cell-averaged values and cell size for each block.

    Cells cut by the sphere |z - c| = r (atoms may jump there) are averaged
    on a finer sub-grid.
    """
    out = []
    for c, r, prof in blocks:
        h = r / resolution
        k = int(math.ceil(r / h)) + 1
        ax = (np.arange(-k, k) + 0.5) * h
        grid = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), -1).reshape(-1, n)
        rad = np.linalg.norm(grid, axis=1)
        grid, rad = grid[rad < r + h], rad[rad < r + h]
        vals = prof(c + grid[:, None, :] + _subcell_offsets(h, sub, n)[None]).mean(axis=1)
        edge = np.abs(rad - r) < 0.5 * math.sqrt(n) * h
        if np.any(edge):
            fine = _subcell_offsets(h, edge_sub, n)
            vals[edge] = prof(c + grid[edge][:, None, :] + fine[None]).mean(axis=1)
        keep = vals != 0
        out.append((c + grid[keep], vals[keep], h))
    return out


def _kernel_weights(kernel, y, z, h, rho, near_sub=8):
    """K(y, y-z) h^n with the kernel averaged over cells adjacent to y."""
    n = y.shape[-1]
    w = y[:, None, :] - z[None, :, :]
    d = np.linalg.norm(w, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = w / d[..., None]
        kv = kernel.on_sphere(np.broadcast_to(y[:, None, :], w.shape), theta) * d ** (rho - n)
    near = d < 1.5 * h
    if np.any(near):
        rows, cols = np.nonzero(near)
        subs = _subcell_offsets(h, near_sub, n)
        ws = w[rows, cols][:, None, :] - subs[None]
        ds = np.linalg.norm(ws, axis=-1)
        ks = kernel.on_sphere(np.broadcast_to(y[rows][:, None, :], ws.shape), ws / ds[..., None]) * ds ** (rho - n)
        kv[rows, cols] = ks.mean(axis=1)
    return kv * h ** n, d


def _ring_grid(center, extent, r_min, R_out, resolution, n, per_oct=32, ang=1.5):
    if n != 2:
        raise DomainError("the dense oracle is implemented for n = 2")
    inner = 2 * extent
    n0 = 2 * resolution
    rad = [(np.arange(n0) + 0.5) / n0 * inner]
    drad = [np.full(n0, inner / n0)]
    m = max(1, int(math.ceil(per_oct * math.log2(R_out / inner))))
    edges = inner * (R_out / inner) ** (np.arange(m + 1) / m)
    rad.append(np.sqrt(edges[:-1] * edges[1:]))
    drad.append(np.diff(edges))
    rad, drad = np.concatenate(rad), np.concatenate(drad)
    pts, wts = [], []
    for rr, dr in zip(rad, drad):
        na = int(min(2048, max(256, 2 ** math.ceil(math.log2(2 * math.pi * rr / (ang * r_min))))))
        phi = (np.arange(na) + 0.5) * 2 * math.pi / na
        pts.append(center + rr * np.stack([np.cos(phi), np.sin(phi)], 1))
        wts.append(np.full(na, rr * dr * 2 * math.pi / na))
    return np.concatenate(pts), np.concatenate(wts)


def _ramp_profile(w, d, h, t):
    """sum_i w_i clip((t - d_i)/h + 1/2, 0, 1) per row, via sorted partial sums.

    With P(s) = sum_i w_i (s - d_i)_+ the sum equals (P(t + h/2) - P(t - h/2))/h,
    and P is piecewise linear with kinks at the sorted d_i.
    """
    m, nz = d.shape
    order = np.argsort(d, axis=1)
    ds = np.take_along_axis(d, order, 1)
    ws = np.take_along_axis(w, order, 1)
    C = np.concatenate([np.zeros((m, 1)), np.cumsum(ws, 1)], 1)
    E = np.concatenate([np.zeros((m, 1)), np.cumsum(ws * ds, 1)], 1)
    # row-wise searchsorted through a global offset
    span = ds.max() - ds.min() + 4 * h + t.max() - t.min() + 1.0
    off = (np.arange(m) * span)[:, None]
    flat = (ds + off).ravel()

    def P(x):
        idx = np.searchsorted(flat, (x + off).ravel()).reshape(x.shape) - np.arange(m)[:, None] * nz
        idx = np.clip(idx, 0, nz)
        r = np.arange(m)[:, None]
        return x * C[r, idx] - E[r, idx]

    return (P(t + 0.5 * h) - P(t - 0.5 * h)) / h


def _profiles_dense(kernel, cells, Y, rho, t_min, n_t, chunk=512):
    m = Y.shape[0]
    T = np.zeros((m, n_t))
    Fv = np.zeros((m, n_t))
    Finf = np.zeros(m)
    lo = np.zeros(m)
    U = np.zeros(m)
    hmax = max(h for _, _, h in cells)
    for s in range(0, m, chunk):
        Yc = Y[s:s + chunk]
        parts = []
        for z, vals, h in cells:
            kw, d = _kernel_weights(kernel, Yc, z, h, rho)
            parts.append((kw * vals, d, h))
        dmin = np.min([d.min(1) for _, d, _ in parts], axis=0)
        dmax = np.max([d.max(1) for _, d, _ in parts], axis=0)
        l = np.maximum(dmin - hmax, t_min)
        u = np.maximum(dmax + hmax, l * (1 + 1e-12))
        t = l[:, None] + (u - l)[:, None] * np.linspace(0, 1, n_t)[None]
        # each cell's mass is spread uniformly over [d - h/2, d + h/2]
        F = sum(_ramp_profile(w, d, h, t) for w, d, h in parts)
        T[s:s + chunk], Fv[s:s + chunk] = t, F
        Finf[s:s + chunk] = sum(w.sum(1) for w, _, _ in parts)
        lo[s:s + chunk], U[s:s + chunk] = l, u
    return T, Fv, Finf, lo, U


def _pareto_tail(T, a, lam_n, k, nodes=12, panels=12):
    """int_T^inf (t/(t+a))^lam_n t^-k dt by Gauss panels in s = T/t."""
    br = np.concatenate([[0.0], 2.0 ** -np.arange(panels - 1, -1, -1)])
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = ((br[1:] - br[:-1])[:, None] * (x + 1) / 2 + br[:-1, None]).ravel()
    ws = ((br[1:] - br[:-1])[:, None] * w / 2).ravel()
    Tb, ab = T[:, None], a[:, None]
    t = Tb / s
    vals = (t / (t + ab)) ** lam_n * t ** (-k) * Tb / s ** 2
    return vals @ ws


def dense_oracle_many(kernel, f, X, operator_tag="mu_s", resolution=24, rho=1.5, lam=3.0,
                      t_min=None, n_t=64, R_out=None):
    """Brute-force mu_S or mu_* (tag "mu_s" / "mu_star") at each row of X."""
    n = kernel.dimension
    X = check_points(X, n, "x")
    if operator_tag not in ("mu_s", "mu_star"):
        raise DomainError(f"unknown operator tag {operator_tag!r}")
    blocks = blocks_of(f)
    radii = [r for _, r, _ in blocks]
    centers = np.array([c for c, _, _ in blocks])
    ref = centers.mean(0)
    extent = max(np.linalg.norm(c - ref) + r for c, r, _ in blocks)
    t_min = 1e-3 * min(radii) if t_min is None else t_min
    dmax = max(np.linalg.norm(X - ref, axis=1).max(), extent)
    R_out = R_out or max(16 * extent, 6 * dmax)
    Y, wy = _ring_grid(ref, extent, min(radii), R_out, resolution, n)
    cells = _cells(blocks, n, resolution)
    if sum(z.shape[0] for z, _, _ in cells) == 0:
        return np.zeros(X.shape[0])
    T, F, Finf, lo, U = _profiles_dense(kernel, cells, Y, rho, t_min, n_t)
    k = n + 2 * rho + 1
    G = F ** 2 * T ** (-k)
    seg = 0.5 * (G[:, 1:] + G[:, :-1]) * np.diff(T, axis=1)
    above = np.concatenate([np.cumsum(seg[:, ::-1], axis=1)[:, ::-1], np.zeros((Y.shape[0], 1))], 1)
    out = np.zeros(X.shape[0])
    for i, x in enumerate(X):
        a = np.linalg.norm(Y - x, axis=1)
        if operator_tag == "mu_s":
            T0 = np.maximum(a, t_min)
            pos = (T0 - lo) / (U - lo) * (n_t - 1)
            j = np.clip(np.floor(pos).astype(int), 0, n_t - 2)
            frac = np.clip(pos - j, 0.0, 1.0)
            part = above[np.arange(len(j)), j] * (1 - frac) + above[np.arange(len(j)), j + 1] * frac
            part = np.where(T0 <= lo, above[:, 0], np.where(T0 >= U, 0.0, part))
            tail = Finf ** 2 * np.maximum(T0, U) ** (1 - k) / (k - 1)
            h = part + tail
        else:
            W = (T / (T + a[:, None])) ** (lam * n)
            GW = G * W
            body = (0.5 * (GW[:, 1:] + GW[:, :-1]) * np.diff(T, axis=1)).sum(1)
            h = body + Finf ** 2 * _pareto_tail(U, a, lam * n, k)
        out[i] = math.sqrt(max(float(wy @ h), 0.0))
    return out


def dense_oracle(kernel, f, x, operator_tag="mu_s", resolution=24, rho=1.5, lam=3.0, **kw):
    """Brute-force value of mu_S (``"mu_s"``) or mu_* (``"mu_star"``) at one point."""
    return float(dense_oracle_many(kernel, f, np.atleast_2d(x), operator_tag, resolution, rho, lam, **kw)[0])


# --------------------------------------------------------------------------
# Monte-Carlo oracle


def _sample_y(rng, center, scales, m, n):
    """Mixture: uniform in B(center, 3 scales[0]) plus a heavy-tailed radial
    component for each scale, in equal proportions."""
    ncomp = 1 + len(scales)
    sizes = np.full(ncomp, m // ncomp)
    sizes[0] += m - sizes.sum()
    dirs = rng.normal(size=(m, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    parts = [3 * scales[0] * rng.random(sizes[0]) ** (1 / n)]
    for s, size in zip(scales, sizes[1:]):
        parts.append(s * (rng.random(size) ** -0.5 - 1.0))
    r = np.concatenate(parts)
    Y = center + r[:, None] * dirs
    return Y, _y_density(np.linalg.norm(Y - center, axis=1), scales, n)


def _y_density(r, scales, n):
    area = 2 * math.pi if n == 2 else 4 * math.pi
    vol = math.pi ** (n / 2) / math.gamma(n / 2 + 1) * (3 * scales[0]) ** n
    dens = np.where(r < 3 * scales[0], 1.0 / vol, 0.0)
    with np.errstate(divide="ignore"):
        for s in scales:
            dens = dens + 2.0 / s * (1 + r / s) ** -3 / (area * r ** (n - 1))
    return dens / (1 + len(scales))


def monte_carlo_oracle(kernel, f, X, operator_tag="mu_s", rho=1.5, lam=3.0, n_y=20000, n_t=50,
                       seed=0, plan=None):
    """Importance-sampled mu^2 at each row of X: returns (mean, sigma) arrays.

    y is drawn around the support (uniform core plus a Cauchy-type tail); t is
    drawn log-uniformly across the transition range of F(y, .) and from a
    Pareto tail beyond it.  A second radial scale |x - center|/2 covers the
    region between x and the support.  F(y, t) comes from the per-y profiles, so this
    checks the outer (y, t) integration.
    """
    n = kernel.dimension
    X = check_points(X, n, "x")
    rng = np.random.default_rng(seed)
    blocks = blocks_of(f)
    centers = np.array([c for c, _, _ in blocks])
    ref = centers.mean(0)
    scale = max(np.linalg.norm(c - ref) + r for c, r, _ in blocks)
    plan = (plan or QuadPlan()).resolved([(c, r) for c, r, _ in blocks])
    k = n + 2 * rho + 1
    gamma = 2.0
    means, sigmas = [], []
    for x in X:
        far = np.linalg.norm(x - ref)
        scales = [scale] + ([0.5 * far] if far > 2 * scale else [])
        Y, qy = _sample_y(rng, ref, scales, n_y, n)
        prof = compute_profiles(kernel, f, Y, rho, plan)
        l = np.maximum(np.min([b.lo for b in prof.blocks], axis=0), plan.t_min)
        U = np.maximum(prof.U, l * (1 + 1e-9))
        pick = rng.random((n_y, n_t)) < 0.5
        logr = np.log(U / l)
        t_in = l[:, None] * np.exp(rng.random((n_y, n_t)) * logr[:, None])
        t_out = U[:, None] * rng.random((n_y, n_t)) ** (-1 / gamma)
        t = np.where(pick, t_in, t_out)
        q_in = np.where((t >= l[:, None]) & (t <= U[:, None]), 1.0 / (t * logr[:, None]), 0.0)
        q_out = np.where(t >= U[:, None], gamma * U[:, None] ** gamma * t ** (-gamma - 1), 0.0)
        base = prof.F(t) ** 2 * t ** (-k) / (0.5 * q_in + 0.5 * q_out)
        a = np.linalg.norm(Y - x, axis=1)
        if operator_tag == "mu_s":
            val = np.where(t > np.maximum(a, plan.t_min)[:, None], base, 0.0)
        elif operator_tag == "mu_star":
            val = base * (t / (t + a[:, None])) ** (lam * n)
        else:
            raise DomainError(f"unknown operator tag {operator_tag!r}")
        per_y = val.mean(1) / qy
        means.append(per_y.mean())
        sigmas.append(per_y.std(ddof=1) / math.sqrt(n_y))
    return np.array(means), np.array(sigmas)
