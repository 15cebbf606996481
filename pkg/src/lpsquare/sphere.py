"""Quadrature rules on the unit sphere and on intervals.

Weights integrate against the *unnormalized* surface measure, so the
weights of a rule sum to ``2*pi`` on the circle and ``4*pi`` on S^2.
"""

from functools import lru_cache

import numpy as np
from scipy.integrate import lebedev_rule

from .exceptions import DomainError

LEBEDEV_ORDERS = (3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23, 25, 27, 29, 31, 35,
                  41, 47, 53, 59, 65, 71, 77, 83, 89, 95, 101, 107, 113, 119,
                  125, 131)


def surface_area(n):
    """Surface measure of S^{n-1}."""
    from math import gamma, pi
    return 2.0 * pi ** (n / 2) / gamma(n / 2)


def ball_volume(n, radius=1.0):
    from math import gamma, pi
    return pi ** (n / 2) / gamma(n / 2 + 1) * radius ** n


@lru_cache(maxsize=64)
def circle_rule(m, phase=0.0):
    """Composite trapezoid on the circle: ``m`` equispaced nodes.

    Spectrally accurate for smooth periodic integrands.
    """
    if m < 1:
        raise DomainError("circle rule needs at least one node")
    theta = phase + 2.0 * np.pi * np.arange(m) / m
    pts = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    w = np.full(m, 2.0 * np.pi / m)
    pts.setflags(write=False)
    w.setflags(write=False)
    return pts, w


@lru_cache(maxsize=64)
def lebedev(order):
    """Lebedev rule on S^2 for the smallest tabulated order >= ``order``."""
    for o in LEBEDEV_ORDERS:
        if o >= order:
            break
    else:
        o = LEBEDEV_ORDERS[-1]
    x, w = lebedev_rule(o)
    pts = np.ascontiguousarray(x.T)
    pts.setflags(write=False)
    w = np.asarray(w)
    w.setflags(write=False)
    return pts, w


def sphere_rule(n, order):
    """Fixed rule on S^{n-1}.

    ``order`` is the node count on the circle (n=2) and the Lebedev
    polynomial order on S^2 (n=3).
    """
    if n == 2:
        return circle_rule(int(order))
    if n == 3:
        return lebedev(int(order))
    raise DomainError(f"sphere rules are provided for n in (2, 3), got n={n}")


@lru_cache(maxsize=64)
def gauss_legendre(m):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_on(a, b, m):
    """Gauss-Legendre nodes/weights mapped to [a, b] (broadcasts over a, b)."""
    x, w = gauss_legendre(m)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@lru_cache(maxsize=16)
def ball_rule(n, radial=24, angular=48):
    """Product rule on the unit ball: Gauss in radius times a sphere rule.

    Exact for polynomials of moderate degree; used for moment work on atoms.
    """
    r, wr = gauss_on(0.0, 1.0, radial)
    u, wu = sphere_rule(n, angular if n == 2 else min(angular, 131))
    pts = (r[:, None, None] * u[None, :, :]).reshape(-1, n)
    w = (wr[:, None] * r[:, None] ** (n - 1) * wu[None, :]).reshape(-1)
    pts.setflags(write=False)
    w.setflags(write=False)
    return pts, w
