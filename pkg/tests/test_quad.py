import math

import numpy as np
import pytest

from lpsquare.atoms import Atom
from lpsquare.exceptions import DomainError, TruncationError
from lpsquare.kernel import evaluate, get_kernel
from lpsquare.quad import (InnerField, QuadPlan, cone_integral, halfspace_weighted_integral,
                           inner_integral, tail_bound)
from lpsquare.sphere import circle_rule, gauss_on


class _Indicator:
    def __init__(self, R):
        self.R = R

    def __call__(self, x):
        return (np.linalg.norm(np.asarray(x), axis=-1) < self.R).astype(float)


def _polar_oracle(kernel, f, y, t, rho=1.5, radial=200, angular=2048):
    """int_{|w|<t} K(y, w) f(y - w) dw with w = u e, u-Gauss on panels, theta-trapezoid."""
    edges = np.linspace(0, t, 41)
    u, wu = gauss_on(edges[:-1], edges[1:], radial // 40)
    u, wu = u.ravel(), wu.ravel()
    e, we = circle_rule(angular)
    w = (u[:, None, None] * e[None]).reshape(-1, 2)
    wt = ((wu * u ** (rho - 1))[:, None] * we[None]).reshape(-1)
    om = evaluate(kernel, np.broadcast_to(y, w.shape), w)
    return float(wt @ (om * f(y - w)))


def test_plan_validation():
    with pytest.raises(DomainError):
        QuadPlan(t_min=0.0)
    with pytest.raises(DomainError):
        QuadPlan(t_min=1.0, t_max=0.5)
    with pytest.raises(DomainError):
        QuadPlan(rel_tol=0.5)
    p = QuadPlan()
    assert p.refined().sphere_order == 2 * p.sphere_order


def test_inner_integral_disjoint_is_zero(kernel, atom):
    assert inner_integral(kernel, atom, (5.0, 0.0), 2.0) == 0.0


def test_inner_integral_closed_form():
    k = get_kernel("test-constant")
    f = Atom(np.zeros(2), 3.0, 1.0, 0, _Indicator(3.0), 1.0)
    t = 0.7
    assert inner_integral(k, f, (0.2, 0.1), t) == pytest.approx(2 * math.pi * t ** 1.5 / 1.5, rel=1e-12)


def test_inner_integral_matches_polar_oracle(kernel, atom):
    y, t = np.array([0.3, 0.0]), 0.7
    ref = _polar_oracle(kernel, atom, y, t)
    assert inner_integral(kernel, atom, y, t) == pytest.approx(ref, rel=1e-6)


def test_inner_integral_bad_t(kernel, atom):
    with pytest.raises(DomainError):
        inner_integral(kernel, atom, (0.0, 0.0), 0.0)


def test_inner_integral_homogeneous(kernel, atom):
    y, t = (0.4, -0.2), 0.9
    a = inner_integral(kernel, atom, y, t)
    b = inner_integral(kernel, atom.scaled(-2.0), y, t)
    assert b == pytest.approx(-2 * a, rel=1e-12)


def test_inner_integral_self_convergence(kernel, atom):
    for y, t in [((0.3, 0.0), 0.7), ((2.0, 1.0), 1.9), ((0.9, 0.1), 5.0)]:
        a = inner_integral(kernel, atom, y, t)
        b = inner_integral(kernel, atom, y, t, plan=QuadPlan().refined())
        assert abs(a - b) <= 1e-2 * abs(b) + 1e-15


def test_constant_beyond_reach(kernel, atom):
    y = np.array([3.0, 0.5])
    far = np.linalg.norm(y) + 1.0
    assert inner_integral(kernel, atom, y, far) == pytest.approx(inner_integral(kernel, atom, y, 10 * far), rel=1e-12)


def test_generic_zero_field():
    F = InnerField(lambda Y, T: np.zeros(np.shape(T)), 2, 1.5)
    plan = QuadPlan(t_min=1e-3, t_max=10.0)
    assert cone_integral(F, (0.0, 0.0), plan).value == 0.0
    assert halfspace_weighted_integral(F, (0.0, 0.0), 3.0, plan).value == 0.0


def test_generic_t_min_sensitivity():
    F = InnerField(lambda Y, T: np.where(np.asarray(T) < 1, np.asarray(T) ** 1.5, 0.0), 2, 1.5)
    with pytest.raises(TruncationError) as e:
        cone_integral(F, (0.0, 0.0), QuadPlan(t_min=1e-3, t_max=10.0))
    assert e.value.suggested == pytest.approx(5e-4)


def test_tail_bound_formula():
    F = InnerField(lambda Y, T: np.ones(np.shape(T)), 2, 1.5)
    b10 = tail_bound(F, (0.0, 0.0), QuadPlan(t_min=1e-3, t_max=10.0))
    assert b10 == pytest.approx(math.pi * 10.0 ** -3 / 3)
    # direct quadrature of the bound integrand pi t^2 t^-(n+2 rho+1)
    s, w = gauss_on(0.0, 1.0, 40)
    t = 10.0 / s  # t in (10, inf)
    direct = float(w @ (math.pi * t ** 2 * t ** -6.0 * 10.0 / s ** 2))
    assert b10 == pytest.approx(direct, rel=1e-10)
    b20 = tail_bound(F, (0.0, 0.0), QuadPlan(t_min=1e-3, t_max=20.0))
    assert b10 / b20 == pytest.approx(2 ** 3)


def test_tail_bound_zero_when_field_vanishes_at_infinity():
    F = InnerField(lambda Y, T: np.where(np.asarray(T) < 1.0, 1.0, 0.0), 2, 1.5)
    assert tail_bound(F, (0.0, 0.0), QuadPlan(t_min=1e-3, t_max=10.0)) == 0.0


def test_tail_bound_precondition(kernel, atom):
    F = InnerField(lambda Y, T: np.ones(np.shape(T)), 2, 1.5, [(np.zeros(2), 1.0)])
    with pytest.raises(TruncationError):
        tail_bound(F, (20.0, 0.0), QuadPlan(t_min=1e-3, t_max=5.0))


def test_generic_monotone_under_domination():
    g = lambda Y, T: np.exp(-np.linalg.norm(Y, axis=-1) ** 2) * np.minimum(T, 1.0) ** 2
    F1 = InnerField(lambda Y, T: 0.5 * g(Y, T), 2, 1.5)
    F2 = InnerField(g, 2, 1.5)
    plan = QuadPlan(t_min=1e-3, t_max=50.0, y_angular=32)
    v1 = cone_integral(F1, (0.5, 0.0), plan, check=False).value
    v2 = cone_integral(F2, (0.5, 0.0), plan, check=False).value
    assert 0 < v1 <= v2
    assert v1 == pytest.approx(v2 / 4, rel=1e-12)


def test_halfspace_lambda_domain(fitted):
    with pytest.raises(DomainError):
        halfspace_weighted_integral(fitted, (8.0, 0.0), 1.0)


def test_cone_region_weight_bound(fitted):
    for x in [(8.0, 0.0), (0.5, 0.5), (-3.0, 20.0)]:
        cone = cone_integral(fitted, x).value
        restricted = halfspace_weighted_integral(fitted, x, 3.0, region="cone").value
        full = halfspace_weighted_integral(fitted, x, 3.0).value
        assert restricted >= 2.0 ** -6 * cone * (1 - 1e-9)
        assert restricted <= cone * (1 + 1e-9)
        assert full >= restricted * (1 - 1e-9)
