import math

import numpy as np
import pytest

from lpsquare.exceptions import DomainError
from lpsquare.sphere import ball_rule, ball_volume, gauss_on, sphere_rule, surface_area


def test_measures():
    assert surface_area(2) == pytest.approx(2 * math.pi)
    assert surface_area(3) == pytest.approx(4 * math.pi)
    assert ball_volume(2, 2.0) == pytest.approx(4 * math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)


@pytest.mark.parametrize("n,order", [(2, 64), (3, 41)])
def test_sphere_rule_integrates_constants_and_quadratics(n, order):
    pts, w = sphere_rule(n, order)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)
    assert w.sum() == pytest.approx(surface_area(n))
    assert w @ pts[:, 0] ** 2 == pytest.approx(surface_area(n) / n)
    assert abs(w @ pts[:, 0]) < 1e-13


def test_sphere_rule_rejects_n4():
    with pytest.raises(DomainError):
        sphere_rule(4, 10)


def test_gauss_on_exact_for_polynomials():
    x, w = gauss_on(1.0, 3.0, 6)
    assert w @ x ** 5 == pytest.approx((3 ** 6 - 1) / 6)


def test_ball_rule_volume_and_moment():
    pts, w = ball_rule(2)
    assert w.sum() == pytest.approx(math.pi)
    assert w @ (pts ** 2).sum(1) == pytest.approx(math.pi / 2)
