import numpy as np
import pytest
from sklearn.base import clone

from lpsquare.atoms import build_atom
from lpsquare.exceptions import LPSquareError, ParameterError
from lpsquare.operators import (AreaIntegral, GStarFunction, OperatorParams, evaluate_on_grid,
                                make_operator, mu_s, mu_star)


def test_params_default_beta():
    p = OperatorParams()
    assert p.beta == pytest.approx(0.45)
    assert p.k == pytest.approx(6.0)
    assert p.domination_constant == 8.0 and p.norm_constant == 64.0


@pytest.mark.parametrize("kw,constraint", [
    (dict(beta=0.6), "beta >= rho - n/2"),
    (dict(rho=0.9), "rho <= n/2"),
    (dict(lam=1.5), "lambda <= 2"),
    (dict(alpha=0.3, beta=0.35), "beta >= alpha"),
    (dict(lam=2.5, beta=0.45), "beta >= (lambda - 2)n/3"),
    (dict(p=0.8), "p <= n/(n + beta)"),
    (dict(p=1.2), "p > 1"),
])
def test_params_constraints_named(kw, constraint):
    with pytest.raises(ParameterError) as e:
        OperatorParams(**kw)
    assert e.value.constraint.startswith(constraint)


def test_params_endpoint_and_unsafe():
    pm = 2 / 2.45
    with pytest.raises(ParameterError):
        OperatorParams(p=pm)
    assert OperatorParams(p=pm, allow_endpoint=True).p == pm
    u = OperatorParams(beta=0.6, unsafe=True)
    assert u.violations and "UNSAFE" in u.watermark
    assert OperatorParams(lam=2.5, beta=0.45, operator="mu_s").lam == 2.5


def test_zero_function(kernel):
    assert mu_s(kernel, None, (1.0, 2.0)).value == 0.0
    assert mu_star(kernel, None, (1.0, 2.0)).value == 0.0


def test_absolute_homogeneity(kernel, atom, params):
    x = (8.0, 0.0)
    a = mu_s(kernel, atom, x, params).value
    b = mu_s(kernel, atom.scaled(-2.0), x, params).value
    assert b == pytest.approx(2 * a, rel=1e-10)


def test_values_nonnegative_and_dominated(kernel, atom, params):
    for x in [(8.0, 0.0), (0.3, 0.2), (-2.0, 5.0)]:
        s = mu_s(kernel, atom, x, params)
        m = mu_star(kernel, atom, x, params)
        assert s.value >= 0 and m.value >= 0
        assert s.value <= params.domination_constant * m.value + s.uncertainty + 8 * m.uncertainty


def test_grid_examples(kernel, atom, params):
    one = evaluate_on_grid("mu_s", kernel, atom, [[8.0, 0.0]], params)
    assert one.values[0] == mu_s(kernel, atom, (8.0, 0.0), params).value
    empty = evaluate_on_grid("mu_s", kernel, atom, np.zeros((0, 2)), params)
    assert len(empty) == 0
    sym = evaluate_on_grid("mu_s", kernel, atom, [[16.0, 0.0], [-16.0, 0.0]], params)
    assert sym.values[0] == pytest.approx(sym.values[1], rel=1e-2)


def test_translation_covariance(kernel, atom, params):
    shift = np.array([3.5, -1.25])
    a = mu_star(kernel, atom, (8.0, 0.0), params).value
    b = mu_star(kernel, atom.translated(shift), np.array([8.0, 0.0]) + shift, params).value
    assert b == pytest.approx(a, rel=1e-2)


def test_grid_collects_errors(kernel, atom, params):
    res = evaluate_on_grid("mu_s", kernel, atom, [[8.0, 0.0], [5e6, 0.0]], params)
    assert np.isfinite(res.values[0])
    assert 1 in res.errors and np.isnan(res.values[1])


def test_unknown_operator(kernel, atom):
    with pytest.raises(LPSquareError):
        evaluate_on_grid("mu_x", kernel, atom, [[8.0, 0.0]])
    with pytest.raises(LPSquareError):
        make_operator("mu_x")


def test_estimator_interface(atom):
    est = AreaIntegral(kernel="circle-harmonic-1")
    assert est.get_params()["rho"] == 1.5
    c = clone(est).set_params(lam=4.0)
    assert c.lam == 4.0
    X = np.array([[8.0, 0.0], [0.0, 8.0]])
    v = est.fit(atom).predict(X)
    assert v.shape == (2,) and np.all(v > 0)
    assert est.transform(X).shape == (2, 1)
    vals, unc = GStarFunction().fit(atom).predict_with_uncertainty(X)
    assert np.all(unc >= 0)


def test_estimator_unfitted_and_strict():
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        AreaIntegral().predict([[1.0, 0.0]])
    with pytest.raises(ParameterError):
        AreaIntegral(beta=0.6).fit(None)
    assert AreaIntegral(beta=0.6, strict=False).fit(None).predict([[1.0, 0.0]])[0] == 0.0
