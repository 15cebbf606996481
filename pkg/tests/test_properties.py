import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from lpsquare.atoms import build_weak_hardy, level_of, min_moment_order
from lpsquare.config import apply_overrides, parse_lines
from lpsquare.kernel import evaluate, get_kernel
from lpsquare.operators import evaluate_on_grid
from lpsquare.verify import PowerLawDecay, distribution_function, polar_window, weak_type_check

slow = settings(max_examples=5, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(z=st.tuples(finite, finite).filter(lambda v: math.hypot(*v) > 1e-6),
       x=st.tuples(finite, finite), scale=st.floats(1e-3, 1e3))
def test_kernel_degree_zero(z, x, scale):
    k = get_kernel("circle-harmonic-1")
    a = evaluate(k, np.array(x), np.array(z))
    b = evaluate(k, np.array(x), scale * np.array(z))
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@slow
@given(c=st.floats(0.1, 10.0), tag=st.sampled_from(["mu_s", "mu_star"]))
def test_operator_homogeneity(kernel, atom, params, c, tag):
    x = np.array([[12.0, 5.0]])
    base = evaluate_on_grid(tag, kernel, atom, x, params).values[0]
    scaled = evaluate_on_grid(tag, kernel, atom.scaled(c), x, params).values[0]
    assert abs(scaled - c * base) <= 1e-9 * c * base


@given(vals=st.lists(st.floats(0, 100), min_size=1, max_size=50),
       lam1=st.floats(0.01, 100), lam2=st.floats(0.01, 100))
def test_distribution_nonincreasing(vals, lam1, lam2):
    lo, hi = sorted((lam1, lam2))
    assert distribution_function(vals, 1.0, hi) <= distribution_function(vals, 1.0, lo)


@given(a=st.lists(st.floats(0, 100), min_size=1, max_size=30),
       b=st.lists(st.floats(0, 100), min_size=1, max_size=30), lam=st.floats(0.01, 100))
def test_distribution_additive(a, b, lam):
    whole = distribution_function(a + b, 0.5, lam)
    assert whole == distribution_function(a, 0.5, lam) + distribution_function(b, 0.5, lam)


@given(lam=st.floats(1e-30, 1e30))
def test_level_of_brackets(lam):
    k = level_of(lam)
    assert 2.0 ** k <= lam < 2.0 ** (k + 1)


@given(n=st.integers(1, 4), p=st.floats(0.2, 1.0))
def test_min_moment_order(n, p):
    s = min_moment_order(n, p)
    v = n * (1 / p - 1)
    assert s >= 0
    assert s <= v + 1e-12 < s + 1
    assert min_moment_order(n, n / (n + s)) == s


@given(slope=st.floats(-5, -0.5), c=st.floats(1e-3, 1e3))
def test_power_law_recovers(slope, c):
    d = np.geomspace(1, 1000, 6)
    est = PowerLawDecay().fit(d, c * d ** slope)
    assert abs(est.slope_ - slope) < 1e-9


@given(keys=st.dictionaries(st.from_regex(r"[a-z]{1,6}\.[a-z_]{1,8}", fullmatch=True),
                            st.one_of(st.integers(-1000, 1000), st.floats(-1e6, 1e6, allow_nan=False),
                                      st.booleans(), st.from_regex(r"[a-z]{1,8}", fullmatch=True)
                                      .filter(lambda s: s not in ("none", "true", "false")))))
def test_config_round_trip(keys):
    lines = [f"{k} = {v!r}" if not isinstance(v, str) else f"{k} = {v}" for k, v in keys.items()]
    assert parse_lines(lines) == keys
    assert apply_overrides({}, [f"{k}={v!r}" for k, v in keys.items()]) == keys


@slow
@given(m=st.integers(1, 3))
def test_weak_ratio_invariant_under_doubling(kernel, params, m):
    # lam^p |{mu(2^m f) > lam}| / c(2^m f) equals the f ratio at lam / 2^m
    seq = build_weak_hardy({0: [((0.0, 0.0), 1.0)]}, "bump", 1.0, n=2)
    win = polar_window(np.zeros(2), 1.0, 2048.0, core_cells=4, per_octave=2, angular=8)
    lams = np.array([0.02, 0.05])
    from lpsquare.verify import unit_decay
    decay = unit_decay("mu_s", kernel, seq.blocks[0], params, None)
    r1 = weak_type_check("mu_s", kernel, seq, params, lams, window=win, refine=False, decay=decay)
    r2 = weak_type_check("mu_s", kernel, seq.doubled(m), params, lams * 2 ** m, window=win,
                         refine=False, decay=decay)
    np.testing.assert_allclose(r2.ratios, r1.ratios, rtol=1e-9)
