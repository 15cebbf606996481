import math

import numpy as np
import pytest

from lpsquare.atoms import (BlockSum, PolynomialShape, build_atom, build_weak_hardy,
                            dilated_cover, dilation_factor, export_atom_csv, level_of,
                            min_moment_order, plan_from_config, split_at_level, verify_atom)
from lpsquare.exceptions import DegenerateShapeError, DomainError, PackingError
from lpsquare.sphere import ball_rule


def _moments(a, degree):
    pts, w = ball_rule(2, 40, 96)
    x = a.center + a.radius * pts
    v = a(x) * w * a.radius ** 2
    return [float(v @ (x[:, 0] ** i * x[:, 1] ** j)) for i in range(degree + 1)
            for j in range(degree + 1 - i)]


@pytest.mark.parametrize("n,p,s", [(2, 1.0, 0), (2, 2 / 3, 1), (3, 0.9, 0)])
def test_min_moment_order(n, p, s):
    assert min_moment_order(n, p) == s


def test_min_moment_order_domain():
    with pytest.raises(DomainError):
        min_moment_order(2, 1.5)


def test_unit_atom_example(atom):
    assert abs(_moments(atom, 0)[0]) < 1e-10
    assert atom.sup_norm <= 1 / math.pi


def test_first_moments_vanish():
    a = build_atom(2, 2 / 3, (np.zeros(2), 1.0), "bump", 1)
    assert max(abs(m) for m in _moments(a, 1)) < 1e-10


def test_sup_matches_dense_grid():
    a = build_atom(2, 1.0, ((3.0, 3.0), 0.5), "bump", 0)
    ax = np.linspace(-0.5, 0.5, 801)
    g = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2) + 3.0
    target = 0.95 / (math.pi * 0.25)
    assert a.sup_norm == pytest.approx(target)
    assert np.abs(a(g)).max() == pytest.approx(target, rel=1e-4)


def test_verify_atom_examples(atom):
    assert verify_atom(atom).passed
    r = verify_atom(atom.scaled(2.0))
    assert not r.size.passed and r.support.passed and r.moments.passed
    r = verify_atom(atom.translated_profile((3.0, 0.0)))
    assert not r.support.passed


def test_degenerate_shape():
    with pytest.raises(DegenerateShapeError):
        build_atom(2, 2 / 3, (np.zeros(2), 1.0), PolynomialShape((((1, 0), 1.0),)), 1)


def test_s_below_floor():
    with pytest.raises(DomainError):
        build_atom(2, 2 / 3, (np.zeros(2), 1.0), "bump", 0)


def test_scale_covariance():
    a1 = build_atom(2, 1.0, (np.zeros(2), 1.0), "tilted-bump")
    a2 = build_atom(2, 1.0, (np.zeros(2), 2.0), "tilted-bump")
    u = np.random.default_rng(0).uniform(-0.7, 0.7, (50, 2))
    assert np.allclose(a2(2 * u), a1(u) / 4, rtol=1e-10, atol=1e-14)


def test_weak_hardy_single_level():
    seq = build_weak_hardy({0: [((0.0, 0.0), 1.0)]}, p=1.0)
    assert len(seq.blocks) == 1
    assert seq.blocks[0].sup_norm == pytest.approx(1.0)
    assert seq.c == pytest.approx(math.pi)
    with pytest.raises(PackingError):
        build_weak_hardy({0: [((0.0, 0.0), 1.0)]}, p=1.0, c=3.0)


def test_weak_hardy_three_levels_budget():
    plan = {k: [((6.0 * k, 0.0), 2.0 ** (-k / 2))] for k in (1, 2, 3)}
    seq = build_weak_hardy(plan, p=1.0)
    for k in (1, 2, 3):
        assert seq.level_measure(k) <= seq.c * 2.0 ** (-k) * (1 + 1e-12)
    checks = seq.check()
    assert all(c.passed for c in checks.values())


def test_weak_hardy_empty_and_overlap():
    seq = build_weak_hardy({}, p=1.0)
    assert seq.blocks == [] and seq.c == 0
    with pytest.raises(PackingError):
        build_weak_hardy({0: [((0.0, 0.0), 1.0), ((1.0, 0.0), 1.0)]})


def test_doubled_sequence():
    seq = build_weak_hardy({0: [((0.0, 0.0), 1.0)], 2: [((5.0, 0.0), 0.3)]}, p=0.9)
    d = seq.doubled()
    assert sorted(d.levels) == [1, 3]
    assert d.c == pytest.approx(seq.c * 2 ** 0.9)
    x = np.array([[0.2, 0.1], [5.1, 0.0]])
    assert np.allclose(d.function()(x), 2 * seq.function()(x))


@pytest.mark.parametrize("lam,k0", [(5.0, 2), (1.0, 0), (0.3, -2)])
def test_level_of(lam, k0):
    assert level_of(lam) == k0


def test_split_and_cover():
    plan = {k: [((10.0 * k, 0.0), 0.5)] for k in (0, 1, 2)}
    seq = build_weak_hardy(plan, p=1.0)
    sp = split_at_level(seq, 2.5)
    assert sp.k0 == 1
    assert [b.level for b in sp.F1] == [0, 1] and [b.level for b in sp.F2] == [2]
    assert dilation_factor(2, 1, 1.0, 2) * 1 == pytest.approx(78.38, abs=0.01)
    assert dilation_factor(1, 1, 1.0, 2) == 64.0
    cover = dilated_cover(seq, -1)
    hand = sum(math.pi * (64 * 1.5 ** ((k + 1) / 2) * 0.5) ** 2 for k in (0, 1, 2))
    assert cover.total_measure == pytest.approx(hand)
    assert cover.total_measure <= cover.bound


def test_split_monotone():
    plan = {k: [((10.0 * k, 0.0), 0.5)] for k in (-1, 0, 1, 2)}
    seq = build_weak_hardy(plan, p=1.0)
    prev = None
    for lam in np.geomspace(0.1, 20, 30):
        f2 = {id(b) for b in split_at_level(seq, lam).F2}
        if prev is not None:
            assert f2 <= prev
        prev = f2


def test_plan_from_config_and_export(tmp_path, atom):
    cfg = plan_from_config({"p": 0.9, "level.0": "0,0@1; 4,0@0.5", "level.2": "(9,9)@0.2"})
    assert cfg["p"] == 0.9 and len(cfg["plan"][0]) == 2
    seq = build_weak_hardy(**cfg)
    assert isinstance(seq.function(), BlockSum)
    path = export_atom_csv(atom, tmp_path / "a.csv", resolution=5)
    lines = open(path).read().splitlines()
    assert lines[0] == "x1,x2,value" and len(lines) == 26
