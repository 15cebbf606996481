"""Acceptance criteria, one test each.  Every test prints a single
``criterion N: PASS|FAIL  <details>`` line (visible without ``-s``)."""

import math
import time

import numpy as np
import pytest

from lpsquare.atoms import build_atom, random_shape, verify_atom
from lpsquare.config import suite_config
from lpsquare.kernel import (BUILTIN_KERNELS, ModulusTable, cancellation_passes, check_cancellation,
                             check_uniform_l2, dini_integral, log_dini_integral, omega2)
from lpsquare.operators import evaluate_on_grid
from lpsquare.oracles import dense_oracle_many, monte_carlo_oracle
from lpsquare.report import write_outputs
from lpsquare.suites import job_domination, job_lemma25, job_lp, job_weak, run_suite
from lpsquare.verify import PASS, decay_fit


@pytest.fixture
def line(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def test_criterion_01_kernel_admissibility(line):
    t0 = time.perf_counter()
    worst_cancel, worst_gap, ok = 0.0, 0.0, True
    for name, k in sorted(BUILTIN_KERNELS.items()):
        if k.cancellation_exempt:
            continue
        res = check_cancellation(k)
        worst_cancel = max(worst_cancel, res)
        ok &= cancellation_passes(k, res) and res < 1e-8
        l2 = check_uniform_l2(k)
        if l2.analytic_bound is not None and l2.analytic_bound > 0:
            gap = abs(l2.sampled_max / l2.analytic_bound - 1)
            worst_gap = max(worst_gap, gap)
            ok &= gap <= 0.01
    dt = time.perf_counter() - t0
    ok &= dt < 5
    assert line(1, ok, f"max cancellation residual {worst_cancel:.2e}, max L2 gap {worst_gap:.2e}, {dt:.1f} s")


def test_criterion_02_modulus(line, kernel):
    t0 = time.perf_counter()
    base = omega2(kernel)
    fine = omega2(kernel, base.delta_grid, {"cap_refinement": 100})
    rel = np.abs(base.omega2_values / fine.omega2_values - 1)
    mono = bool(np.all(np.diff(base.omega2_values) >= 0))
    dt = time.perf_counter() - t0
    ok = bool(np.all(rel < 0.05)) and mono and dt < 30
    assert line(2, ok, f"max gap to 10x cap search {rel.max():.2e}, monotone {mono}, {dt:.1f} s")


def test_criterion_03_closed_forms(line):
    t = ModulusTable.from_function(lambda d: d)
    a = dini_integral(t, 0.5)
    b = log_dini_integral(t, 2.0)
    ok = abs(a - 2.0) <= 1e-3 and abs(b - 5.0) <= 1e-2
    assert line(3, ok, f"dini(alpha=0.5) = {a:.6f}, log-dini(sigma=2) = {b:.6f}")


def test_criterion_04_atoms(line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    ps = (1.0, 0.8, 2.0 / 3.0)
    failed, worst = 0, 0.0
    for i in range(100):
        shape = random_shape(rng, 2, degree=int(rng.integers(1, 4)))
        center = rng.uniform(-8, 8, 2)
        radius = float(np.exp(rng.uniform(math.log(0.1), math.log(4.0))))
        rep = verify_atom(build_atom(2, ps[i % 3], (center, radius), shape))
        worst = max(worst, rep.moments.residual)
        failed += not (rep.passed and rep.moments.residual < 1e-9)
    dt = time.perf_counter() - t0
    ok = failed == 0 and dt < 10
    assert line(4, ok, f"{100 - failed}/100 atoms pass, worst moment residual {worst:.2e}, {dt:.1f} s")


def test_criterion_05_oracle_equivalence(line, kernel, atom, params):
    t0 = time.perf_counter()
    X = np.array([[8.0, 0.0], [0.0, 16.0], [-32 / math.sqrt(2), 32 / math.sqrt(2)], [64.0, 0.0], [0.0, -128.0]])
    worst_rel, worst_sigma, ok = 0.0, 0.0, True
    for tag in ("mu_s", "mu_star"):
        route = evaluate_on_grid(tag, kernel, atom, X, params)
        dense = dense_oracle_many(kernel, atom, X, tag, resolution=24, rho=params.rho, lam=params.lam)
        m2, s2 = monte_carlo_oracle(kernel, atom, X, tag, params.rho, params.lam, n_y=20000, seed=0)
        rel = np.abs(route.values / dense - 1)
        sig = np.abs(route.values ** 2 - m2) / s2
        worst_rel, worst_sigma = max(worst_rel, rel.max()), max(worst_sigma, sig.max())
        ok &= bool(np.all(rel < 0.01)) and bool(np.all(sig < 3))
    dt = time.perf_counter() - t0
    ok &= dt < 300
    assert line(5, ok, f"max dense gap {worst_rel:.2e}, max MC deviation {worst_sigma:.2f} sigma, {dt:.0f} s")


def test_criterion_06_domination(line):
    t0 = time.perf_counter()
    cfg = suite_config({"suite": "domination"})
    results = [job_domination(cfg, lam) for lam in (2.5, 3.0, 4.0)]
    violations = sum(r.metrics["violations"] for r in results)
    ratio = max(r.metrics["max_ratio_mu_s_over_mu_star"] for r in results)
    dt = time.perf_counter() - t0
    ok = violations == 0 and all(r.verdict == PASS for r in results) and dt < 600
    assert line(6, ok, f"{violations} violations on 3 x 100 points, max mu_s/mu_star {ratio:.3f}, {dt:.0f} s")


def test_criterion_07_decay(line, kernel, atom, params):
    t0 = time.perf_counter()
    beta_rule = 0.9 * min(0.5, params.alpha, params.rho - params.n / 2, (params.lam - 2) * params.n / 3)
    ok = abs(params.beta - beta_rule) < 1e-12
    parts = []
    for tag in ("mu_s", "mu_star"):
        fit = decay_fit(tag, kernel, atom, params)
        ok &= fit.verdict == PASS and fit.slope <= -(params.n + params.beta) + 0.15 and fit.C_change < 2
        parts.append(f"{tag} slope {fit.slope:.4f} C_fit {fit.C_fit:.3f} (x{fit.C_change:.3f})")
    dt = time.perf_counter() - t0
    ok &= dt < 600
    assert line(7, ok, "; ".join(parts) + f", required slope <= {-(params.n + params.beta) + 0.15:.2f}, {dt:.0f} s")


def test_criterion_08_lp_uniformity(line):
    t0 = time.perf_counter()
    cfg = suite_config({"suite": "lp"})
    results = {tag: job_lp(cfg, tag) for tag in ("mu_s", "mu_star")}
    spreads = {f"{tag} {k}": v for tag, r in results.items() for k, v in r.metrics.items()
               if k.startswith("spread")}
    dt = time.perf_counter() - t0
    ok = len(spreads) == 4 and all(v < 0.2 for v in spreads.values()) and dt < 900
    ok &= all(r.verdict == PASS for r in results.values())
    detail = ", ".join(f"{k} {v:.2e}" for k, v in sorted(spreads.items()))
    assert line(8, ok, f"radius spreads: {detail}, {dt:.0f} s")


def test_criterion_09_weak_type(line):
    t0 = time.perf_counter()
    cfg = suite_config({"suite": "weak-type"})
    results = {tag: job_weak(cfg, tag) for tag in ("mu_s", "mu_star")}
    parts, ok = [], True
    for tag, r in results.items():
        ok &= r.verdict == PASS
        for key, v in sorted(r.metrics.items()):
            if key.startswith("sup_ratio"):
                p = key.split("=")[1]
                refined = r.metrics[f"refined_sup_ratio_p={p}"]
                octaves = r.metrics[f"octaves_p={p}"]
                ok &= math.isfinite(v) and abs(refined / v - 1) < 0.25 and octaves >= 4 - 1e-9
                parts.append(f"{tag} p={p} sup {v:.3f} refined {refined:.3f}")
    dt = time.perf_counter() - t0
    ok &= len(parts) == 4 and dt < 1200
    assert line(9, ok, "; ".join(parts) + f", {dt:.0f} s")


def test_criterion_10_kernel_difference(line):
    t0 = time.perf_counter()
    r = job_lemma25(suite_config({"suite": "lemma25"}))
    m = r.metrics
    dt = time.perf_counter() - t0
    ok = (r.verdict == PASS and m["dilation_change"] < 0.25 and m["scaling_invariance_gap"] < 1e-12
          and 0 < m["C_star"] < math.inf and dt < 300)
    assert line(10, ok, f"C* {m['C_star']:.4f}, dilation change {m['dilation_change']:.2e}, "
                        f"c Omega gap {m['scaling_invariance_gap']:.1e}, {dt:.1f} s")


REDUCED = {"suite": "all", "seed": 11, "atom.count": 6, "decay.n_points": 4, "lp.radii": (0.5, 2.0),
           "lp.p": (1.0,), "weak.refine": False, "weak.endpoint": False, "weak.octaves": 3,
           "domination.lambdas": (3.0,), "domination.points": 3}


def test_criterion_11_determinism(line, tmp_path):
    t0 = time.perf_counter()
    bodies = []
    for i in range(2):
        cfg = suite_config(dict(REDUCED), out=str(tmp_path / f"run{i}"))
        report, checks, verdict = run_suite(cfg)
        with open(write_outputs(cfg.out, report, checks), "rb") as fh:
            bodies.append(fh.read())
    same = bodies[0] == bodies[1]
    dt = time.perf_counter() - t0
    assert line(11, same, f"two runs of 'all' give {'identical' if same else 'different'} report.json "
                          f"({len(bodies[0])} bytes), {dt:.0f} s")
