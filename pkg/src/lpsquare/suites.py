"""Named verification suites built from independent jobs.

A job is ``(job_id, function, kwargs)`` with a picklable SuiteConfig; results
are merged by job id, so serial and parallel runs give the same report.
"""

import functools
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .atoms import (build_atom, build_weak_hardy, dilated_cover, level_of, min_moment_order,
                    random_shape, split_at_level, verify_atom)
from .config import SUITES, section
from .exceptions import LPSquareError, ParameterError, TruncationError
from .kernel import (CANCEL_TOL, cancellation_passes, check_cancellation, check_uniform_l2,
                     dini_integral, get_kernel, kernel_from_config, lipschitz_check,
                     log_dini_integral, omega2)
from .report import CheckResult, build_report
from .verify import (FAIL, INCONCLUSIVE, PASS, PowerLawDecay, combine, decay_fit,
                     domination_check, lemma25_lhs_dense, lemma25_study, lp_norm_estimate,
                     polar_window, unit_decay, weak_type_check, Lemma25Case, lemma25_check)

OPERATOR_TAGS = ("mu_s", "mu_star")


# --------------------------------------------------------------------------
# shared construction (memoized per process so fitted fields are reused)


def suite_kernel(cfg):
    ksec = section(cfg.extra, "kernel")
    return kernel_from_config(ksec) if ksec else get_kernel(cfg.kernel)


def _opt(cfg, key, default):
    return cfg.extra.get(key, default)


@functools.lru_cache(maxsize=16)
def _atom(n, p, center, radius, shape):
    return build_atom(n, p, (np.asarray(center, dtype=float), radius), shape)


def standard_atom(cfg, params, radius=None):
    n = params.n
    center = tuple(float(c) for c in cfg.atom.get("center", (0.0,) * n))
    r = float(cfg.atom.get("radius", 1.0) if radius is None else radius)
    return _atom(n, float(params.p), center, r, str(cfg.atom.get("shape", "bump")))


def _operators(params):
    return OPERATOR_TAGS if params.operator == "both" else (params.operator,)


# --------------------------------------------------------------------------
# kernel checks


def job_cancellation(cfg):
    k = suite_kernel(cfg)
    res = check_cancellation(k)
    ok = cancellation_passes(k, res)
    notes = ["cancellation-exempt kernel"] if k.cancellation_exempt else []
    return CheckResult("", "kernel-checks", "cancellation", PASS if ok else FAIL,
                       {"residual": res, "tolerance": CANCEL_TOL}, notes)


def job_uniform_l2(cfg):
    k = suite_kernel(cfg)
    res = check_uniform_l2(k)
    if res.analytic_bound is None:
        ok = math.isfinite(res.sampled_max)
        return CheckResult("", "kernel-checks", "uniform-l2", PASS if ok else FAIL,
                           {"sampled_max": res.sampled_max}, ["non-separable: sampled value only"])
    rel = abs(res.sampled_max / res.analytic_bound - 1) if res.analytic_bound > 0 else 0.0
    return CheckResult("", "kernel-checks", "uniform-l2", PASS if rel <= 0.01 else FAIL,
                       {"sampled_max": res.sampled_max, "analytic_bound": res.analytic_bound,
                        "relative_gap": rel})


def job_modulus(cfg):
    k = suite_kernel(cfg)
    params = cfg.operator_params(n=k.dimension)
    table = omega2(k)
    mono = bool(np.all(np.diff(table.omega2_values) >= 0))
    # the results need Dini at some exponent in (beta, alpha]; test the midpoint
    a_test = float(_opt(cfg, "kernel_checks.dini_alpha", 0.5 * (params.beta + params.alpha)))
    dini = dini_integral(table, a_test)
    dini_at_alpha = dini_integral(table, params.alpha)
    sigma = float(_opt(cfg, "kernel_checks.sigma", 2.0))
    logd = log_dini_integral(table, sigma)
    verdict = PASS if mono and math.isfinite(dini) and math.isfinite(logd) else FAIL
    rows = list(zip(table.delta_grid, table.omega2_values, table.raw_values))
    return CheckResult("", "kernel-checks", "modulus", verdict,
                       {"monotone": mono, "dini_integral": dini, "dini_alpha": a_test,
                        "dini_integral_at_alpha": dini_at_alpha, "alpha": params.alpha,
                        "log_dini_integral": logd, "sigma": sigma},
                       ["omega2 values are lower estimates (discrete cap search)"],
                       tables={"omega2": (["delta", "omega2", "omega2_raw"], rows)})


def job_lipschitz(cfg):
    k = suite_kernel(cfg)
    if k.lipschitz_alpha is None:
        return CheckResult("", "kernel-checks", "lipschitz", PASS, {},
                           ["no Lipschitz exponent declared; nothing to check"])
    alpha, declared = k.lipschitz_alpha
    fit = lipschitz_check(k, alpha, seed=cfg.seed)
    ok = fit.bounded
    return CheckResult("", "kernel-checks", "lipschitz", PASS if ok else FAIL,
                       {"alpha": alpha, "declared_constant": declared, "constant": fit.constant,
                        "refined_constant": fit.refined_constant, "bounded": fit.bounded})


# --------------------------------------------------------------------------
# atom checks


def job_random_atoms(cfg):
    params = cfg.operator_params(n=2)
    n = params.n
    count = int(cfg.atom.get("count", 20))
    rng = np.random.default_rng(cfg.seed)
    ps = (1.0, 0.8, 2.0 / 3.0)
    worst = 0.0
    failed = 0
    rows = []
    for i in range(count):
        p = ps[i % len(ps)]
        shape = random_shape(rng, n, degree=int(rng.integers(1, 4)))
        center = rng.uniform(-8, 8, n)
        radius = float(np.exp(rng.uniform(math.log(0.1), math.log(4.0))))
        a = build_atom(n, p, (center, radius), shape)
        rep = verify_atom(a)
        worst = max(worst, rep.moments.residual)
        failed += not rep.passed
        rows.append([i, p, a.s, radius, rep.support.residual, rep.size.residual, rep.moments.residual,
                     int(rep.passed)])
    return CheckResult("", "atom-checks", "random-atoms", PASS if failed == 0 else FAIL,
                       {"count": count, "failed": failed, "worst_moment_residual": worst},
                       tables={"atoms": (["i", "p", "s", "radius", "support_residual", "size_ratio",
                                          "moment_residual", "passed"], rows)})


def _weak_plan(cfg):
    levels = section(cfg.weak, "level")
    if levels:
        from .atoms import _parse_balls
        return {int(k): _parse_balls(v, 2) for k, v in levels.items()}
    return {0: [((0.0, 0.0), 1.0)], 2: [((6.0, 0.0), 0.25), ((-6.0, 0.0), 0.25)]}


def job_weak_sequence(cfg):
    params = cfg.operator_params(n=2)
    seq = build_weak_hardy(_weak_plan(cfg), str(cfg.weak.get("shape", "bump")), params.p)
    checks = seq.check()
    metrics = {f"{k}_residual": v.residual for k, v in checks.items()}
    ok = all(v.passed for v in checks.values())
    lam = float(cfg.weak.get("lambda", 1.5))
    split = split_at_level(seq, lam)
    cover = dilated_cover(seq, split.k0)
    metrics.update({"c": seq.c, "lambda": lam, "k0": split.k0, "l4_sum": split.l4_sum,
                    "l4_claim": split.l4_claim, "cover_measure": cover.total_measure,
                    "cover_bound": cover.bound})
    ok = ok and cover.total_measure <= cover.bound * (1 + 1e-12)
    return CheckResult("", "atom-checks", "weak-hardy-sequence", PASS if ok else FAIL, metrics,
                       ["l4_sum vs l4_claim holds up to a constant; reported, not asserted"])


# --------------------------------------------------------------------------
# operator suites


def _decay_result(tag, fit, params, suite="decay"):
    rows = list(zip(fit.distances, fit.values, fit.uncertainties))
    fig = None
    metrics = {"slope": fit.slope, "required_slope": -(params.n + params.beta) + 0.15,
               "C_fit": fit.C_fit, "C_fit_extended": fit.C_fit_extended, "beta": params.beta}
    figures = {}
    if fit.verdict != INCONCLUSIVE or np.all(fit.values > 0):
        if np.all(fit.values > 0):
            fig = PowerLawDecay().fit(fit.distances, fit.values).predict(fit.distances)
            figures = {"loglog": dict(x=fit.distances, y=fit.values, fit=fig, xlabel="|x - x0|",
                                      ylabel=tag, title=f"{tag} decay, slope {fit.slope:.3f}")}
    return CheckResult("", suite, f"decay-{tag}", fit.verdict, metrics,
                       tables={"decay": (["distance", "value", "uncertainty"], rows)}, figures=figures)


def job_decay(cfg, tag):
    k = suite_kernel(cfg)
    params = cfg.operator_params(n=k.dimension)
    atom = standard_atom(cfg, params)
    ray = tuple(cfg.extra.get("decay.ray", (1.0,) + (0.0,) * (params.n - 1)))
    fit = decay_fit(tag, k, atom, params, ray=ray, n_points=int(cfg.extra.get("decay.n_points", 8)),
                    plan=cfg.quad_plan())
    return _decay_result(tag, fit, params)


def _window_kw(cfg):
    return dict(core_cells=int(_opt(cfg, "window.core_cells", 8)),
                per_octave=int(_opt(cfg, "window.per_octave", 6)),
                angular=int(_opt(cfg, "window.angular", 32)))


def job_lp(cfg, tag):
    k = suite_kernel(cfg)
    params = cfg.operator_params(n=k.dimension)
    radii = tuple(float(r) for r in cfg.extra.get("lp.radii", (0.25, 0.5, 1.0, 2.0)))
    p_lo = params.p_min
    ps = tuple(cfg.extra.get("lp.p", (1.0, 0.5 * (p_lo + 1.0))))
    unit = standard_atom(cfg, params.with_(p=1.0), radius=1.0)
    decay = decay_fit(tag, k, unit, params, plan=cfg.quad_plan())
    if decay.verdict != PASS:
        return CheckResult("", "lp", f"lp-{tag}", INCONCLUSIVE, {"decay_slope": decay.slope},
                           ["decay fit did not pass; exterior tail unavailable"])
    rows, metrics, verdicts = [], {"C_fit": decay.C_fit}, []
    for p in ps:
        pp = params.with_(p=float(p))
        vals = []
        for r in radii:
            atom = standard_atom(cfg, pp, radius=r)
            win = polar_window(atom.center, r, **_window_kw(cfg))
            est = lp_norm_estimate(tag, k, atom, pp, win, decay, cache={})
            vals.append(est.value)
            rows.append([p, r, est.value, est.uncertainty, est.window_part, est.tail_part, est.tail_fraction])
        spread = max(vals) / min(vals) - 1 if min(vals) > 0 else math.inf
        metrics[f"spread_p={p:.6g}"] = spread
        verdicts.append(PASS if spread < 0.2 else FAIL)
    return CheckResult("", "lp", f"lp-{tag}", combine(verdicts), metrics,
                       tables={"lp": (["p", "radius", "estimate", "uncertainty", "window_part",
                                       "tail_part", "tail_fraction"], rows)})


def job_weak(cfg, tag):
    k = suite_kernel(cfg)
    params = cfg.operator_params(n=k.dimension)
    n = params.n
    level = int(cfg.weak.get("level", 0))
    radius = float(cfg.weak.get("radius", 1.0))
    center = tuple(float(c) for c in cfg.weak.get("center", (0.0,) * n))
    plan = {level: [(center, radius)]}
    shape = str(cfg.weak.get("shape", "bump"))
    ps = [params.p]
    if bool(cfg.weak.get("endpoint", True)):
        ps.append(params.p_min)
    cache = {}
    rows, metrics, verdicts = [], {}, []
    first = build_weak_hardy(plan, shape, float(ps[0]), n=n)
    decay = unit_decay(tag, k, first.blocks[0], params, cfg.quad_plan())
    metrics["C_fit"] = decay.C_fit
    for p in ps:
        pp = params.with_(p=float(p), allow_endpoint=True)
        seq = build_weak_hardy(plan, shape, float(p), n=n)
        if min_moment_order(n, p) != min_moment_order(n, ps[0]):
            cache = {}  # different moment order: different blocks
        res = weak_type_check(tag, k, seq, pp, octaves=int(cfg.weak.get("octaves", 4)), cache=cache,
                              decay=decay, refine=bool(cfg.weak.get("refine", True)))
        for e, r in zip(res.estimates, res.ratios):
            rows.append([p, e.lam, e.window_measure, e.tail_measure, r])
        metrics[f"sup_ratio_p={p:.6g}"] = res.sup_ratio
        metrics[f"refined_sup_ratio_p={p:.6g}"] = res.refined_sup_ratio
        metrics[f"octaves_p={p:.6g}"] = res.octaves
        verdicts.append(res.verdict)
    return CheckResult("", "weak-type", f"weak-{tag}", combine(verdicts), metrics,
                       tables={"weak": (["p", "lambda", "window_measure", "tail_measure", "ratio"], rows)})


def job_domination(cfg, lam):
    k = suite_kernel(cfg)
    params = cfg.operator_params(n=k.dimension, lam=float(lam), operator="mu_s")
    atom = standard_atom(cfg, params)
    half = float(_opt(cfg, "domination.half_width", 8.0))
    m = int(_opt(cfg, "domination.points", 10))
    ax = np.linspace(-half, half, m)
    grid = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2) + atom.center
    res = domination_check(k, atom, params, grid, cfg.quad_plan())
    rows = [list(pt) + [s, m_, u, mg] for pt, s, m_, u, mg in
            zip(res.points, res.mu_s, res.mu_star, res.uncertainty, res.margins)]
    ratio = res.mu_s / np.where(res.mu_star > 0, res.mu_star, np.nan)
    return CheckResult("", "domination", f"domination-lambda={lam:g}", res.verdict,
                       {"lambda": float(lam), "constant": res.constant, "violations": res.violations,
                        "max_ratio_mu_s_over_mu_star": float(np.nanmax(ratio))},
                       tables={"domination": (["x1", "x2", "mu_s", "mu_star", "uncertainty", "margin"], rows)})


def job_lemma25(cfg):
    k = suite_kernel(cfg)
    params = cfg.operator_params(n=k.dimension)
    study = lemma25_study(k, rho=params.rho)
    scaled = lemma25_study(k.scaled(3.0), rho=params.rho)
    inv = max(abs(a.ratio - b.ratio) for a, b in zip(study.results, scaled.results))
    case = Lemma25Case(4.0, (0.0,) * k.dimension, (0.5,) + (0.0,) * (k.dimension - 1))
    dense = None
    if k.dimension == 2:
        r = lemma25_check(k, case, rho=params.rho)
        dense = lemma25_lhs_dense(k, case, rho=params.rho)
        dense_gap = abs(dense / r.lhs - 1)
    else:
        dense_gap = 0.0
    rows = [[c.R, *c.h, *c.z, a.lhs, a.rhs, a.ratio, b.ratio]
            for c, a, b in zip(study.cases, study.results, study.dilated_results)]
    n = k.dimension
    verdicts = [study.verdict, PASS if inv < 1e-12 else FAIL, PASS if dense_gap < 0.05 else FAIL]
    return CheckResult("", "lemma25", "lemma25", combine(verdicts),
                       {"C_star": study.C_star, "dilation_change": study.max_change,
                        "scaling_invariance_gap": inv, "dense_oracle_gap": dense_gap},
                       tables={"lemma25": (["R"] + [f"h{i + 1}" for i in range(n)] + [f"z{i + 1}" for i in range(n)]
                                           + ["lhs", "rhs", "ratio", "ratio_dilated"], rows)})


# --------------------------------------------------------------------------
# planning and running


def plan_jobs(cfg, suite=None):
    suite = suite or cfg.suite
    if suite == "all":
        jobs = []
        for s in SUITES[:-1]:
            jobs.extend(plan_jobs(cfg, s))
        return jobs
    params = cfg.operator_params(n=suite_kernel(cfg).dimension)
    if suite == "kernel-checks":
        return [("kernel.1-cancellation", job_cancellation, {}), ("kernel.2-uniform-l2", job_uniform_l2, {}),
                ("kernel.3-modulus", job_modulus, {}), ("kernel.4-lipschitz", job_lipschitz, {})]
    if suite == "atom-checks":
        return [("atoms.1-random", job_random_atoms, {}), ("atoms.2-weak-sequence", job_weak_sequence, {})]
    if suite == "decay":
        return [(f"decay.{t}", job_decay, {"tag": t}) for t in _operators(params)]
    if suite == "lp":
        return [(f"lp.{t}", job_lp, {"tag": t}) for t in _operators(params)]
    if suite == "weak-type":
        return [(f"weak.{t}", job_weak, {"tag": t}) for t in _operators(params)]
    if suite == "domination":
        lams = cfg.extra.get("domination.lambdas", (2.5, 3.0, 4.0))
        return [(f"domination.lambda={float(l):g}", job_domination, {"lam": float(l)}) for l in lams]
    if suite == "lemma25":
        return [("lemma25", job_lemma25, {})]
    raise ParameterError("suite in the closed set", f"unknown suite {suite!r}")


def run_job(job_id, fn, kwargs, cfg):
    try:
        res = fn(cfg, **kwargs)
    except TruncationError as exc:
        res = CheckResult("", "", fn.__name__, INCONCLUSIVE, {},
                          [f"{type(exc).__name__}: {exc}", f"suggested: {exc.suggested}"])
    except LPSquareError as exc:
        res = CheckResult("", "", fn.__name__, FAIL, {}, [f"{type(exc).__name__}: {exc}"])
    res.job_id = job_id
    if not res.suite:
        res.suite = job_id.split(".", 1)[0]
    return res


def _run_packed(args):
    return run_job(*args)


def run_suite(cfg):
    """Validate, run every job, and return (report dict, checks, overall verdict)."""
    kernel = suite_kernel(cfg)
    params = cfg.operator_params(n=kernel.dimension)  # raises ParameterError
    jobs = plan_jobs(cfg)
    packed = [(jid, fn, kw, cfg) for jid, fn, kw in jobs]
    if cfg.jobs > 1 and len(packed) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            checks = list(ex.map(_run_packed, packed))
    else:
        checks = [_run_packed(a) for a in packed]
    checks.sort(key=lambda c: c.job_id)
    verdict = combine(c.verdict for c in checks)
    echo = cfg.as_dict()
    echo["resolved_params"] = params.as_dict()
    echo["kernel_description"] = kernel.describe()
    echo["extra"] = dict(sorted(cfg.extra.items()))
    report = build_report(echo, checks, __version__, verdict, params.watermark)
    return report, checks, verdict
