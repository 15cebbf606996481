"""Command line: ``lpsquare run <suite>``, ``lpsquare list``, ``lpsquare oracle <op>``.

Exit codes: 0 every verdict passes, 2 some verdict fails, 3 some verdict is
inconclusive and none fails, 4 invalid parameters or usage.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .config import SUITES, apply_overrides, load_config, suite_config
from .exceptions import DomainError, LPSquareError, ParameterError

EXIT = {"pass": 0, "fail": 2, "inconclusive": 3}
EXIT_USAGE = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="lpsquare", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"lpsquare {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a named suite and write reports")
    run.add_argument("suite", choices=SUITES)
    run.add_argument("--config", help="flat key = value config file")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config key (repeatable)")
    run.add_argument("--out", help="output directory (default lpsquare-out)")
    run.add_argument("--seed", type=int)
    run.add_argument("--jobs", type=int)
    run.add_argument("--unsafe", action="store_true", default=None,
                     help="allow out-of-range parameters; reports are watermarked")

    ls = sub.add_parser("list", help="catalog of built-in kernels, shapes and instances")
    ls.add_argument("--json", action="store_true")

    orc = sub.add_parser("oracle", help="compare an operator with a brute-force oracle")
    orc.add_argument("operator", choices=("mu_s", "mu_star"))
    orc.add_argument("--x", action="append", required=True, metavar="X1,X2",
                     help="evaluation point (repeatable)")
    orc.add_argument("--kernel", default="circle-harmonic-1")
    orc.add_argument("--radius", type=float, default=1.0)
    orc.add_argument("--shape", default="bump")
    orc.add_argument("--p", type=float, default=1.0)
    orc.add_argument("--rho", type=float, default=1.5)
    orc.add_argument("--lam", type=float, default=3.0)
    orc.add_argument("--method", choices=("dense", "mc"), default="dense")
    orc.add_argument("--resolution", type=int, default=16)
    orc.add_argument("--samples", type=int, default=20000)
    orc.add_argument("--seed", type=int, default=0)
    return ap


def catalog():
    """Stable-ordered catalog of built-ins."""
    from .atoms import SHAPES
    from .kernel import BUILTIN_KERNELS

    kernels = []
    for name in sorted(BUILTIN_KERNELS):
        k = BUILTIN_KERNELS[name]
        kernels.append({"id": name, "dimension": k.dimension, "separable": k.separable,
                        "cancellation_exempt": k.cancellation_exempt, "coeff_sup": k.coeff_sup,
                        "lipschitz_alpha": None if k.lipschitz_alpha is None else list(k.lipschitz_alpha)})
    return {
        "kernels": kernels,
        "shapes": sorted(SHAPES),
        "operators": ["mu_s", "mu_star"],
        "suites": list(SUITES),
        "instances": [{
            "id": "standard",
            "kernel": "circle-harmonic-1",
            "params": {"n": 2, "rho": 1.5, "lambda": 3.0, "alpha": 1.0, "beta": 0.45, "p": 1.0},
            "atom": {"shape": "bump", "center": [0.0, 0.0], "radius": 1.0},
            "ranges": {"rho": "(n/2, n)", "lambda": "> 2", "alpha": "(0, 1]",
                       "beta": "(0, min(1/2, alpha, rho - n/2, (lambda - 2) n/3))",
                       "p": "(n/(n + beta), 1]"},
        }],
    }


def _cmd_list(args):
    cat = catalog()
    if args.json:
        print(json.dumps(cat, indent=2, sort_keys=True))
        return 0
    print("kernels:")
    for k in cat["kernels"]:
        flags = " cancellation_exempt" if k["cancellation_exempt"] else ""
        print(f"  {k['id']}  n={k['dimension']}{flags}")
    print("shapes:   " + ", ".join(cat["shapes"]))
    print("suites:   " + ", ".join(cat["suites"]))
    for inst in cat["instances"]:
        print(f"instance {inst['id']}: kernel={inst['kernel']} "
              + " ".join(f"{k}={v}" for k, v in inst["params"].items()))
        for k, v in inst["ranges"].items():
            print(f"  {k} in {v}")
    return 0


def _cmd_run(args):
    from .report import write_outputs
    from .suites import run_suite

    cfg = load_config(args.config) if args.config else {}
    cfg = apply_overrides(cfg, args.set)
    cfg["suite"] = args.suite
    sc = suite_config(cfg, out=args.out, seed=args.seed, jobs=args.jobs, unsafe=args.unsafe)
    report, checks, verdict = run_suite(sc)
    path = write_outputs(sc.out, report, checks)
    if report.get("watermark"):
        print(report["watermark"], file=sys.stderr)
    for c in checks:
        print(f"{c.verdict:13s} {c.job_id}")
    print(f"{verdict}: report written to {path}")
    return EXIT[verdict]


def _cmd_oracle(args):
    from .atoms import build_atom
    from .oracles import dense_oracle_many, monte_carlo_oracle
    from .operators import OperatorParams, evaluate_on_grid, resolve_kernel

    k = resolve_kernel(args.kernel)
    n = k.dimension
    X = np.array([[float(v) for v in s.split(",")] for s in args.x])
    if X.shape[1] != n:
        raise DomainError(f"points must have {n} coordinates")
    atom = build_atom(n, args.p, (np.zeros(n), args.radius), args.shape)
    params = OperatorParams(n=n, rho=args.rho, lam=args.lam, p=args.p, hardy=False, operator=args.operator)
    route = evaluate_on_grid(args.operator, k, atom, X, params)
    if args.method == "dense":
        ref = dense_oracle_many(k, atom, X, args.operator, resolution=args.resolution, rho=args.rho, lam=args.lam)
        ref_unc = np.full(len(X), np.nan)
    else:
        m2, s2 = monte_carlo_oracle(k, atom, X, args.operator, args.rho, args.lam, n_y=args.samples, seed=args.seed)
        ref = np.sqrt(m2)
        ref_unc = s2 / (2 * np.maximum(ref, 1e-300))
    for x, v, u, r, ru in zip(X, route.values, route.uncertainties, ref, ref_unc):
        print(json.dumps({"x": x.tolist(), "value": v, "uncertainty": u, "oracle": float(r),
                          "oracle_uncertainty": None if np.isnan(ru) else float(ru),
                          "relative_gap": float(v / r - 1) if r > 0 else None}))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list(args)
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_oracle(args)
    except ParameterError as exc:
        print(f"invalid parameters: {exc.constraint}", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LPSquareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT["inconclusive"]


if __name__ == "__main__":
    sys.exit(main())
