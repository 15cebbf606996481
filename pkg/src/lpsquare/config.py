"""Flat dotted key-value configs: ``params.rho = 1.5``.

One ``key = value`` per line, ``#`` starts a comment.  Values are Python
literals when they parse as one (numbers, booleans, tuples, quoted strings),
otherwise raw strings.  ``--set key=value`` overrides use the same syntax.
"""

import ast
from dataclasses import dataclass, field, fields

from .exceptions import DomainError
from .operators import OperatorParams
from .quad import QuadPlan

SUITES = ("kernel-checks", "atom-checks", "decay", "lp", "weak-type", "domination", "lemma25", "all")

_PARAM_KEYS = {"n": "n", "rho": "rho", "lam": "lam", "lambda": "lam", "alpha": "alpha", "beta": "beta",
               "p": "p", "hardy": "hardy", "allow_endpoint": "allow_endpoint"}
_PLAN_KEYS = {f.name for f in fields(QuadPlan)}


def parse_value(text):
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_lines(lines, source="<config>"):
    out = {}
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise DomainError(f"{source}:{num}: expected 'key = value', got {raw.strip()!r}")
        out[key] = parse_value(value)
    return out


def load_config(path):
    with open(path) as fh:
        return parse_lines(fh, str(path))


def apply_overrides(cfg, overrides):
    cfg = dict(cfg)
    for item in overrides or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise DomainError(f"override {item!r} is not key=value")
        cfg[key.strip()] = parse_value(value)
    return cfg


def section(cfg, prefix):
    """Keys under ``prefix.`` with the prefix stripped."""
    pre = prefix + "."
    return {k[len(pre):]: v for k, v in cfg.items() if k.startswith(pre)}


@dataclass
class SuiteConfig:
    suite: str = "all"
    kernel: str = "circle-harmonic-1"
    params: dict = field(default_factory=dict)
    plan: dict = field(default_factory=dict)
    atom: dict = field(default_factory=dict)
    weak: dict = field(default_factory=dict)
    out: str = "lpsquare-out"
    seed: int = 0
    jobs: int = 1
    unsafe: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.suite not in SUITES:
            raise DomainError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        unknown = set(self.params) - set(_PARAM_KEYS)
        if unknown:
            raise DomainError(f"unknown params keys: {sorted(unknown)}")
        unknown = set(self.plan) - _PLAN_KEYS
        if unknown:
            raise DomainError(f"unknown plan keys: {sorted(unknown)}")

    def operator_params(self, n=None, **kw):
        """Validated OperatorParams (raises ParameterError naming the constraint)."""
        args = {_PARAM_KEYS[k]: v for k, v in self.params.items()}
        if n is not None:
            args.setdefault("n", n)
        args.update(kw)
        return OperatorParams(unsafe=self.unsafe, **args)

    def quad_plan(self):
        return QuadPlan(**self.plan) if self.plan else None

    def as_dict(self):
        return {"suite": self.suite, "kernel": self.kernel, "params": dict(sorted(self.params.items())),
                "plan": dict(sorted(self.plan.items())), "atom": dict(sorted(self.atom.items())),
                "weak": dict(sorted(self.weak.items())), "seed": self.seed, "unsafe": self.unsafe}


def suite_config(cfg, **cli):
    """SuiteConfig from a flat mapping; keyword arguments (CLI flags) win when not None."""
    cfg = dict(cfg)
    for k, v in cli.items():
        if v is not None:
            cfg[k] = v
    known = {"suite", "kernel", "out", "seed", "jobs", "unsafe"}
    extra = {k: v for k, v in cfg.items()
             if k not in known and k.split(".", 1)[0] not in ("params", "plan", "atom", "weak")}
    return SuiteConfig(
        suite=str(cfg.get("suite", "all")),
        kernel=str(cfg.get("kernel", "circle-harmonic-1")),
        params=section(cfg, "params"),
        plan=section(cfg, "plan"),
        atom=section(cfg, "atom"),
        weak=section(cfg, "weak"),
        out=str(cfg.get("out", "lpsquare-out")),
        seed=int(cfg.get("seed", 0)),
        jobs=int(cfg.get("jobs", 1)),
        unsafe=bool(cfg.get("unsafe", False)),
        extra=extra,
    )
