import json

import numpy as np
import pytest

from lpsquare.config import apply_overrides, parse_lines, parse_value, suite_config
from lpsquare.exceptions import DomainError, ParameterError
from lpsquare.report import CheckResult, build_report, csv_text, dumps, measured, wrap_numbers


def test_parse_value_literals():
    assert parse_value("1.5") == 1.5
    assert parse_value("(1, 2)") == (1, 2)
    assert parse_value("True") is True
    assert parse_value(" bump ") == "bump"


def test_parse_lines_comments_and_errors():
    cfg = parse_lines(["# header", "params.rho = 1.5  # trailing", "", "atom.shape = bump3"])
    assert cfg == {"params.rho": 1.5, "atom.shape": "bump3"}
    with pytest.raises(DomainError):
        parse_lines(["no equals sign here"])


def test_overrides_win():
    cfg = apply_overrides({"params.rho": 1.5}, ["params.rho=1.2", "seed=3"])
    assert cfg == {"params.rho": 1.2, "seed": 3}
    with pytest.raises(DomainError):
        apply_overrides({}, ["params.rho"])


def test_suite_config_sections():
    sc = suite_config({"suite": "decay", "params.lambda": 4.0, "plan.R_y": 1e5, "decay.n_points": 6}, seed=7)
    assert sc.params == {"lambda": 4.0}
    assert sc.plan == {"R_y": 1e5}
    assert sc.extra == {"decay.n_points": 6}
    assert sc.seed == 7
    assert sc.operator_params(n=2).lam == 4.0
    assert sc.quad_plan().R_y == 1e5


def test_suite_config_rejects_unknown_keys():
    with pytest.raises(DomainError):
        suite_config({"suite": "nope"})
    with pytest.raises(DomainError):
        suite_config({"params.gamma": 1})
    with pytest.raises(DomainError):
        suite_config({"plan.warp": 1})


def test_operator_params_violation_named():
    sc = suite_config({"params.beta": 0.6})
    with pytest.raises(ParameterError) as exc:
        sc.operator_params(n=2)
    assert exc.value.constraint.startswith("beta >= rho - n/2")


def test_wrap_numbers_and_nonfinite():
    out = wrap_numbers({"a": 1.5, "b": [2, float("nan")], "c": "text", "d": measured(1.0, 0.1), "e": True})
    assert out["a"] == {"value": 1.5, "uncertainty": 0.0}
    assert out["b"][1] == {"value": "nan", "uncertainty": 0.0}
    assert out["c"] == "text"
    assert out["d"] == {"value": 1.0, "uncertainty": 0.1}
    assert out["e"] is True
    assert measured(np.inf)["value"] == "inf"


def test_report_is_deterministic():
    checks = [CheckResult("b", "s", "two", "pass", {"x": np.float64(0.1)}),
              CheckResult("a", "s", "one", "fail", {"y": 3})]
    r1 = build_report({"seed": 0}, checks, "0.1.0", "fail")
    r2 = build_report({"seed": 0}, list(reversed(checks)), "0.1.0", "fail")
    assert dumps(r1) == dumps(r2)
    body = json.loads(dumps(r1))
    assert body["schema"] == "lpsquare.report/1"
    assert [c["id"] for c in body["checks"]] == ["a", "b"]


def test_csv_has_header_row():
    text = csv_text(["d", "value"], [[1.0, 0.5], [2.0, 0.25]])
    lines = text.splitlines()
    assert lines[0] == "d,value"
    assert len(lines) == 3
