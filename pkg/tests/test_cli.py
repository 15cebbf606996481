import json
import os

import pytest

from lpsquare.cli import catalog, main


def test_list_json_stable(capsys):
    assert main(["list", "--json"]) == 0
    first = capsys.readouterr().out
    assert main(["list", "--json"]) == 0
    assert capsys.readouterr().out == first
    cat = json.loads(first)
    ids = [k["id"] for k in cat["kernels"]]
    assert "circle-harmonic-1" in ids
    assert ids == sorted(ids)
    exempt = {k["id"]: k["cancellation_exempt"] for k in cat["kernels"]}
    assert exempt["test-constant"] is True
    assert exempt["circle-harmonic-1"] is False


def test_list_text(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "test-constant  n=2 cancellation_exempt" in out
    assert "beta in" in out


def test_catalog_instance():
    inst = catalog()["instances"][0]
    assert inst["params"]["beta"] == 0.45


def test_run_kernel_checks(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["run", "kernel-checks", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["verdict"] == "pass"
    assert len(report["checks"]) == 4
    assert os.listdir(out / "tables")


def test_invalid_parameters_exit_4(tmp_path, capsys):
    code = main(["run", "decay", "--set", "params.beta=0.6", "--out", str(tmp_path / "o")])
    assert code == 4
    err = capsys.readouterr().err
    assert "beta >= rho - n/2" in err
    assert not (tmp_path / "o").exists()


def test_unsafe_runs_with_watermark(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["run", "lemma25", "--set", "params.rho=2.5", "--unsafe", "--out", str(out)])
    assert code in (0, 2, 3)
    report = json.loads((out / "report.json").read_text())
    assert "watermark" in report


@pytest.mark.parametrize("argv", [[], ["run"], ["run", "nope"], ["frobnicate"],
                                  ["oracle", "mu_s"], ["run", "decay", "--jobs", "x"]])
def test_usage_errors_exit_4(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 4


def test_bad_config_file_exit_4(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("this is not a pair\n")
    assert main(["run", "lemma25", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 4
    assert main(["run", "lemma25", "--config", str(tmp_path / "missing.cfg")]) == 4


def test_oracle_command(capsys):
    code = main(["oracle", "mu_s", "--x", "16,0", "--resolution", "8"])
    assert code == 0
    row = json.loads(capsys.readouterr().out.splitlines()[0])
    assert row["value"] > 0 and row["oracle"] > 0
    assert abs(row["relative_gap"]) < 0.05


def test_oracle_wrong_dimension(capsys):
    assert main(["oracle", "mu_s", "--x", "1,2,3"]) == 4
