import csv
import io
import json

import pytest

from gpcert.harness import report as rpt
from gpcert.harness.cli import main
from gpcert.harness.config import CONFIG_ENV, ConfigError, RunConfig, load_config
from gpcert.harness.criteria import REGISTRY, run_check
from gpcert.harness.report import Record, Report
from gpcert.harness.suite import run_suite


def _sample_report():
    return Report(
        [
            Record("moves:a", {"k": 1, "rho": [1, 2, 1]}, 1.5e-15, True, 12.25),
            Record("terms:b", {}, 8, False, 0.0, None),
            Record("x:err", {}, None, False, 0.0, "ValueError: boom"),
        ],
        {"seed": 1},
    )


def test_json_round_trip_is_byte_identical():
    text = rpt.emit(_sample_report(), "json")
    again = rpt.emit(rpt.parse_json(text), "json")
    assert again == text


def test_empty_report_documents():
    empty = Report()
    assert json.loads(rpt.emit(empty, "json"))["records"] == []
    assert rpt.emit(empty, "csv").strip() == ",".join(rpt.FIELDS)
    assert "0 records" in rpt.emit(empty, "text")
    assert empty.passed


def test_csv_single_row():
    rows = list(csv.reader(io.StringIO(rpt.emit(Report([Record("a:b", {"x": 1}, 0.5)]), "csv"))))
    assert rows[0] == list(rpt.FIELDS)
    assert len(rows) == 2 and rows[1][0] == "a:b"


def test_unknown_format():
    with pytest.raises(ValueError):
        rpt.emit(Report(), "yaml")


def test_report_pass_logic():
    r = _sample_report()
    assert not r.passed
    assert set(r.by_group()) == {"moves", "terms", "x"}
    assert r.summary() == {"total": 3, "failed": 2, "passed": False}


def test_unknown_check_rejected():
    with pytest.raises(ConfigError):
        RunConfig(checks=["nope"])


@pytest.mark.parametrize(
    "bad", [{"n": 12}, {"d": 4}, {"tol_quadrature": 0}, {"k_max": 4}, {"lam": 2}, {"M": -1}]
)
def test_config_ranges(bad):
    with pytest.raises(ConfigError):
        RunConfig(**bad)


def test_empty_check_list_passes():
    rep = run_suite(RunConfig(checks=[]))
    assert rep.records == [] and rep.passed


def test_config_file_env_and_overrides(tmp_path, monkeypatch):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"checks": ["golden"], "seed": 5, "n": 32}))
    monkeypatch.setenv(CONFIG_ENV, str(path))
    cfg = load_config(None, {"seed": 9})
    assert cfg.checks == ["golden"] and cfg.n == 32 and cfg.seed == 9


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    extra = tmp_path / "extra.json"
    extra.write_text(json.dumps({"colour": "red"}))
    with pytest.raises(ConfigError):
        load_config(str(extra))


def test_check_errors_are_recorded(monkeypatch):
    def broken(cfg):
        raise RuntimeError("bad")

    monkeypatch.setitem(REGISTRY, "golden", broken)
    recs = run_check("golden", RunConfig(checks=["golden"]))
    assert recs[0].id == "golden:error" and not recs[0].passed
    assert "RuntimeError" in recs[0].error


def test_suite_is_deterministic():
    cfg = RunConfig(checks=["enumeration", "golden", "terms", "ledger", "trace", "definetti"])
    a, b = run_suite(cfg), run_suite(cfg)
    strip = lambda rep: [(r.id, r.params, r.residual, r.passed) for r in rep.records]  # noqa: E731
    assert strip(a) == strip(b)


def test_cli_suite_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["suite", "--checks", "golden,ledger", "--json", str(out)]) == 0
    assert json.loads(out.read_text())["summary"]["passed"] is True
    assert main(["suite", "--checks", "nope"]) == 2
    # the class-count bound fails, so the exit code is nonzero
    assert main(["suite", "--checks", "enumeration"]) == 1


def test_cli_suite_config_and_flags(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"checks": ["golden"], "seed": 3}))
    csv_path = tmp_path / "r.csv"
    assert main(["suite", "--config", str(cfg), "--seed", "4", "--csv", str(csv_path), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["seed"] == 4
    assert csv_path.read_text().startswith("id,")


def test_cli_figures(tmp_path, capsys):
    figs = tmp_path / "figs"
    assert main(["suite", "--checks", "ledger,nls-dn", "--figures", str(figs)]) == 0
    names = sorted(p.name for p in figs.iterdir())
    assert names == ["ledger_bound.png", "nls_convergence.png", "residuals.png"]
    assert all((figs / n).stat().st_size > 1000 for n in names)


@pytest.mark.parametrize(
    "argv,needle",
    [
        (["enumerate", "--k", "3", "--r", "4"], "360 collapse maps"),
        (["classes", "--k", "1", "--r", "3"], "5 classes"),
        (["trees", "--k", "3", "--rho", "2,2,3,5"], "tree 2 (distinguished)"),
        (["expand", "--k", "1", "--rho", "1,2,3"], "J_1: 8 term(s)"),
        (["ledger", "--k", "1", "--r", "3", "--rho", "1,2,3"], "8 C^3 T^2 M^8"),
    ],
)
def test_cli_commands(argv, needle, capsys):
    assert main(argv) == 0
    assert needle in capsys.readouterr().out


def test_cli_enumerate_cap(capsys):
    assert main(["enumerate", "--k", "3", "--r", "6", "--cap", "10"]) == 2
    assert "exceed" in capsys.readouterr().err


def test_cli_bad_rho(capsys):
    assert main(["trees", "--k", "1", "--rho", "2"]) == 2


def test_cli_outputs(tmp_path, capsys):
    dot, exp, cls = tmp_path / "f.dot", tmp_path / "e.json", tmp_path / "c.json"
    main(["trees", "--k", "3", "--rho", "2,2,3,5", "--dot", str(dot)])
    main(["expand", "--k", "1", "--rho", "1,2", "--json", str(exp)])
    main(["classes", "--k", "1", "--r", "3", "--json", str(cls)])
    assert dot.read_text().startswith("digraph")
    assert json.loads(exp.read_text())["rho"] == [1, 2]
    assert json.loads(cls.read_text())["class_count"] == 5


@pytest.mark.parametrize("check", ["moves", "resum", "factorize", "mild", "definetti", "trace"])
def test_cli_verify_schema(check, tmp_path, capsys):
    out = tmp_path / "v.json"
    code = main(["verify", "--check", check, "--k", "1", "--r", "2", "--n", "32", "--json", str(out)])
    doc = json.loads(out.read_text())
    assert list(doc) == ["check", "params", "residuals", "pass", "runtime_ms"]
    assert doc["pass"] is True and code == 0
