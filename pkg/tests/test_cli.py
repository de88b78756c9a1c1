"""Config parsing, experiment runs, report writing, determinism, exit codes."""

import json

import pytest

from fraclab.cli import (
    Check,
    ConfigError,
    ExperimentReport,
    main,
    parse_config,
    run,
    write_report,
)

MINIMAL = """
kind = spectra
seed = 7
dim = 1
shape = interval:-0.125,0.125
box.nodes = 64
s.values = 0.5,1.0
"""


def test_parse_minimal_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.kind == "spectra"
    assert cfg.seed == 7
    assert cfg.box_halfwidth == 1.0  # default
    assert cfg.trials == 50  # default
    assert cfg.tol_margin == 1e-9


def test_parse_rejects_out_of_range_exponent():
    with pytest.raises(ConfigError, match="s.values"):
        parse_config("seed = 1\ns.values = 1.5")


def test_parse_rejects_unknown_key():
    with pytest.raises(ConfigError, match="unknown key 'spam'"):
        parse_config("seed = 1\nspam = 2")


def test_parse_requires_seed():
    with pytest.raises(ConfigError, match="seed"):
        parse_config("dim = 1")


def test_parse_collects_every_violation():
    text = "dim = 7\ntrials = 0\nspam = 1"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    msg = str(err.value)
    assert "dim" in msg and "trials" in msg and "spam" in msg and "seed" in msg


def test_parse_rejects_duplicates_and_garbage_lines():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("seed = 1\nseed = 2")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config("seed 1")


def test_config_echo_round_trips_into_report():
    cfg = parse_config(MINIMAL)
    report = run(cfg)
    for key, value in cfg.echo().items():
        assert report.config[key] == value


def test_run_requires_matching_kind():
    cfg = parse_config(MINIMAL)
    with pytest.raises(ConfigError, match="does not match"):
        run(cfg, kind="sweep")


def test_spectra_run_passes_with_coincidence_and_domination():
    report = run(parse_config(MINIMAL))
    assert report.all_passed
    names = [c.name for c in report.checks]
    assert any("eigenvalue_domination" in n for n in names)
    assert any("coincidence" in n for n in names)
    # margins are recorded as numbers, not booleans
    assert all(isinstance(c.margin, float) for c in report.checks)


def test_report_files_and_determinism(tmp_path):
    cfg = parse_config(MINIMAL)
    r1 = run(cfg)
    r2 = run(cfg)
    d1, d2 = tmp_path / "a", tmp_path / "b"
    write_report(r1, d1)
    write_report(r2, d2)
    for name in ("spectra.csv", "spectra.json"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_spectra_csv_schema(tmp_path):
    report = run(parse_config(MINIMAL))
    (path,) = write_report(report, tmp_path, formats=("csv",))
    header = path.read_text().splitlines()[0]
    assert header == "s,j,lambda_navier,lambda_dirichlet,margin"


def test_json_mirrors_report_structure(tmp_path):
    report = run(parse_config(MINIMAL))
    write_report(report, tmp_path)
    payload = json.loads((tmp_path / "spectra.json").read_text())
    assert payload["kind"] == "spectra"
    assert payload["columns"] == report.columns
    assert len(payload["rows"]) == len(report.rows)
    assert [c["name"] for c in payload["checks"]] == [c.name for c in report.checks]
    assert "wall_time_seconds" not in payload  # volatile fields stay out


def test_empty_table_written_as_header_only(tmp_path):
    report = ExperimentReport(
        kind="spectra",
        config={},
        columns=["j", "lambda_navier", "lambda_dirichlet", "margin"],
        rows=[],
        checks=[Check(name="noop", margin=0.0, tolerance=1.0, passed=True)],
        wall_time_seconds=0.0,
    )
    (path,) = write_report(report, tmp_path, formats=("csv",))
    assert path.read_text().splitlines() == ["j,lambda_navier,lambda_dirichlet,margin"]


def test_every_verdict_recomputable_from_margins():
    report = run(parse_config(MINIMAL))
    for check in report.checks:
        if "coincidence" in check.name:
            assert check.passed == (check.margin <= check.tolerance)
        else:
            assert check.passed == (check.margin > check.tolerance)


def test_monotonicity_and_positivity_runs_pass():
    base = "seed = 5\ndim = 1\nshape = interval:-0.125,0.125\nbox.nodes = 64\ntrials = 8\n"
    for kind in ("positivity", "monotonicity"):
        report = run(parse_config(base), kind=kind)
        assert report.all_passed, [c for c in report.checks if not c.passed]


def test_sweep_run_and_failure_exit_code(tmp_path):
    cfg_text = (
        "seed = 5\ndim = 1\nshape = interval:-0.5,0.5\nbox.halfwidth = 8\n"
        "box.nodes = 255\ns.values = 0.5\nalpha.values = 1,2,4\n"
    )
    report = run(parse_config(cfg_text), kind="sweep")
    assert report.all_passed
    # an impossible final-ratio tolerance must flip the exit code to 1
    path = tmp_path / "sweep.cfg"
    path.write_text(cfg_text + "tol.ratio_final = 1.0\n")
    code = main(["sweep", "--config", str(path), "--out", str(tmp_path)])
    assert code == 1


def test_main_exit_codes(tmp_path, capsys):
    good = tmp_path / "ok.cfg"
    good.write_text(MINIMAL)
    assert main(["spectra", "--config", str(good), "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out

    bad = tmp_path / "bad.cfg"
    bad.write_text("seed = 1\ndim = 9\n")
    assert main(["spectra", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["spectra", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_main_kind_mismatch_is_usage_error(tmp_path):
    path = tmp_path / "cfg.cfg"
    path.write_text(MINIMAL)
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_resource_guard_reports_hint():
    text = "seed = 1\ndim = 2\nbox.nodes = 100\n"
    with pytest.raises(ConfigError, match="reduce box.nodes"):
        run(parse_config(text), kind="spectra")
