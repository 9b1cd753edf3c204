"""
Tests for the annealbench command-line tool: exit codes, result files and
sweep resumption.
"""

import json

import pytest

from annealbench import __version__
from cli.commands.sweep import execute_sweep
from cli.io.writer import ResultWriter, format_value, read_results_csv
from cli.main import main
from cli.models.cli_models import ExitCode, PointStatus, SweepManifest
from src.models import load_run_config


def last_error(capsys) -> dict:
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
    return json.loads(lines[-1])


class TestExitCodes:
    def test_unknown_config_key(self, tmp_path, capsys):
        config = tmp_path / "run.ini"
        config.write_text("[model]\np = 3\nbogus = 1\n", encoding="utf-8")
        code = main(["anneal", "--config", str(config), "--out", str(tmp_path / "out")])
        assert code == ExitCode.CONFIG
        error = last_error(capsys)
        assert error["error"] == "config_error"
        assert error["key"] == "model.bogus"

    def test_out_of_domain_value(self, tmp_path, capsys):
        code = main(["anneal", "--p", "1", "--out", str(tmp_path)])
        assert code == ExitCode.CONFIG
        assert last_error(capsys)["key"] == "model.p"

    def test_bad_flag_is_config_error(self, capsys):
        assert main(["anneal", "--n", "many"]) == ExitCode.CONFIG
        assert last_error(capsys)["error"] == "config_error"

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["anneal", "--config", str(tmp_path / "absent.ini")]) == ExitCode.CONFIG

    def test_classical_spectrum_needs_positive_temperature(self, tmp_path, capsys):
        code = main(["spectrum", "--kind", "classical", "--p", "3", "--n", "8", "--min", "0", "--max", "1", "--out", str(tmp_path)])
        assert code == ExitCode.CONFIG

    def test_numerical_failure(self, tmp_path, capsys):
        # γτ = 1 at the first τ is below the large-N branch of the implicit envelope
        args = ["--p", "3", "--C", "1", "--gamma", "1", "--alpha", "0.1", "--tau-min", "1", "--tau-max", "100"]
        assert main(["envelope", *args, "--out", str(tmp_path)]) == ExitCode.NUMERICAL
        assert last_error(capsys)["error"] == "domain_error"


class TestAnneal:
    def test_writes_csv_with_header(self, tmp_path):
        out = tmp_path / "out"
        code = main(["anneal", "--mode", "qa-rt", "--p", "3", "--n", "6", "--tau", "2", "--out", str(out)])
        assert code == ExitCode.OK
        lines = (out / "anneal.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == f"# annealbench {__version__}"
        assert lines[1].startswith("# config_sha256 ") and len(lines[1].split()[-1]) == 64
        assert lines[2].startswith("# config {")
        assert lines[3] == "p,J,N,mode,tau,eps_res,wall_time_s,start,end,m,m2"
        (row,) = read_results_csv(out / "anneal.csv")
        assert row["mode"] == "qa-rt" and row["N"] == "6"
        assert 0.0 <= float(row["eps_res"]) <= 1.0

    def test_timing_column_can_be_dropped(self, tmp_path):
        config = tmp_path / "run.ini"
        config.write_text("[run]\nmode = sa\n[model]\np = 2\nN = 6\n[schedule]\nstart = 2\nend = 0.5\ntau = 3\n[output]\ntiming = false\n", encoding="utf-8")
        assert main(["anneal", "--config", str(config), "--out", str(tmp_path)]) == ExitCode.OK
        (row,) = read_results_csv(tmp_path / "anneal.csv")
        assert "wall_time_s" not in row
        assert row["mode"] == "sa"

    def test_json_output_and_trajectory(self, tmp_path):
        code = main(
            ["anneal", "--mode", "qa-it", "--p", "2", "--n", "6", "--tau", "1", "--record", "--format", "json", "--out", str(tmp_path)]
        )
        assert code == ExitCode.OK
        document = json.loads((tmp_path / "anneal.json").read_text(encoding="utf-8"))
        assert document["version"] == __version__
        assert document["data"][0]["mode"] == "qa-it"
        trajectory = json.loads((tmp_path / "trajectory.json").read_text(encoding="utf-8"))
        assert trajectory["data"][0]["t"] == 0.0

    def test_runs_are_deterministic(self, tmp_path):
        args = ["anneal", "--mode", "sa", "--p", "3", "--n", "8", "--tau", "2", "--start", "2", "--end", "0.5"]
        assert main([*args, "--out", str(tmp_path / "a")]) == ExitCode.OK
        assert main([*args, "--out", str(tmp_path / "b")]) == ExitCode.OK
        (first,) = read_results_csv(tmp_path / "a" / "anneal.csv")
        (second,) = read_results_csv(tmp_path / "b" / "anneal.csv")
        first.pop("wall_time_s")
        second.pop("wall_time_s")
        assert first == second


class TestSweep:
    ARGS = ["sweep", "--mode", "qa-it", "--p", "3", "--n", "4,6", "--tau", "1,2", "--jobs", "1"]

    def test_writes_every_point(self, tmp_path):
        assert main([*self.ARGS, "--out", str(tmp_path)]) == ExitCode.OK
        rows = read_results_csv(tmp_path / "results.csv")
        assert [(r["N"], r["tau"]) for r in rows] == [("4", "1"), ("4", "2"), ("6", "1"), ("6", "2")]
        manifest = SweepManifest.model_validate_json((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        assert all(pt.status is PointStatus.DONE for pt in manifest.points)

    def test_resume_computes_only_pending(self, tmp_path):
        assert main([*self.ARGS, "--out", str(tmp_path)]) == ExitCode.OK
        path = tmp_path / "manifest.json"
        manifest = SweepManifest.model_validate_json(path.read_text(encoding="utf-8"))
        for point in manifest.points[2:]:
            point.status = PointStatus.PENDING
            point.record = None
        path.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")

        config = load_run_config(
            None, {"run": {"mode": "qa-it"}, "sweep": {"p": ["3"], "N": ["4", "6"], "tau": ["1", "2"]}}
        )
        writer = ResultWriter(tmp_path, config_sha256=config.sha256(), config_json=config.canonical_json())
        resumed, computed = execute_sweep(config, writer, workers=1)
        assert computed == 2
        assert len(read_results_csv(tmp_path / "results.csv")) == 4
        assert not resumed.pending()

    def test_changed_config_restarts(self, tmp_path):
        assert main([*self.ARGS, "--out", str(tmp_path)]) == ExitCode.OK
        config = load_run_config(None, {"run": {"mode": "qa-it"}, "sweep": {"p": ["3"], "N": ["4"], "tau": ["1"]}})
        writer = ResultWriter(tmp_path, config_sha256=config.sha256(), config_json=config.canonical_json())
        _, computed = execute_sweep(config, writer, workers=1)
        assert computed == 1

    def test_partial_failure(self, tmp_path, capsys):
        code = main(["sweep", "--mode", "qa-rt", "--p", "3", "--n", "4", "--tau", "1", "--start", "2,-1", "--jobs", "1", "--out", str(tmp_path)])
        assert code == ExitCode.PARTIAL
        assert last_error(capsys)["error"] == "partial_sweep_failure"
        manifest = SweepManifest.model_validate_json((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        (failed,) = manifest.failed()
        assert failed.error == "domain_error"
        assert len(read_results_csv(tmp_path / "results.csv")) == 1


class TestOtherCommands:
    def test_spectrum(self, tmp_path):
        code = main(["spectrum", "--p", "2", "--n", "8", "--k", "3", "--min", "0.5", "--max", "1.5", "--points", "5", "--out", str(tmp_path)])
        assert code == ExitCode.OK
        rows = read_results_csv(tmp_path / "spectrum.csv")
        assert len(rows) == 5
        assert list(rows[0]) == ["gamma", "E0", "E1", "E2"]

    def test_envelope_from_constants(self, tmp_path):
        code = main(
            ["envelope", "--p", "2", "--C", "1", "--gamma", "1", "--z", "0.3333333333333333", "--tau-min", "1", "--tau-max", "100", "--points", "3", "--out", str(tmp_path)]
        )
        assert code == ExitCode.OK
        rows = read_results_csv(tmp_path / "envelope.csv")
        assert float(rows[0]["eps_env"]) == pytest.approx(0.40988, rel=1e-3)

    def test_oracle_check(self, tmp_path):
        code = main(["oracle-check", "--n", "5", "--p", "3", "--mode", "qa-rt", "--out", str(tmp_path)])
        assert code == ExitCode.OK
        (row,) = read_results_csv(tmp_path / "oracle.csv")
        assert row["passed"] == "true"


@pytest.mark.parametrize(
    "value, text",
    [(0.1, "0.10000000000000001"), (True, "true"), (None, ""), (3, "3")],
)
def test_format_value(value, text):
    assert format_value(value) == text
