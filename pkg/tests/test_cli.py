import json
import math
from pathlib import Path

import pytest

from modlab.cli import main

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRingModulus:
    def test_small_grid_passes(self, capsys):
        code, out, _ = run_cli(capsys, "ring-modulus", "--r1", "0.5", "--r2", "1.5",
                               "--grid", "40x96")
        assert code == 0
        data = json.loads(out)
        assert data["schema_version"] == 1
        assert data["exact"] == pytest.approx(6.59352, abs=1e-4)
        assert data["relative_error"] < 0.05

    def test_bad_grid_spec(self, capsys):
        code, _, err = run_cli(capsys, "ring-modulus", "--r1", "0.5", "--r2", "1.5",
                               "--grid", "banana")
        assert code == 2
        assert "config error" in err


class TestCircleFamily:
    def test_unit_field(self, capsys):
        code, out, _ = run_cli(capsys, "circle-family", "--r1", "0.5", "--r2", "1.5",
                               "--q", "const:1", "--n-circles", "32")
        assert code == 0
        data = json.loads(out)
        assert data["discrete"] == pytest.approx(data["reference"], rel=0.02)

    def test_unknown_field(self, capsys):
        code, _, err = run_cli(capsys, "circle-family", "--r1", "0.5", "--r2", "1.5",
                               "--q", "gamma:7")
        assert code == 2


class TestQnorm:
    def test_csv_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "qnorm", "--q", "const:1", "--r1", "0.5",
                               "--r2", "1.5", "--samples", "8", "--out", "csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "r,qnorm"
        r, v = map(float, lines[1].split(","))
        assert v == pytest.approx(2 * math.pi * math.sinh(r), rel=1e-9)

    def test_json_file(self, capsys, tmp_path):
        out_file = tmp_path / "prof.json"
        code, _, _ = run_cli(capsys, "qnorm", "--q", "const:1", "--r1", "0.5",
                             "--r2", "1.5", "--samples", "8", "--out", "json",
                             "--out-file", str(out_file))
        assert code == 0
        data = json.loads(out_file.read_text())
        assert len(data["radii"]) == 8


class TestCriteriaCommands:
    def test_fmo_verdict(self, capsys):
        code, out, _ = run_cli(capsys, "fmo", "--q", "inv-r", "--eps-count", "8")
        assert code == 0
        assert json.loads(out)["verdict"] == "not_fmo"

    def test_divergence_verdict(self, capsys):
        code, out, _ = run_cli(capsys, "divergence", "--q", "const:1", "--r2", "1.5")
        assert code == 0
        assert json.loads(out)["verdict"] == "diverges"


class TestDirichlet:
    def test_svg_written(self, capsys, tmp_path):
        out_file = tmp_path / "dom.svg"
        code, out, _ = run_cli(capsys, "dirichlet", "--group",
                               str(CONFIG_DIR / "groups" / "cyclic.json"),
                               "--rays", "90", "--out-file", str(out_file))
        assert code == 0
        text = out_file.read_text()
        assert text.startswith("<svg")
        assert "polyline" in text


class TestDistortion:
    def test_csv_and_summary(self, capsys, tmp_path):
        out_file = tmp_path / "d.csv"
        code, out, _ = run_cli(capsys, "distortion", "--map", "winding:3",
                               "--grid", "17", "--out", "csv", "--out-file", str(out_file))
        assert code == 0
        assert out_file.read_text().startswith("re,im,abs_fz,abs_fzbar,K,J")
        summary = json.loads(out.splitlines()[-1] if out.strip().startswith("{") else out[out.index("{"):])
        assert summary["finite_distortion"]["passed"]

    def test_unknown_map(self, capsys):
        code, _, err = run_cli(capsys, "distortion", "--map", "teleport:9")
        assert code == 2


class TestVerifyAndSuite:
    def test_verify_lower_q(self, capsys, tmp_path):
        code, out, _ = run_cli(capsys, "verify", "lower-q", "--config",
                               str(CONFIG_DIR / "experiments" / "lower_q_winding2.json"),
                               "--out-dir", str(tmp_path))
        assert code == 0
        data = json.loads(out)
        assert data["passed"]
        assert (tmp_path / "lower_q_winding2.json").exists()

    def test_verify_kind_mismatch(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "verify", "boundary-ext", "--config",
                               str(CONFIG_DIR / "experiments" / "lower_q_winding2.json"),
                               "--out-dir", str(tmp_path))
        assert code == 2

    def test_verify_missing_config(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "verify", "lower-q", "--config",
                               str(tmp_path / "nope.json"))
        assert code == 2

    def test_suite_missing_dir(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "suite", str(tmp_path / "absent"))
        assert code == 2

    def test_suite_empty_dir(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, "suite", str(tmp_path), "--out-dir",
                             str(tmp_path / "results"))
        assert code == 0
        report = json.loads((tmp_path / "results" / "suite_report.json").read_text())
        assert report["records"] == []

    def test_suite_isolates_bad_config(self, capsys, tmp_path):
        good = json.loads((CONFIG_DIR / "experiments" / "boundary_winding3.json").read_text())
        (tmp_path / "good.json").write_text(json.dumps(good))
        (tmp_path / "bad.json").write_text("{nope")
        code, _, _ = run_cli(capsys, "suite", str(tmp_path), "--out-dir",
                             str(tmp_path / "results"))
        assert code == 1
        report = json.loads((tmp_path / "results" / "suite_report.json").read_text())
        statuses = {r["experiment_id"]: r["status"] for r in report["records"]}
        assert statuses["boundary_winding3"] == "ok"
        assert statuses["bad"] == "config_error"
