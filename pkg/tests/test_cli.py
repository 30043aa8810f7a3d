import csv
import io
import json
import math
from pathlib import Path

import pytest

from bergmanlab.cli import build_parser, full_help, main

GOLDEN = Path(__file__).parent / "golden" / "help.txt"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_help_matches_golden_file():
    assert full_help() == GOLDEN.read_text(encoding="utf-8")


def test_help_enumerates_every_subcommand():
    text = full_help()
    for name in ("verify", "curvature", "moments", "kernel-eval", "repcoords", "support-reach", "examples"):
        assert f"=== {name} ===" in text


def test_unknown_flag_is_a_usage_error(capsys):
    code, _, err = run(capsys, "curvature", "--bogus")
    assert code == 2
    assert "unrecognized arguments" in err


def test_seed_must_fit_in_64_bits(capsys):
    assert run(capsys, "curvature", "--seed", str(2**64))[0] == 2
    assert build_parser().parse_args(["curvature", "--seed", "0xff"]).seed == 255


def test_verify_builtin_seed_7(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--suite", "builtin", "--seed", "7", "--out", str(tmp_path))
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["schema"] == 1
    assert report["master_seed"] == 7
    assert report["passed"]
    assert (tmp_path / "timings.json").exists()
    assert (tmp_path / "report.csv").read_text().startswith("scenario,")
    assert "scenarios passed" in out


def test_verify_is_byte_reproducible(tmp_path, capsys):
    args = ["verify", "--only", "ball-curvature-n2", "moment-identity-ball-n1", "--seed", "11"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"))[0] == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_verify_tolerance_override_can_fail(tmp_path, capsys):
    code, _, _ = run(capsys, "verify", "--only", "stirling-mu2", "--tolerance", "error=1e-9",
                     "--out", str(tmp_path))
    assert code == 1


def test_verify_bad_tolerance_syntax(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "--only", "stirling-mu2", "--tolerance", "gap", "--out", str(tmp_path))
    assert code == 2
    assert "STAT=VALUE" in err


def test_verify_scenario_file(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps([{"name": "x", "kind": "stirling-limit"}]))
    code, _, err = run(capsys, "verify", "--scenarios", str(path), "--out", str(tmp_path))
    assert code == 2
    assert "missing fields" in err


def test_verify_list(capsys):
    code, out, _ = run(capsys, "verify", "--list")
    assert code == 0
    assert "annulus-curvature\tcurvature-constancy\tnegative-control" in out


def test_curvature_ball(capsys):
    code, out, _ = run(capsys, "curvature", "--domain", "ball", "--n", "2", "--samples", "100", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert len(data["samples"]) == 100
    assert all(abs(s["H"] + 2 / 3) < 1e-10 for s in data["samples"])
    assert data["seed"] == 0x423352474D414E


def test_moments_csv_diagonal(capsys):
    code, out, _ = run(capsys, "moments", "--domain", "ball", "--n", "1", "--max-degree", "3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    diag = [float(r["re"]) for r in rows if r["alpha"] == r["beta"]]
    assert diag == pytest.approx([math.pi, math.pi / 2, math.pi / 3, math.pi / 4], rel=1e-13)
    assert all(r["re"] == format(float(r["re"]), ".17g") for r in rows)


def test_out_directory_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("BERGMANLAB_OUT", str(tmp_path))
    assert run(capsys, "moments", "--max-degree", "1")[0] == 0
    assert (tmp_path / "moments.csv").exists()
    assert json.loads((tmp_path / "moments.json").read_text())["schema"] == 1


def test_data_files_are_reproducible(tmp_path, capsys):
    for d in ("a", "b"):
        assert run(capsys, "moments", "--engine", "mc", "--samples", "5000", "--seed", "3",
                   "--out", str(tmp_path / d))[0] == 0
    assert (tmp_path / "a" / "moments.csv").read_bytes() == (tmp_path / "b" / "moments.csv").read_bytes()


def test_kernel_eval(capsys):
    code, out, _ = run(capsys, "kernel-eval", "--kernel", "ball", "--z", "0.5", "--format", "json")
    assert code == 0
    assert json.loads(out)["value"] == {"re": pytest.approx(16 / (9 * math.pi), rel=1e-15), "im": 0}


def test_kernel_eval_outside_domain(capsys):
    code, _, err = run(capsys, "kernel-eval", "--kernel", "annulus", "--z", "0.3")
    assert code == 2
    assert "outside" in err


def test_kernel_eval_bad_point(capsys):
    assert run(capsys, "kernel-eval", "--z", "zero")[0] == 2


def test_repcoords_base_point_maps_to_zero(capsys):
    code, out, _ = run(capsys, "repcoords", "--p", "0.5", "--z", "0.5", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["T_p(z)"] == [{"re": 0, "im": 0}]
    assert data["in_ellipsoid"]


def test_support_reach(capsys):
    code, out, _ = run(capsys, "support-reach", "--domain", "scaled-ball", "--radius", "0.8", "--format", "json")
    assert code == 0
    assert json.loads(out)["estimate"] <= 0.82


def test_examples(capsys):
    code, out, _ = run(capsys, "examples")
    assert code == 0
    assert "5/5 scenarios passed" in out
