import json
import math

import numpy as np
import pytest

from bfclab.cli import main
from bfclab.pipeline import (
    StageError,
    canonical_report_bytes,
    load_fixture_config,
    run_pipeline,
)


def test_capacity_command(capsys):
    assert main(["capacity", "--channel", "bsc:0.11"]) == 0
    out = capsys.readouterr().out.strip()
    assert float(out) == pytest.approx(1 - (-0.11 * math.log2(0.11) - 0.89 * math.log2(0.89)), abs=1e-6)


def test_capacity_bad_channel_exits_2(capsys):
    assert main(["capacity", "--channel", "nope:1"]) == 2


def test_logic_compile_parity(capsys):
    assert main(["logic", "compile", "--m", "3", "--formula", "p1 ^ p2 ^ p3"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["weight"] == 4
    assert payload["m"] == 3
    assert payload["index_convention"] == "eq-int-bigendian"


def test_logic_eval_and_equiv(capsys):
    assert main(["logic", "eval", "--m", "3", "--formula", "p1 | p3", "--assignment", "010"]) == 0
    assert capsys.readouterr().out.strip() == "0"
    assert main(
        ["logic", "equiv", "--m", "2", "--formula", "p1 -> p2", "--other", "!p1 | p2"]
    ) == 0
    assert capsys.readouterr().out.strip() == "equivalent"
    assert main(["logic", "dnf-bound", "--m", "4", "--formula", "(p1 & p2 & !p3) | p4"]) == 0
    assert capsys.readouterr().out.strip() == "16"


def test_scaling_csv_table(capsys):
    assert main(["scaling", "--capacity", "1", "--n-list", "10,20,40"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("case,weight_class,scaling")
    assert len(lines) == 1 + 6 * 3
    tags = {line.split(",")[2] for line in lines[1:]}
    assert tags == {"exponential", "sub-exponential", "polynomial", "quasi-linear", "linear"}


def test_family_and_gilbert_commands(tmp_path, capsys):
    fam_path = tmp_path / "fam.json"
    assert main(
        [
            "family", "--ground-size", "16", "--epsilon", "0.125", "--lam", "0.45",
            "--target", "8", "--seed", "1", "--out", str(fam_path),
        ]
    ) == 0
    d = json.loads(fam_path.read_text())
    assert d["ground_size"] == 16 and len(d["members"]) == 8

    g_path = tmp_path / "g.json"
    assert main(
        ["gilbert", "--length", "8", "--weight", "2", "--alpha", "0.5", "--out", str(g_path)]
    ) == 0
    d2 = json.loads(g_path.read_text())
    assert d2["length"] == 8 and len(d2["members"]) == 28


def test_build_eval_convert_roundtrip(tmp_path, capsys):
    code_path = tmp_path / "code.json"
    assert main(
        ["build", "--channel", "bsc:0.05", "--kind", "random", "--n", "5",
         "--M", "4", "--seed", "7", "--out", str(code_path)]
    ) == 0
    assert "delta=" in capsys.readouterr().out

    bundle = tmp_path / "bundle"
    cfg = load_fixture_config("identity-id")
    run_pipeline(cfg, bundle)
    assert main(["eval", "--bundle", str(bundle)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["lambda1_max"] == 0.0

    assert main(["convert-id", "--bundle", str(bundle)]) == 0
    idp = json.loads(capsys.readouterr().out)
    assert idp["misid_max"] == 0.0 and idp["alpha_computed"] == 0.0


def test_run_fixture_identity(tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main(["run", "--fixture", "identity-id", "--out-dir", str(out_dir)]) == 0
    report = json.loads((out_dir / "report.json").read_text())
    assert report["pass"] is True
    assert report["schema"] == "bfc-lab/1"
    assert report["errors"]["lambda1_max"] == 0.0
    assert report["errors"]["lambda2_max"] == 0.0
    for name in ("channel.json", "inner.json", "family.json", "functions.json",
                 "manifest.json", "report_pairs.csv"):
        assert (out_dir / name).exists()


def test_run_fixture_bsc_rank(tmp_path):
    out_dir = tmp_path / "out"
    assert main(["run", "--fixture", "bsc-rank", "--out-dir", str(out_dir)]) == 0
    report = json.loads((out_dir / "report.json").read_text())
    assert report["pass"] is True
    assert report["errors"]["lambda1_max"] <= report["bounds"]["lambda1"] + 1e-12
    assert report["errors"]["lambda2_max"] <= report["bounds"]["lambda2"] + 1e-12


def test_run_missing_config_exits_2(capsys):
    assert main(["run"]) == 2
    assert main(["run", "--fixture", "no-such", "--out-dir", "/tmp/x"]) == 2


def test_pipeline_size_mismatch_stage_error(tmp_path):
    cfg = load_fixture_config("identity-id")
    cfg = json.loads(json.dumps(cfg))
    cfg["family"]["target"] = 4  # fewer members than 2^m messages
    with pytest.raises(StageError, match="assemble: size mismatch"):
        run_pipeline(cfg, tmp_path / "out")


def test_pipeline_size_mismatch_exit_code(tmp_path):
    cfg = load_fixture_config("identity-id")
    cfg["family"]["target"] = 4
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(cfg_path), "--out-dir", str(tmp_path / "o")]) == 2


def test_pipeline_requires_seeds(tmp_path):
    cfg = load_fixture_config("identity-id")
    del cfg["evaluation"]["seed"]
    with pytest.raises(Exception, match="seed"):
        run_pipeline(cfg, tmp_path / "out")


def test_pipeline_reports_byte_identical(tmp_path):
    cfg = load_fixture_config("bsc-rank")
    r1 = run_pipeline(cfg, tmp_path / "a")
    r2 = run_pipeline(cfg, tmp_path / "b")
    assert canonical_report_bytes(r1, drop_timestamp=True) == canonical_report_bytes(
        r2, drop_timestamp=True
    )
    # and the pair CSVs match byte for byte
    assert (tmp_path / "a" / "report_pairs.csv").read_bytes() == (
        tmp_path / "b" / "report_pairs.csv"
    ).read_bytes()


def test_logic_formula_file(tmp_path, capsys):
    f = tmp_path / "phi.txt"
    f.write_text("p1 ^ p2 ^ p3\n")
    assert main(["logic", "compile", "--m", "3", "--formula-file", str(f)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["weight"] == 4
    assert main(["logic", "compile", "--m", "3"]) == 2  # neither source given


def test_scaling_single_case_json(capsys):
    assert main(
        ["scaling", "--capacity", "1", "--case", "4", "--b", "2",
         "--n-list", "10", "--format", "json", "--feasibility"]
    ) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 1
    assert rows[0]["converse_m"] == pytest.approx(100.0)
    assert "eq_m_ok" in rows[0]
