from __future__ import annotations

import json

import numpy as np
import pytest

import dsi
from dsi import cli
from util import GOLDEN, SYNTH4, make_dataset, random_dataset

ROOT = str(SYNTH4)


def run(capsys, *argv):
    code = cli.run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- vcr ---------------------------------------------------------------------

def test_vcr_stdout_matches_golden(capsys):
    code, out, err = run(capsys, "vcr", ROOT, "--eps", "0.05")
    assert code == 0
    assert out == (GOLDEN / "synth4_vcr.md").read_text()
    assert err == ""


def test_vcr_negative_eps_is_usage_error(capsys):
    code, out, err = run(capsys, "vcr", ROOT, "--eps", "-1")
    assert code == 2
    assert "usage:" in err
    assert out == ""


def test_vcr_all_formats(capsys):
    for fmt in ("csv", "json", "markdown"):
        code, out, _ = run(capsys, "vcr", ROOT, "--format", fmt)
        assert code == 0 and out


def test_vcr_adaptive(capsys):
    code, out, _ = run(capsys, "vcr", ROOT, "--adaptive", "--alpha", "0.5",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["eps_policy"]["kind"] == "adaptive"


def test_vcr_out_file_matches_stdout(tmp_path, capsys):
    out_path = tmp_path / "report.md"
    code, out, _ = run(capsys, "vcr", ROOT, "--out", str(out_path))
    assert code == 0
    assert out == ""
    assert out_path.read_text() == (GOLDEN / "synth4_vcr.md").read_text()


# --- simmat / hint -------------------------------------------------------------

def test_simmat_missing_dir_is_io_error(capsys):
    code, out, err = run(capsys, "simmat", "does-not-exist")
    assert code == 3
    assert "I/O error" in err


def test_simmat_csv(capsys):
    code, out, _ = run(capsys, "simmat", ROOT, "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "Class,ferns,mosses,palms,reeds"


def test_hint(capsys):
    code, out, _ = run(capsys, "hint", ROOT, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "SimpleClassifierSufficient"  # fixture classes sit far apart
    assert doc["thresholds"]["note"] == "heuristic"


def test_hint_threshold_validation(capsys):
    code, _, err = run(capsys, "hint", ROOT, "--low", "0.5", "--high", "0.1")
    assert code == 2


# --- validate --------------------------------------------------------------------

def test_validate_clean(capsys):
    code, out, _ = run(capsys, "validate", ROOT)
    assert code == 0
    assert "no violations" in out


def test_validate_broken_archive_exits_one(tmp_path, capsys):
    (tmp_path / "manifest.json").write_text(
        json.dumps({"dimension": 3, "classes": [{"name": "a", "file": "a.npy"}]})
    )
    code, out, _ = run(capsys, "validate", str(tmp_path), "--format", "json")
    assert code == 1
    doc = json.loads(out)
    assert doc["ok"] is False
    assert doc["violations"][0]["code"] == "ManifestClassFileMissing"


# --- prune / apply-prune ------------------------------------------------------------

def test_prune_defaults_to_json_manifest(tmp_path, capsys):
    manifest_path = tmp_path / "manifest.json"
    code, out, _ = run(capsys, "prune", ROOT, "--out", str(manifest_path))
    assert code == 0
    doc = json.loads(manifest_path.read_text())
    assert doc["totals"] == {"original": 75, "optimized": 33}


def test_prune_apply_prune_flow(tmp_path, capsys):
    manifest_path = tmp_path / "prune.json"
    out_dir = tmp_path / "optimized"
    code, _, _ = run(capsys, "prune", ROOT, "--out", str(manifest_path))
    assert code == 0
    code, out, _ = run(capsys, "apply-prune", ROOT, "--manifest", str(manifest_path),
                       "--out", str(out_dir))
    assert code == 0
    assert "wrote 33 samples in 4 classes" in out

    report = dsi.dataset_vcr(dsi.load_dataset(out_dir), 0.05)
    assert all(r.vcr == 1.0 for r in report.classes)


def test_apply_prune_bad_manifest_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = run(capsys, "apply-prune", ROOT, "--manifest", str(bad),
                       "--out", str(tmp_path / "out"))
    assert code == 1
    assert "InvariantViolation" in err


def test_apply_prune_missing_manifest_file(tmp_path, capsys):
    code, _, err = run(capsys, "apply-prune", ROOT, "--manifest",
                       str(tmp_path / "none.json"), "--out", str(tmp_path / "out"))
    assert code == 3


# --- sweep ----------------------------------------------------------------------

def test_sweep(capsys):
    code, out, _ = run(capsys, "sweep", ROOT, "--class", "ferns",
                       "--grid", "0.01:0.05:0.01", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "class,eps,clusters,vcr"
    assert len(lines) == 6  # header + inclusive five-point grid


def test_sweep_unknown_class(capsys):
    code, _, err = run(capsys, "sweep", ROOT, "--class", "nope", "--grid", "0.01:0.1:0.01")
    assert code == 2
    assert "nope" in err


@pytest.mark.parametrize("grid", ["0.1:0.2", "a:b:c", "0:0.1:0.01", "0.2:0.1:0.01"])
def test_sweep_bad_grid(capsys, grid):
    code, _, _ = run(capsys, "sweep", ROOT, "--class", "ferns", "--grid", grid)
    assert code == 2


# --- argument handling ----------------------------------------------------------

def test_unknown_command(capsys):
    assert run(capsys, "frobnicate", ROOT)[0] == 2


def test_missing_command(capsys):
    assert run(capsys, )[0] == 2


def test_error_output_has_no_traceback(tmp_path, capsys):
    code, _, err = run(capsys, "vcr", str(tmp_path))  # empty dir, no manifest
    assert code == 1
    assert "Traceback" not in err
    assert "ManifestMissing" in err


def test_content_error_names_class_and_row(tmp_path, capsys):
    values = np.ones((3, 3))
    values[2, 0] = np.nan
    ds = make_dataset([("ok", np.eye(3))])
    dsi.write_dataset(ds, tmp_path)
    from dsi.feature_store import serialize_array
    raw = np.ones((3, 3))
    raw[2, 0] = np.inf
    (tmp_path / "bad.npy").write_bytes(serialize_array(raw))
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    manifest["classes"].append({"name": "bad", "file": "bad.npy"})
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))

    code, _, err = run(capsys, "vcr", str(tmp_path))
    assert code == 1
    assert "'bad'" in err and "row 2" in err


def test_stdout_is_deterministic_in_process(capsys, rng):
    first = run(capsys, "vcr", ROOT, "--adaptive", "--format", "json")
    second = run(capsys, "vcr", ROOT, "--adaptive", "--format", "json")
    assert first == second


@pytest.mark.parametrize("fmt", ["csv", "json", "markdown"])
def test_every_subcommand_honors_format(tmp_path, capsys, fmt):
    manifest_path = tmp_path / "m.json"
    assert run(capsys, "prune", ROOT, "--out", str(manifest_path))[0] == 0
    invocations = [
        ("validate", ROOT),
        ("simmat", ROOT),
        ("vcr", ROOT),
        ("prune", ROOT),
        ("sweep", ROOT, "--class", "ferns", "--grid", "0.01:0.05:0.02"),
        ("hint", ROOT),
        ("apply-prune", ROOT, "--manifest", str(manifest_path),
         "--out", str(tmp_path / f"out-{fmt}")),
    ]
    for argv in invocations:
        code, out, err = run(capsys, *argv, "--format", fmt)
        assert code == 0, (argv, err)
        assert out


def test_simmat_markdown_labels_the_quantity(capsys):
    code, out, _ = run(capsys, "simmat", ROOT)
    assert code == 0
    assert "Cosine distance (lower = more similar)" in out
