from __future__ import annotations

import json

import numpy as np
import pytest

import dsi
from dsi.analysis import Verdict
from oracles import connected_components_naive, distance_matrix_naive
from util import GOLDEN, make_class, random_dataset, table1_matrix


# --- sweep ------------------------------------------------------------------

def test_identical_class_constant_ratio():
    cfs = make_class("x", [[1.0, 1.0]] * 10)
    curve = dsi.sweep(cfs, [0.01, 0.05, 0.1, 0.2])
    assert all(p.vcr == 0.1 for p in curve.points)
    assert curve.class_name == "x"


def test_distant_class_constant_full_ratio():
    cfs = make_class("x", np.eye(4))
    curve = dsi.sweep(cfs, [0.01, 0.05, 0.2])  # grid below every pairwise distance
    assert all(p.vcr == 1.0 for p in curve.points)


def test_matches_per_point_oracle(rng):
    vectors = rng.normal(size=(30, 5))
    cfs = make_class("x", vectors)
    grid = [round(0.01 * k, 10) for k in range(1, 31)]
    curve = dsi.sweep(cfs, grid)
    dist = distance_matrix_naive(vectors)
    for point in curve.points:
        expected = len(set(connected_components_naive(dist, point.eps)))
        assert point.cluster_count == expected
        assert point.vcr == expected / 30
    ratios = [p.vcr for p in curve.points]
    assert all(a >= b for a, b in zip(ratios, ratios[1:]))
    assert [p.eps for p in curve.points] == grid


def test_grid_must_be_increasing():
    cfs = make_class("x", np.eye(3))
    with pytest.raises(dsi.UsageError):
        dsi.sweep(cfs, [0.2, 0.1])
    with pytest.raises(dsi.UsageError):
        dsi.sweep(cfs, [0.0, 0.1])


def test_empty_grid_renders_cleanly():
    cfs = make_class("x", np.eye(3))
    curve = dsi.sweep(cfs, [])
    assert curve.points == []
    assert dsi.render_report(curve, "markdown") == "| eps | Clusters | VCR |\n|---:|---:|---:|\n"
    assert dsi.render_report(curve, "csv") == "class,eps,clusters,vcr\n"
    parsed = json.loads(dsi.render_report(curve, "json"))
    assert parsed["points"] == []


# --- model hint ----------------------------------------------------------------

def test_well_separated_pair_suggests_simple_classifier():
    m = dsi.SimilarityMatrix(["a", "b"], np.array([[0.0, 0.188], [0.188, 0.0]]))
    hint = dsi.model_hint(m)
    assert hint.verdict is Verdict.SIMPLE
    assert hint.min_offdiag == 0.188


def test_confusable_matrix_suggests_deep_model():
    hint = dsi.model_hint(table1_matrix())
    assert hint.verdict is Verdict.DEEP
    assert hint.min_offdiag == 0.0292
    assert hint.most_confusable_pair == ("Truck", "Van")


def test_orthogonal_pair_suggests_simple_classifier():
    m = dsi.SimilarityMatrix(["a", "b"], np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert dsi.model_hint(m).verdict is Verdict.SIMPLE


def test_intermediate_separation_suggests_standard():
    m = dsi.SimilarityMatrix(["a", "b"], np.array([[0.0, 0.1], [0.1, 0.0]]))
    assert dsi.model_hint(m).verdict is Verdict.STANDARD


def test_thresholds_are_inclusive():
    low = dsi.SimilarityMatrix(["a", "b"], np.array([[0.0, 0.05], [0.05, 0.0]]))
    high = dsi.SimilarityMatrix(["a", "b"], np.array([[0.0, 0.15], [0.15, 0.0]]))
    assert dsi.model_hint(low).verdict is Verdict.DEEP
    assert dsi.model_hint(high).verdict is Verdict.SIMPLE


def test_single_class_rejected():
    m = dsi.SimilarityMatrix(["only"], np.zeros((1, 1)))
    with pytest.raises(dsi.SingleClass):
        dsi.model_hint(m)


def test_threshold_validation():
    m = table1_matrix()
    with pytest.raises(dsi.UsageError):
        dsi.model_hint(m, low=0.2, high=0.1)
    with pytest.raises(dsi.UsageError):
        dsi.model_hint(m, low=0.0, high=0.1)


def test_verdict_invariant_under_class_permutation(rng):
    m = table1_matrix()
    base = dsi.model_hint(m).verdict
    for _ in range(10):
        order = rng.permutation(4)
        permuted = dsi.SimilarityMatrix(
            [m.class_names[i] for i in order], m.entries[np.ix_(order, order)]
        )
        hint = dsi.model_hint(permuted)
        assert hint.verdict is base
        assert hint.min_offdiag == 0.0292
        assert set(hint.most_confusable_pair) == {"Truck", "Van"}


# --- rendering --------------------------------------------------------------------

def single_class_report(name: str, samples: int, clusters: int) -> dsi.VcrReport:
    return dsi.VcrReport(
        classes=[dsi.ClassVcr(name, samples, clusters, clusters / samples, 0.05)],
        eps_policy={"kind": "fixed", "eps": 0.05},
        total_samples=samples,
        total_clusters=clusters,
        dataset_vcr=clusters / samples,
    )


def test_markdown_row_layout():
    text = dsi.render_report(single_class_report("beagle", 195, 195), "markdown")
    assert "beagle | 1.000000" in text


def test_markdown_matches_reviewed_golden():
    report = dsi.VcrReport(
        classes=[
            dsi.ClassVcr("Chihuahua", 152, 151, 151 / 152, 0.05),
            dsi.ClassVcr("Japanese_spaniel", 185, 157, 157 / 185, 0.05),
            dsi.ClassVcr("beagle", 195, 195, 1.0, 0.05),
        ],
        eps_policy={"kind": "fixed", "eps": 0.05},
        total_samples=532,
        total_clusters=503,
        dataset_vcr=503 / 532,
    )
    golden = (GOLDEN / "appendix_vcr.md").read_text()
    assert dsi.render_report(report, "markdown") == golden


def test_matrix_csv_matches_reviewed_golden():
    golden = (GOLDEN / "table1.csv").read_text()
    assert dsi.render_report(table1_matrix(), "csv") == golden


def test_matrix_csv_layout_has_header_row_and_column():
    text = dsi.render_report(table1_matrix(), "csv")
    lines = text.splitlines()
    assert lines[0] == "Class,Bus,Car,Truck,Van"
    assert lines[1].startswith("Bus,0.000000,")


def test_json_roundtrips_every_report_type(rng, synth4):
    simmat = dsi.similarity_matrix(synth4)
    report = dsi.dataset_vcr(synth4, 0.05)
    manifest = dsi.prune(synth4, 0.05)
    curve = dsi.sweep(synth4.classes[0], [0.01, 0.05, 0.1])
    hint = dsi.model_hint(simmat)

    for obj, reader in [
        (simmat, dsi.SimilarityMatrix.from_json_dict),
        (report, dsi.VcrReport.from_json_dict),
        (manifest, dsi.PruneManifest.from_json_dict),
        (curve, dsi.SweepCurve.from_json_dict),
        (hint, dsi.ModelHint.from_json_dict),
    ]:
        text = dsi.render_report(obj, "json")
        assert reader(json.loads(text)) == obj


def test_rendering_is_deterministic(synth4):
    report = dsi.dataset_vcr(synth4, 0.05)
    for fmt in ("csv", "json", "markdown"):
        assert dsi.render_report(report, fmt) == dsi.render_report(report, fmt)


def test_csv_uses_lf_line_endings(synth4):
    text = dsi.render_report(dsi.dataset_vcr(synth4, 0.05), "csv")
    assert "\r" not in text
    assert text.endswith("\n")


def test_markdown_escapes_pipes():
    report = single_class_report("odd|name", 2, 1)
    assert "odd\\|name" in dsi.render_report(report, "markdown")


def test_unknown_format_rejected(synth4):
    with pytest.raises(dsi.UsageError):
        dsi.render_report(dsi.dataset_vcr(synth4, 0.05), "yaml")


def test_unknown_object_rejected():
    with pytest.raises(dsi.UsageError):
        dsi.render_report(object(), "json")


def test_validation_report_renders(tmp_path, rng):
    ds = random_dataset(rng, 2, 4, 3)
    dsi.write_dataset(ds, tmp_path)
    report = dsi.validate(tmp_path)
    assert "no violations" in dsi.render_report(report, "markdown")
    parsed = json.loads(dsi.render_report(report, "json"))
    assert parsed["ok"] is True


def test_prune_markdown_has_totals(synth4):
    text = dsi.render_report(dsi.prune(synth4, 0.05), "markdown")
    assert "Total: 75 -> 33 samples" in text
