"""Threshold sweeps, model-choice hints, and report rendering.

Reports render to three formats: ``markdown`` (human tables, VCR in the
index/class/value layout), ``csv`` (flat data, 6-decimal floats, LF line
endings), and ``json`` (schema-stable, full float precision so a parsed
report reproduces the original object exactly).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum

from .clustering import DEFAULT_DENSE_CAP
from .errors import InvariantViolation, SingleClass, UsageError
from .feature_store import ClassFeatureSet, ValidationReport
from .metrics import SimilarityMatrix
from .vcr import PruneManifest, VcrReport, class_vcr

FORMATS = ("csv", "json", "markdown")

DEFAULT_HINT_LOW = 0.05
DEFAULT_HINT_HIGH = 0.15


@dataclass
class SweepPoint:
    eps: float
    vcr: float
    cluster_count: int


@dataclass
class SweepCurve:
    """VCR as a function of the threshold for one class."""

    class_name: str
    points: list[SweepPoint]

    def to_json_dict(self) -> dict:
        return {
            "class": self.class_name,
            "points": [
                {"eps": p.eps, "vcr": p.vcr, "clusters": p.cluster_count}
                for p in self.points
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SweepCurve":
        try:
            return cls(
                doc["class"],
                [SweepPoint(p["eps"], p["vcr"], p["clusters"]) for p in doc["points"]],
            )
        except (KeyError, TypeError) as exc:
            raise InvariantViolation(f"malformed sweep JSON: {exc}") from None


class Verdict(str, Enum):
    SIMPLE = "SimpleClassifierSufficient"
    STANDARD = "StandardCnn"
    DEEP = "DeepCnnRecommended"


@dataclass
class ModelHint:
    """Heuristic model-capacity suggestion derived from class separation."""

    verdict: Verdict
    min_offdiag: float
    mean_offdiag: float
    most_confusable_pair: tuple[str, str]
    low: float
    high: float

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "evidence": {
                "min_offdiag": self.min_offdiag,
                "mean_offdiag": self.mean_offdiag,
                "most_confusable_pair": list(self.most_confusable_pair),
            },
            "thresholds": {"low": self.low, "high": self.high, "note": "heuristic"},
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ModelHint":
        try:
            ev, th = doc["evidence"], doc["thresholds"]
            return cls(
                Verdict(doc["verdict"]),
                ev["min_offdiag"],
                ev["mean_offdiag"],
                tuple(ev["most_confusable_pair"]),
                th["low"],
                th["high"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvariantViolation(f"malformed model hint JSON: {exc}") from None


def sweep(cfs: ClassFeatureSet, eps_values, metric: str = "cosine",
          dense_cap: int = DEFAULT_DENSE_CAP) -> SweepCurve:
    """Evaluate the class VCR at each threshold of an increasing grid."""
    values = [float(e) for e in eps_values]
    for i, e in enumerate(values):
        if e <= 0:
            raise UsageError(f"grid values must be positive, got {e}")
        if i and e <= values[i - 1]:
            raise UsageError("grid values must be strictly increasing")
    points = []
    for e in values:
        clusters, ratio = class_vcr(cfs, e, metric, dense_cap)
        points.append(SweepPoint(e, ratio, clusters))
    return SweepCurve(cfs.class_name, points)


def model_hint(simmat: SimilarityMatrix, low: float = DEFAULT_HINT_LOW,
               high: float = DEFAULT_HINT_HIGH) -> ModelHint:
    """Map the smallest inter-class distance onto a capacity verdict.

    Classes at or below ``low`` are confusable enough to recommend a
    deep model; at or above ``high`` they are separated enough that a
    simple classifier on the features should suffice. The thresholds are
    heuristic calibration points, exposed as configuration.
    """
    if len(simmat.class_names) < 2:
        raise SingleClass("a model hint needs at least two classes")
    if not (0 < low < high):
        raise UsageError(f"need 0 < low < high, got low={low}, high={high}")
    min_offdiag, pair = simmat.min_off_diagonal()
    if min_offdiag >= high:
        verdict = Verdict.SIMPLE
    elif min_offdiag <= low:
        verdict = Verdict.DEEP
    else:
        verdict = Verdict.STANDARD
    return ModelHint(verdict, min_offdiag, simmat.mean_off_diagonal(), pair, low, high)


# --- rendering ----------------------------------------------------------

def _f6(x: float) -> str:
    return f"{x:.6f}"


def _md_escape(s: str) -> str:
    return s.replace("|", "\\|")


def _md_table(header: list[str], aligns: str, rows: list[list[str]]) -> list[str]:
    sep = {"l": "---", "r": "---:"}
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join(sep[a] for a in aligns) + "|",
    ]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return lines


def _csv_text(rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _render_vcr(report: VcrReport, fmt: str) -> str:
    if fmt == "json":
        return _json_text(report.to_json_dict())
    if fmt == "csv":
        rows = [["class", "samples", "clusters", "vcr", "eps"]]
        rows += [[c.class_name, c.sample_count, c.cluster_count, _f6(c.vcr), _f6(c.eps)]
                 for c in report.classes]
        return _csv_text(rows)
    rows = [[str(i + 1), _md_escape(c.class_name), _f6(c.vcr)]
            for i, c in enumerate(report.classes)]
    return "\n".join(_md_table(["#", "Class", "VCR"], "rlr", rows)) + "\n"


def _render_simmat(simmat: SimilarityMatrix, fmt: str) -> str:
    if fmt == "json":
        return _json_text(simmat.to_json_dict())
    names = simmat.class_names
    if fmt == "csv":
        rows = [["Class", *names]]
        rows += [[name, *(_f6(v) for v in simmat.entries[i])]
                 for i, name in enumerate(names)]
        return _csv_text(rows)
    rows = [[_md_escape(name), *(_f6(v) for v in simmat.entries[i])]
            for i, name in enumerate(names)]
    header = ["Class", *(_md_escape(n) for n in names)]
    lines = _md_table(header, "l" + "r" * len(names), rows)
    lines += ["", "Cosine distance (lower = more similar)"]
    return "\n".join(lines) + "\n"


def _render_sweep(curve: SweepCurve, fmt: str) -> str:
    if fmt == "json":
        return _json_text(curve.to_json_dict())
    if fmt == "csv":
        rows = [["class", "eps", "clusters", "vcr"]]
        rows += [[curve.class_name, _f6(p.eps), p.cluster_count, _f6(p.vcr)]
                 for p in curve.points]
        return _csv_text(rows)
    rows = [[_f6(p.eps), str(p.cluster_count), _f6(p.vcr)] for p in curve.points]
    return "\n".join(_md_table(["eps", "Clusters", "VCR"], "rrr", rows)) + "\n"


def _render_prune(manifest: PruneManifest, fmt: str) -> str:
    if fmt == "json":
        return _json_text(manifest.to_json_dict())
    if fmt == "csv":
        rows = [["class", "samples", "kept", "removed", "eps"]]
        rows += [[c.class_name, len(c.kept) + len(c.removed), len(c.kept),
                  len(c.removed), _f6(c.eps)] for c in manifest.classes]
        return _csv_text(rows)
    rows = [[_md_escape(c.class_name), str(len(c.kept) + len(c.removed)),
             str(len(c.kept)), str(len(c.removed)), _f6(c.eps)]
            for c in manifest.classes]
    table = _md_table(["Class", "Samples", "Kept", "Removed", "eps"], "lrrrr", rows)
    table.append("")
    table.append(f"Total: {manifest.original_total} -> {manifest.optimized_total} samples")
    return "\n".join(table) + "\n"


def _render_hint(hint: ModelHint, fmt: str) -> str:
    if fmt == "json":
        return _json_text(hint.to_json_dict())
    pair = " / ".join(hint.most_confusable_pair)
    if fmt == "csv":
        rows = [
            ["verdict", "min_offdiag", "mean_offdiag", "pair_a", "pair_b", "low", "high"],
            [hint.verdict.value, _f6(hint.min_offdiag), _f6(hint.mean_offdiag),
             hint.most_confusable_pair[0], hint.most_confusable_pair[1],
             _f6(hint.low), _f6(hint.high)],
        ]
        return _csv_text(rows)
    lines = [f"**Model hint:** {hint.verdict.value}", ""]
    lines += _md_table(
        ["Min distance", "Mean distance", "Most confusable pair"],
        "rrl",
        [[_f6(hint.min_offdiag), _f6(hint.mean_offdiag), _md_escape(pair)]],
    )
    lines.append("")
    lines.append(f"Thresholds (heuristic): low={_f6(hint.low)}, high={_f6(hint.high)}")
    return "\n".join(lines) + "\n"


def _render_validation(report: ValidationReport, fmt: str) -> str:
    if fmt == "json":
        return _json_text(
            {
                "dimension": report.dimension,
                "classes": [{"name": n, "samples": c}
                            for n, c in report.class_counts.items()],
                "violations": [
                    {"code": v.code, "message": v.message, "location": v.location}
                    for v in report.violations
                ],
                "ok": report.ok,
            }
        )
    if fmt == "csv":
        rows = [["code", "message", "location"]]
        rows += [[v.code, v.message, v.location] for v in report.violations]
        return _csv_text(rows)
    if report.ok:
        return "archive valid: no violations\n"
    rows = [[v.code, _md_escape(v.location), _md_escape(v.message)]
            for v in report.violations]
    return "\n".join(_md_table(["Code", "Location", "Message"], "lll", rows)) + "\n"


def _json_text(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


_RENDERERS = {
    VcrReport: _render_vcr,
    SimilarityMatrix: _render_simmat,
    SweepCurve: _render_sweep,
    PruneManifest: _render_prune,
    ModelHint: _render_hint,
    ValidationReport: _render_validation,
}


def render_report(report, format: str = "markdown") -> str:
    """Serialize any report object to one of the supported text formats."""
    if format not in FORMATS:
        raise UsageError(f"format must be one of {FORMATS}, got {format!r}")
    renderer = _RENDERERS.get(type(report))
    if renderer is None:
        raise UsageError(f"cannot render objects of type {type(report).__name__}")
    return renderer(report, format)
