"""Command-line entry point.

Exit codes: 0 success, 1 content/validation violations, 2 usage errors,
3 I/O failures. Identical invocations on identical archive bytes produce
byte-identical stdout; ``DSI_THREADS`` caps worker parallelism (0 = one
worker per CPU) without affecting output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import analysis, feature_store, metrics, vcr
from .clustering import DEFAULT_DENSE_CAP, METRICS
from .errors import DsiError, InvariantViolation, IoFailure, UsageError


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); keep it exception-driven
        raise UsageError(message)


def _add_report_args(sp, default_format: str = "markdown") -> None:
    sp.add_argument("--format", choices=analysis.FORMATS, default=default_format,
                    help=f"report format (default: {default_format})")
    sp.add_argument("--out", metavar="PATH",
                    help="write the report to PATH instead of stdout")


def _add_eps_args(sp) -> None:
    sp.add_argument("--eps", type=float, default=vcr.DEFAULT_EPS,
                    help="redundancy distance threshold (default: 0.05)")
    sp.add_argument("--adaptive", action="store_true",
                    help="tighten eps per class from the similarity matrix")
    sp.add_argument("--alpha", type=float, default=0.5,
                    help="adaptive scale on the nearest-class distance (default: 0.5)")


def _add_compute_args(sp) -> None:
    sp.add_argument("--metric", choices=METRICS, default="cosine")
    sp.add_argument("--sample-cap", type=int, default=DEFAULT_DENSE_CAP,
                    help="largest class size given a dense distance matrix")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="dsi",
        description="Structural indexing for labeled feature archives: per-class "
                    "variety contribution ratios, the inter-class similarity matrix, "
                    "redundancy pruning, threshold sweeps, and model hints.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("validate", help="scan an archive and report every violation")
    sp.add_argument("root")
    _add_report_args(sp)

    sp = sub.add_parser("simmat", help="pairwise class centroid cosine distances")
    sp.add_argument("root")
    _add_report_args(sp)

    sp = sub.add_parser("vcr", help="variety contribution ratio per class")
    sp.add_argument("root")
    _add_eps_args(sp)
    _add_compute_args(sp)
    _add_report_args(sp)

    sp = sub.add_parser("prune", help="build a keep/remove manifest per cluster")
    sp.add_argument("root")
    _add_eps_args(sp)
    _add_compute_args(sp)
    _add_report_args(sp, default_format="json")

    sp = sub.add_parser("apply-prune", help="write the optimized archive")
    sp.add_argument("root")
    sp.add_argument("--manifest", required=True, help="prune manifest JSON file")
    sp.add_argument("--out", required=True, metavar="DIR",
                    help="directory for the optimized archive")
    sp.add_argument("--format", choices=analysis.FORMATS, default="markdown")

    sp = sub.add_parser("sweep", help="VCR across a threshold grid for one class")
    sp.add_argument("root")
    sp.add_argument("--class", dest="class_name", required=True)
    sp.add_argument("--grid", required=True, metavar="A:B:STEP",
                    help="inclusive eps grid, e.g. 0.01:0.30:0.01")
    _add_compute_args(sp)
    _add_report_args(sp)

    sp = sub.add_parser("hint", help="model-capacity hint from class separation")
    sp.add_argument("root")
    sp.add_argument("--low", type=float, default=analysis.DEFAULT_HINT_LOW)
    sp.add_argument("--high", type=float, default=analysis.DEFAULT_HINT_HIGH)
    _add_report_args(sp)

    return parser


def _parse_grid(spec: str) -> list[float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like start:stop:step, got {spec!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise UsageError(f"grid values must be numbers, got {spec!r}") from None
    if start <= 0 or step <= 0 or stop < start:
        raise UsageError("grid needs start > 0, step > 0, stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _eps_policy(args) -> vcr.FixedEps | vcr.AdaptiveEps:
    if args.adaptive:
        return vcr.AdaptiveEps(base_eps=args.eps, alpha=args.alpha)
    return vcr.FixedEps(eps=args.eps)


def _check_cap(args) -> int:
    if args.sample_cap < 1:
        raise UsageError(f"--sample-cap must be >= 1, got {args.sample_cap}")
    return args.sample_cap


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc


def _dispatch(args) -> int:
    if args.command == "validate":
        report = feature_store.validate(args.root)
        _emit(analysis.render_report(report, args.format), args.out)
        return 0 if report.ok else 1

    if args.command == "simmat":
        ds = feature_store.load_dataset(args.root)
        _emit(analysis.render_report(metrics.similarity_matrix(ds), args.format), args.out)
        return 0

    if args.command == "vcr":
        policy, cap = _eps_policy(args), _check_cap(args)  # validate before loading
        ds = feature_store.load_dataset(args.root)
        report = vcr.dataset_vcr(ds, policy, args.metric, cap)
        _emit(analysis.render_report(report, args.format), args.out)
        return 0

    if args.command == "prune":
        policy, cap = _eps_policy(args), _check_cap(args)
        ds = feature_store.load_dataset(args.root)
        manifest = vcr.prune(ds, policy, args.metric, cap)
        _emit(analysis.render_report(manifest, args.format), args.out)
        return 0

    if args.command == "apply-prune":
        ds = feature_store.load_dataset(args.root)
        manifest_path = Path(args.manifest)
        try:
            doc = json.loads(manifest_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoFailure(f"cannot read {manifest_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvariantViolation(f"{manifest_path}: invalid JSON ({exc})") from None
        pruned = vcr.apply_prune(ds, vcr.PruneManifest.from_json_dict(doc))
        feature_store.write_dataset(pruned, args.out)
        sys.stdout.write(_apply_summary(ds, pruned, args.out, args.format))
        return 0

    if args.command == "sweep":
        grid, cap = _parse_grid(args.grid), _check_cap(args)
        ds = feature_store.load_dataset(args.root)
        by_name = {c.class_name: c for c in ds.classes}
        if args.class_name not in by_name:
            raise UsageError(f"class {args.class_name!r} not in archive "
                             f"(has: {', '.join(ds.class_names)})")
        curve = analysis.sweep(by_name[args.class_name], grid, args.metric, cap)
        _emit(analysis.render_report(curve, args.format), args.out)
        return 0

    if args.command == "hint":
        if not (0 < args.low < args.high):
            raise UsageError(f"need 0 < low < high, got low={args.low}, high={args.high}")
        ds = feature_store.load_dataset(args.root)
        hint = analysis.model_hint(metrics.similarity_matrix(ds), args.low, args.high)
        _emit(analysis.render_report(hint, args.format), args.out)
        return 0

    raise UsageError(f"unknown command {args.command!r}")


def _apply_summary(original, pruned, out_dir: str, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(
            {
                "classes": len(pruned.classes),
                "original": original.total_samples,
                "optimized": pruned.total_samples,
                "out": out_dir,
            },
            indent=2,
        ) + "\n"
    if fmt == "csv":
        return "classes,original,optimized,out\n" \
               f"{len(pruned.classes)},{original.total_samples}," \
               f"{pruned.total_samples},{out_dir}\n"
    return (f"wrote {pruned.total_samples} samples in {len(pruned.classes)} classes "
            f"to {out_dir} (from {original.total_samples})\n")


def run(argv: list[str]) -> int:
    """Parse and execute one invocation, mapping errors to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except UsageError as exc:
        sys.stderr.write(parser.format_usage())
        sys.stderr.write(f"dsi: error: {exc}\n")
        return 2
    except IoFailure as exc:
        sys.stderr.write(f"dsi: I/O error: {exc}\n")
        return 3
    except OSError as exc:
        sys.stderr.write(f"dsi: I/O error: {exc}\n")
        return 3
    except DsiError as exc:
        sys.stderr.write(f"dsi: {exc.code}: {exc}\n")
        return 1


def main(argv: list[str] | None = None) -> int:
    return run(list(sys.argv[1:]) if argv is None else list(argv))


if __name__ == "__main__":
    sys.exit(main())
