#!/usr/bin/env python3
"""Generate the bundled 4-class synthetic archive and its golden files.

Run once from the repository root; outputs are committed. Everything
expected (matrix, cluster counts, rendered table) is computed here with
naive pure-Python arithmetic, independent of the library under test.

Cluster structure is enforced with explicit margins: same-cluster pairs
sit below cosine distance 0.02 and cross-cluster pairs above 0.10, so
the 0.05 threshold used by the tests is far from every decision
boundary and the goldens are stable.
"""

from __future__ import annotations

import io
import json
import math
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
ARCHIVE = ROOT / "tests" / "data" / "synth4"
GOLDEN = ROOT / "tests" / "data" / "golden"

SEED = 20240811
EPS = 0.05
DIM = 8

# (class name, cluster sizes)
PLAN = [
    ("ferns", [4, 4, 4, 4, 4, 4, 4]),        # 28 samples, 7 clusters
    ("mosses", [1] * 20),                     # 20 samples, all distinct
    ("palms", [6, 5, 4, 2, 1]),               # 18 samples, 5 clusters
    ("reeds", [9]),                           # 9 samples, 1 cluster
]


def unit(v):
    return v / np.linalg.norm(v)


def cosine_distance_naive(a, b) -> float:
    dot = math.fsum(x * y for x, y in zip(a, b))
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(y * y for y in b))
    return 1.0 - max(-1.0, min(1.0, dot / (na * nb)))


def components_naive(rows, eps) -> int:
    n = len(rows)
    labels = [None] * n
    count = 0
    for start in range(n):
        if labels[start] is not None:
            continue
        labels[start] = count
        stack = [start]
        while stack:
            u = stack.pop()
            for v in range(n):
                if labels[v] is None and cosine_distance_naive(rows[u], rows[v]) <= eps:
                    labels[v] = count
                    stack.append(v)
        count += 1
    return count


def make_class(rng, sizes) -> np.ndarray:
    """Sample vectors with the requested cluster sizes, retrying until margins hold."""
    for _ in range(200):
        base = unit(rng.normal(size=DIM))
        protos = [unit(base + 0.9 * rng.normal(size=DIM)) for _ in sizes]
        rows, owner = [], []
        for k, size in enumerate(sizes):
            for _ in range(size):
                sample = unit(protos[k] + 0.015 * rng.normal(size=DIM))
                rows.append(sample * rng.uniform(0.5, 2.0))  # scale must not matter
                owner.append(k)
        ok = True
        for i in range(len(rows)):
            for j in range(i + 1, len(rows)):
                d = cosine_distance_naive(rows[i], rows[j])
                if owner[i] == owner[j] and d >= 0.02:
                    ok = False
                if owner[i] != owner[j] and d <= 0.10:
                    ok = False
        if ok and components_naive(rows, EPS) == len(sizes):
            return np.array(rows, dtype=np.float64)
    raise SystemExit("could not realize the requested cluster structure")


def main() -> int:
    rng = np.random.default_rng(SEED)
    ARCHIVE.mkdir(parents=True, exist_ok=True)
    GOLDEN.mkdir(parents=True, exist_ok=True)

    matrices: dict[str, np.ndarray] = {}
    manifest = {"dimension": DIM, "classes": []}
    for name, sizes in PLAN:
        matrices[name] = make_class(rng, sizes)
        # reference ecosystem serializer, not the library writer
        buf = io.BytesIO()
        np.save(buf, matrices[name])
        (ARCHIVE / f"{name}.npy").write_bytes(buf.getvalue())
        manifest["classes"].append(
            {
                "name": name,
                "file": f"{name}.npy",
                "sample_ids": [f"{name}/{i:03d}.jpg" for i in range(len(matrices[name]))],
            }
        )
    (ARCHIVE / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )

    # golden similarity matrix: naive centroids + naive pairwise distances
    names = [name for name, _ in PLAN]
    centroids = {}
    for name in names:
        m = matrices[name]
        centroids[name] = [
            math.fsum(float(x) for x in m[:, k]) / m.shape[0] for k in range(DIM)
        ]
    distances = [
        [
            0.0 if i == j else cosine_distance_naive(centroids[a], centroids[b])
            for j, b in enumerate(names)
        ]
        for i, a in enumerate(names)
    ]
    (GOLDEN / "synth4_simmat.json").write_text(
        json.dumps({"classes": names, "distances": distances}, indent=2) + "\n",
        encoding="utf-8",
    )

    # golden per-class cluster counts at eps=0.05 via naive components
    records = []
    for name, _ in PLAN:
        rows = [list(map(float, r)) for r in matrices[name]]
        clusters = components_naive(rows, EPS)
        records.append(
            {
                "name": name,
                "samples": len(rows),
                "clusters": clusters,
                "vcr": clusters / len(rows),
            }
        )
    (GOLDEN / "synth4_vcr.json").write_text(
        json.dumps({"eps": EPS, "classes": records}, indent=2) + "\n", encoding="utf-8"
    )

    # golden stdout for the markdown table (index, class, 6-decimal ratio)
    lines = ["| # | Class | VCR |", "|---:|---|---:|"]
    lines += [
        f"| {i + 1} | {r['name']} | {r['vcr']:.6f} |" for i, r in enumerate(records)
    ]
    (GOLDEN / "synth4_vcr.md").write_text("\n".join(lines) + "\n", encoding="utf-8")

    for r in records:
        print(f"{r['name']:8s} samples={r['samples']:3d} clusters={r['clusters']:3d} "
              f"vcr={r['vcr']:.6f}")
    print("matrix:")
    for row in distances:
        print("  " + "  ".join(f"{v:.6f}" for v in row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
