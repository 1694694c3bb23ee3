"""On-disk feature archives: a manifest plus one array file per class.

Archive layout::

    root/
      manifest.json     {"dimension": D,
                         "classes": [{"name": str, "file": str, "sample_ids": [str]?}],
                         "meta": [str]?}
      <class>.npy       2-D array file per class, one row per sample

Array files use the NPY v1.0 container restricted to little-endian IEEE
floats (``<f4``/``<f8``), C order, 2-D shape with at least one row and
one column. All values are widened to float64 on load so distance
thresholding behaves identically for f4 and f8 archives holding the
same values.
"""

from __future__ import annotations

import ast
import json
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    BadShape,
    DimensionMismatch,
    DsiError,
    EmptyClass,
    FortranOrder,
    InvariantViolation,
    IoFailure,
    ManifestClassFileMissing,
    ManifestMissing,
    Truncated,
    UnsupportedDtype,
)

NPY_MAGIC = b"\x93NUMPY"
MANIFEST_NAME = "manifest.json"

_SUPPORTED_DESCR = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}


# --- domain types ------------------------------------------------------

@dataclass
class ClassFeatureSet:
    """All feature vectors of one class, row-aligned with sample ids."""

    class_name: str
    sample_ids: list[str]
    vectors: np.ndarray  # (n_samples, dimension) float64

    def __post_init__(self) -> None:
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise BadShape(f"class {self.class_name!r}: expected a 2-D sample matrix")
        if self.vectors.shape[0] < 1:
            raise EmptyClass(f"class {self.class_name!r} has no samples")
        if len(self.sample_ids) != self.vectors.shape[0]:
            raise InvariantViolation(
                f"class {self.class_name!r}: {len(self.sample_ids)} sample_ids "
                f"for {self.vectors.shape[0]} rows"
            )
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise InvariantViolation(f"class {self.class_name!r}: duplicate sample_ids")

    @property
    def sample_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]


@dataclass
class DatasetFeatures:
    """Ordered collection of per-class feature sets plus provenance."""

    classes: list[ClassFeatureSet]
    dimension: int
    source_meta: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        names = [c.class_name for c in self.classes]
        if len(set(names)) != len(names):
            raise InvariantViolation("duplicate class names")
        for c in self.classes:
            if c.dimension != self.dimension:
                raise DimensionMismatch(
                    f"class {c.class_name!r} has dimension {c.dimension}, "
                    f"expected {self.dimension}"
                )

    @property
    def class_names(self) -> list[str]:
        return [c.class_name for c in self.classes]

    @property
    def total_samples(self) -> int:
        return sum(c.sample_count for c in self.classes)


@dataclass
class Violation:
    code: str
    message: str
    location: str


@dataclass
class ValidationReport:
    """Outcome of a non-raising archive scan; empty violations == loadable."""

    dimension: int | None
    class_counts: dict[str, int]
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations


# --- array file format -------------------------------------------------

def parse_array_file(data: bytes) -> tuple[tuple[int, int], np.ndarray]:
    """Parse one class array file into (shape, float64 matrix).

    Accepts only the v1.0 container subset described in the module
    docstring. Version bytes other than 1.0 and unparseable headers are
    rejected as BadMagic ("not this format").
    """
    if data[:6] != NPY_MAGIC:
        raise BadMagic("missing NPY magic bytes")
    if len(data) < 10:
        raise Truncated("byte stream ends inside the fixed header")
    if data[6:8] != b"\x01\x00":
        raise BadMagic(f"unsupported format version {data[6]}.{data[7]}, expected 1.0")
    (header_len,) = struct.unpack_from("<H", data, 8)
    header_end = 10 + header_len
    if len(data) < header_end:
        raise Truncated("byte stream ends inside the header block")
    try:
        header = ast.literal_eval(data[10:header_end].decode("ascii"))
        descr = header["descr"]
        fortran_order = header["fortran_order"]
        shape = header["shape"]
    except Exception as exc:
        raise BadMagic(f"malformed header: {exc}") from None

    dtype = _SUPPORTED_DESCR.get(descr)
    if dtype is None:
        raise UnsupportedDtype(
            f"dtype {descr!r} not supported; expected little-endian '<f4' or '<f8'"
        )
    if fortran_order:
        raise FortranOrder("column-major arrays are not supported")
    if (
        not isinstance(shape, tuple)
        or len(shape) != 2
        or not all(isinstance(n, int) for n in shape)
        or shape[0] < 1
        or shape[1] < 1
    ):
        raise BadShape(f"expected a 2-D shape with positive extents, got {shape!r}")

    rows, cols = shape
    need = rows * cols * dtype.itemsize
    payload = data[header_end:]
    if len(payload) < need:
        raise Truncated(f"payload holds {len(payload)} bytes, shape implies {need}")
    values = np.frombuffer(payload[:need], dtype=dtype).reshape(rows, cols)
    return (rows, cols), values.astype(np.float64)


def serialize_array(values: np.ndarray, descr: str = "<f8") -> bytes:
    """Serialize a 2-D matrix into the archive's array file format.

    The header is laid out exactly like the reference ecosystem writer
    (64-byte alignment, space padding, trailing newline), so files are
    byte-identical to ones produced by it.
    """
    if descr not in _SUPPORTED_DESCR:
        raise UnsupportedDtype(f"cannot serialize dtype {descr!r}")
    arr = np.ascontiguousarray(values, dtype=_SUPPORTED_DESCR[descr])
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise BadShape(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    header = "{'descr': '%s', 'fortran_order': False, 'shape': %r, }" % (descr, arr.shape)
    pad = -(10 + len(header) + 1) % 64
    header = header + " " * pad + "\n"
    return (
        NPY_MAGIC
        + b"\x01\x00"
        + struct.pack("<H", len(header))
        + header.encode("ascii")
        + arr.tobytes(order="C")
    )


# --- archive load / write / validate ------------------------------------

def _read_manifest(root: Path) -> dict:
    path = root / MANIFEST_NAME
    if not root.is_dir():
        raise IoFailure(f"archive root {root} is not a directory")
    if not path.is_file():
        raise ManifestMissing(f"{path} not found")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvariantViolation(f"{MANIFEST_NAME}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise InvariantViolation(f"{MANIFEST_NAME}: top-level value must be an object")
    return doc


def _manifest_entries(doc: dict) -> tuple[int, list[tuple[str, str, list[str] | None]], list[str]]:
    dimension = doc.get("dimension")
    if not isinstance(dimension, int) or dimension < 1:
        raise InvariantViolation(f"{MANIFEST_NAME}: 'dimension' must be an integer >= 1")
    classes = doc.get("classes")
    if not isinstance(classes, list) or not classes:
        raise InvariantViolation(f"{MANIFEST_NAME}: 'classes' must be a non-empty list")
    entries: list[tuple[str, str, list[str] | None]] = []
    seen: set[str] = set()
    for i, entry in enumerate(classes):
        loc = f"{MANIFEST_NAME}: classes[{i}]"
        if not isinstance(entry, dict):
            raise InvariantViolation(f"{loc} must be an object")
        name, file = entry.get("name"), entry.get("file")
        if not isinstance(name, str) or not name:
            raise InvariantViolation(f"{loc}: 'name' must be a non-empty string")
        if not isinstance(file, str) or not file:
            raise InvariantViolation(f"{loc}: 'file' must be a non-empty string")
        if name in seen:
            raise InvariantViolation(f"{loc}: duplicate class name {name!r}")
        seen.add(name)
        ids = entry.get("sample_ids")
        if ids is not None and not (
            isinstance(ids, list) and all(isinstance(s, str) for s in ids)
        ):
            raise InvariantViolation(f"{loc}: 'sample_ids' must be a list of strings")
        entries.append((name, file, ids))
    meta = doc.get("meta", [])
    if not (isinstance(meta, list) and all(isinstance(s, str) for s in meta)):
        raise InvariantViolation(f"{MANIFEST_NAME}: 'meta' must be a list of strings")
    return dimension, entries, meta


def _bad_rows(vectors: np.ndarray) -> list[tuple[int, str]]:
    """Rows violating the finite / positive-norm vector invariants."""
    finite = np.isfinite(vectors).all(axis=1)
    out = [(int(r), "non-finite value") for r in np.flatnonzero(~finite)]
    zero = finite & (np.linalg.norm(vectors, axis=1) == 0.0)
    out += [(int(r), "zero-norm vector") for r in np.flatnonzero(zero)]
    return sorted(out)


def _load_class(root: Path, name: str, file: str, ids: list[str] | None,
                dimension: int) -> ClassFeatureSet:
    path = root / file
    if not path.is_file():
        raise ManifestClassFileMissing(f"class {name!r}: file {path} not found")
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    (rows, cols), values = parse_array_file(data)
    if cols != dimension:
        raise DimensionMismatch(
            f"class {name!r} has {cols} columns, manifest declares dimension {dimension}"
        )
    bad = _bad_rows(values)
    if bad:
        row, what = bad[0]
        raise InvariantViolation(f"class {name!r} row {row}: {what}")
    if ids is not None and len(ids) != rows:
        raise InvariantViolation(
            f"class {name!r}: manifest lists {len(ids)} sample_ids for {rows} rows"
        )
    if ids is None:
        ids = [f"{name}/{r}" for r in range(rows)]
    return ClassFeatureSet(class_name=name, sample_ids=list(ids), vectors=values)


def load_dataset(root: str | Path) -> DatasetFeatures:
    """Load an archive, enforcing every vector and manifest invariant.

    Raises the first problem found; use :func:`validate` to collect all
    problems without raising.
    """
    root = Path(root)
    dimension, entries, meta = _manifest_entries(_read_manifest(root))
    classes = [_load_class(root, name, file, ids, dimension) for name, file, ids in entries]
    return DatasetFeatures(classes=classes, dimension=dimension, source_meta=meta)


def _class_filename(name: str, taken: set[str]) -> str:
    slug = re.sub(r"[^A-Za-z0-9._-]", "_", name)
    if not slug or slug.startswith("."):
        slug = "class"
    candidate, i = f"{slug}.npy", 1
    while candidate in taken:
        candidate = f"{slug}_{i}.npy"
        i += 1
    taken.add(candidate)
    return candidate


def write_dataset(ds: DatasetFeatures, root: str | Path) -> None:
    """Write an archive such that load_dataset reproduces ``ds`` exactly."""
    root = Path(root)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {root}: {exc}") from exc
    taken: set[str] = set()
    manifest: dict = {"dimension": ds.dimension, "classes": []}
    try:
        for cfs in ds.classes:
            file = _class_filename(cfs.class_name, taken)
            (root / file).write_bytes(serialize_array(cfs.vectors, "<f8"))
            manifest["classes"].append(
                {"name": cfs.class_name, "file": file, "sample_ids": cfs.sample_ids}
            )
        if ds.source_meta:
            manifest["meta"] = ds.source_meta
        (root / MANIFEST_NAME).write_text(
            json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write archive under {root}: {exc}") from exc


def validate(root: str | Path) -> ValidationReport:
    """Scan an archive and collect every content violation without raising.

    Only operating-system failures raise (IoFailure).
    """
    root = Path(root)
    violations: list[Violation] = []
    counts: dict[str, int] = {}
    dimension: int | None = None

    try:
        doc = _read_manifest(root)
        parsed_dimension, entries, _ = _manifest_entries(doc)
    except IoFailure:
        raise
    except DsiError as exc:
        violations.append(Violation(exc.code, str(exc), MANIFEST_NAME))
        return ValidationReport(None, {}, violations)

    dimension = parsed_dimension
    for name, file, ids in entries:
        path = root / file
        if not path.is_file():
            violations.append(
                Violation("ManifestClassFileMissing", f"file {file} not found", name)
            )
            continue
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise IoFailure(f"cannot read {path}: {exc}") from exc
        try:
            (rows, cols), values = parse_array_file(data)
        except DsiError as exc:
            violations.append(Violation(exc.code, str(exc), name))
            continue
        counts[name] = rows
        if cols != dimension:
            violations.append(
                Violation(
                    "DimensionMismatch",
                    f"{cols} columns, manifest declares dimension {dimension}",
                    name,
                )
            )
            continue
        for row, what in _bad_rows(values):
            violations.append(Violation("InvariantViolation", what, f"{name}[{row}]"))
        if ids is not None:
            if len(ids) != rows:
                violations.append(
                    Violation(
                        "InvariantViolation",
                        f"manifest lists {len(ids)} sample_ids for {rows} rows",
                        name,
                    )
                )
            elif len(set(ids)) != len(ids):
                violations.append(
                    Violation("InvariantViolation", "duplicate sample_ids", name)
                )
    return ValidationReport(dimension, counts, violations)
