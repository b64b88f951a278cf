"""Exam-table ingestion, filtering, and per-patient selection.

The canonical exam schema is a flat CSV: one row per exam, one column per
canonical field (lower_snake_case, ``.`` decimal separator, empty cell for a
missing value).  Device exports rarely match that schema, so parsing goes
through a :class:`ColumnMapping` that renames headers, applies per-column unit
scales, and optionally accepts locale decimal commas.

Datasets are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Mapping, Optional

import numpy as np

from .errors import FormatError, MappingError

SOURCE_FIELDS = (
    "art_avg",
    "art_max",
    "ele_b_bfs_8mm_thinnest",
    "k_max_front_d",
    "rpi_avg",
    "rel_pachy_min",
    "pachy_min",
    "pachy_min_y",
    "bfs_front_r",
    "ebfs_front_r",
    "bfs_back_r",
    "ebfs_back_r",
)
INDEX_FIELDS = ("d_aa", "d_am", "d_b", "d_e", "d_f", "d_k", "d_p", "d_r", "d_t", "d_y")
NUMERIC_FIELDS = SOURCE_FIELDS + INDEX_FIELDS + ("d_final",)
CANONICAL_FIELDS = ("patient_id", "exam_id", "eye", "status") + NUMERIC_FIELDS

# Fields that are physically positive; non-positive parsed values are demoted
# to missing and counted in the parse report.
POSITIVE_FIELDS = frozenset(
    {"pachy_min", "rpi_avg", "bfs_front_r", "ebfs_front_r", "bfs_back_r", "ebfs_back_r"}
)

_EYE_ALIASES = {
    "l": "L", "left": "L", "os": "L",
    "r": "R", "right": "R", "od": "R",
}

STATUS_OK = "OK"


def _normalize_eye(raw: str) -> Optional[str]:
    return _EYE_ALIASES.get(raw.strip().lower())


@dataclass(frozen=True)
class ExamRecord:
    """One eye's exam: identifiers, status, source measures, and D indices.

    Any measurement may be ``None`` (missing).  The D indices and d_final are
    in SD units; source measures are in the physical units of the device
    export (micrometers, millimeters, diopters, or dimensionless ratios).
    """

    patient_id: str
    exam_id: str = ""
    eye: Optional[str] = None
    status: str = STATUS_OK
    art_avg: Optional[float] = None
    art_max: Optional[float] = None
    ele_b_bfs_8mm_thinnest: Optional[float] = None
    k_max_front_d: Optional[float] = None
    rpi_avg: Optional[float] = None
    rel_pachy_min: Optional[float] = None
    pachy_min: Optional[float] = None
    pachy_min_y: Optional[float] = None
    bfs_front_r: Optional[float] = None
    ebfs_front_r: Optional[float] = None
    bfs_back_r: Optional[float] = None
    ebfs_back_r: Optional[float] = None
    d_aa: Optional[float] = None
    d_am: Optional[float] = None
    d_b: Optional[float] = None
    d_e: Optional[float] = None
    d_f: Optional[float] = None
    d_k: Optional[float] = None
    d_p: Optional[float] = None
    d_r: Optional[float] = None
    d_t: Optional[float] = None
    d_y: Optional[float] = None
    d_final: Optional[float] = None

    def __post_init__(self):
        if not self.patient_id:
            raise ValueError("patient_id must be nonempty")
        if self.eye is not None and self.eye not in ("L", "R"):
            raise ValueError(f"eye must be 'L' or 'R', got {self.eye!r}")
        for name in POSITIVE_FIELDS:
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive when present, got {value}")

    @property
    def status_ok(self) -> bool:
        return self.status == STATUS_OK


@dataclass(frozen=True)
class ParseReport:
    """Counts of cells that could not be used while parsing a table."""

    n_rows: int
    unparseable: dict[str, int] = field(default_factory=dict)
    invalid: dict[str, int] = field(default_factory=dict)

    @property
    def total_bad_cells(self) -> int:
        return sum(self.unparseable.values()) + sum(self.invalid.values())


@dataclass(frozen=True)
class ExamDataset:
    """An ordered, immutable collection of exam records."""

    records: tuple[ExamRecord, ...]
    provenance: str = ""
    selection_seed: Optional[int] = None
    parse_report: Optional[ParseReport] = None

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ExamRecord]:
        return iter(self.records)

    def column(self, name: str) -> np.ndarray:
        """Values of one canonical field as a float array (NaN = missing)."""
        if name not in CANONICAL_FIELDS or name in ("patient_id", "exam_id", "eye", "status"):
            raise KeyError(f"{name!r} is not a numeric canonical field")
        return np.array(
            [math.nan if getattr(r, name) is None else float(getattr(r, name)) for r in self.records]
        )

    def with_provenance_note(self, note: str) -> "ExamDataset":
        prov = f"{self.provenance}; {note}" if self.provenance else note
        return replace(self, provenance=prov)


@dataclass(frozen=True)
class IndexDefinition:
    """Binds a D index to the source measure it normalizes.

    ``source_columns`` holds either a single canonical column, or the pair of
    reference-surface radius columns whose absolute difference serves as the
    measure (the elevation-change indices, whose true inputs are not exported
    by the device).  ``magnitude_source`` marks those derived measures, which
    cannot go below zero.
    """

    index: str
    source_name: str
    source_columns: tuple[str, ...]
    units: str
    display_decimals: int
    magnitude_source: bool = False

    def source_value(self, record: ExamRecord) -> Optional[float]:
        if len(self.source_columns) == 1:
            return getattr(record, self.source_columns[0])
        base = getattr(record, self.source_columns[0])
        enhanced = getattr(record, self.source_columns[1])
        if base is None or enhanced is None:
            return None
        return abs(enhanced - base)


DEFAULT_INDEX_DEFINITIONS = (
    IndexDefinition("d_aa", "art_avg", ("art_avg",), "µm", 0),
    IndexDefinition("d_am", "art_max", ("art_max",), "µm", 0),
    IndexDefinition("d_b", "change_back", ("bfs_back_r", "ebfs_back_r"), "mm", 2, magnitude_source=True),
    IndexDefinition("d_e", "ele_b_bfs_8mm_thinnest", ("ele_b_bfs_8mm_thinnest",), "µm", 0),
    IndexDefinition("d_f", "change_front", ("bfs_front_r", "ebfs_front_r"), "mm", 2, magnitude_source=True),
    IndexDefinition("d_k", "k_max_front_d", ("k_max_front_d",), "D", 1),
    IndexDefinition("d_p", "rpi_avg", ("rpi_avg",), "", 2),
    IndexDefinition("d_r", "rel_pachy_min", ("rel_pachy_min",), "", 1),
    IndexDefinition("d_t", "pachy_min", ("pachy_min",), "µm", 0),
    IndexDefinition("d_y", "pachy_min_y", ("pachy_min_y",), "mm", 2),
)

INDEX_DEFINITION_BY_NAME = {d.index: d for d in DEFAULT_INDEX_DEFINITIONS}


@dataclass(frozen=True)
class ColumnMapping:
    """Maps canonical field names to source headers, with unit scales.

    ``columns`` maps canonical name -> header in the input file; fields absent
    from the map are treated as declared-absent.  ``scales`` holds an optional
    multiplicative unit conversion per canonical field (default 1).  Two
    parsing options ride along: ``decimal_comma`` accepts ``540,5`` style
    cells, and ``delimiter`` sets the cell separator (locale exports that use
    decimal commas typically separate cells with semicolons).
    """

    columns: Mapping[str, str]
    scales: Mapping[str, float] = field(default_factory=dict)
    decimal_comma: bool = False
    delimiter: str = ","
    # Strict mappings require every mapped column to exist in the header; the
    # identity mapping is lenient so canonical files may omit unused columns.
    strict: bool = True

    def __post_init__(self):
        unknown = set(self.columns) - set(CANONICAL_FIELDS)
        if unknown:
            raise MappingError(f"unknown canonical fields in mapping: {sorted(unknown)}")
        if "patient_id" not in self.columns:
            raise MappingError("mapping must cover patient_id")

    @classmethod
    def identity(cls) -> "ColumnMapping":
        """Mapping for files already in the canonical schema."""
        return cls(columns={name: name for name in CANONICAL_FIELDS}, strict=False)

    @classmethod
    def from_json(cls, text: str) -> "ColumnMapping":
        """Parse the mapping file format.

        The JSON object maps canonical names to ``{"column": header}`` with an
        optional ``"scale"``; the reserved top-level keys ``decimal_comma``
        and ``delimiter`` set the parsing options.
        """
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise MappingError("mapping file must contain a JSON object")
        decimal_comma = bool(raw.pop("decimal_comma", False))
        delimiter = str(raw.pop("delimiter", ","))
        columns: dict[str, str] = {}
        scales: dict[str, float] = {}
        for name, entry in raw.items():
            if isinstance(entry, str):
                columns[name] = entry
                continue
            if not isinstance(entry, dict) or "column" not in entry:
                raise MappingError(f"mapping entry for {name!r} needs a 'column' key")
            columns[name] = str(entry["column"])
            if "scale" in entry:
                scales[name] = float(entry["scale"])
        return cls(columns=columns, scales=scales, decimal_comma=decimal_comma, delimiter=delimiter)

    def to_json(self) -> str:
        body: dict[str, object] = {
            name: ({"column": col, "scale": self.scales[name]} if name in self.scales else {"column": col})
            for name, col in self.columns.items()
        }
        if self.decimal_comma:
            body["decimal_comma"] = True
        if self.delimiter != ",":
            body["delimiter"] = self.delimiter
        return json.dumps(body, indent=2, sort_keys=True)


def _open_text(source) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8-sig", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8-sig"))
    if isinstance(source, io.TextIOBase):
        return source
    # binary stream
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8-sig")
    return io.StringIO(data)


def parse_exam_table(source, mapping: Optional[ColumnMapping] = None) -> ExamDataset:
    """Parse a delimiter-separated exam export into an :class:`ExamDataset`.

    ``source`` may be a path, bytes, or a readable stream.  Unparseable
    numeric cells (and parseable values that violate positivity constraints)
    become missing values and are tallied in the dataset's parse report; rows
    are never dropped here, and row order is preserved.  A missing ``status``
    column defaults every record to ``OK``.
    """
    mapping = mapping or ColumnMapping.identity()
    stream = _open_text(source)
    reader = csv.reader(stream, delimiter=mapping.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("input has no header row") from None
    if not any(cell.strip() for cell in header):
        raise FormatError("input has no header row")

    positions: dict[str, int] = {}
    for name, column in mapping.columns.items():
        if column in header:
            positions[name] = header.index(column)
    for name, column in mapping.columns.items():
        if name in positions:
            continue
        if mapping.strict or name == "patient_id":
            raise MappingError(f"mapped column {column!r} (for {name}) not found in header")

    unparseable: dict[str, int] = {}
    invalid: dict[str, int] = {}
    records: list[ExamRecord] = []

    def cell(row: list[str], name: str) -> str:
        pos = positions.get(name)
        if pos is None or pos >= len(row):
            return ""
        return row[pos].strip()

    for row in reader:
        if not any(c.strip() for c in row):
            continue
        kwargs: dict[str, object] = {}
        pid = cell(row, "patient_id")
        if not pid:
            unparseable["patient_id"] = unparseable.get("patient_id", 0) + 1
            continue
        kwargs["patient_id"] = pid
        kwargs["exam_id"] = cell(row, "exam_id")
        raw_eye = cell(row, "eye")
        if raw_eye:
            eye = _normalize_eye(raw_eye)
            if eye is None:
                unparseable["eye"] = unparseable.get("eye", 0) + 1
            kwargs["eye"] = eye
        raw_status = cell(row, "status")
        kwargs["status"] = raw_status if raw_status else STATUS_OK

        for name in NUMERIC_FIELDS:
            raw = cell(row, name)
            if not raw:
                continue
            if mapping.decimal_comma:
                raw = raw.replace(",", ".")
            try:
                value = float(raw)
            except ValueError:
                unparseable[name] = unparseable.get(name, 0) + 1
                continue
            if not math.isfinite(value):
                unparseable[name] = unparseable.get(name, 0) + 1
                continue
            value *= mapping.scales.get(name, 1.0)
            if name in POSITIVE_FIELDS and value <= 0:
                invalid[name] = invalid.get(name, 0) + 1
                continue
            kwargs[name] = value
        records.append(ExamRecord(**kwargs))

    report = ParseReport(n_rows=len(records), unparseable=unparseable, invalid=invalid)
    provenance = getattr(source, "name", None) or (str(source) if isinstance(source, (str, Path)) else "stream")
    return ExamDataset(records=tuple(records), provenance=f"parsed from {provenance}", parse_report=report)


def _format_value(value: Optional[float]) -> str:
    if value is None:
        return ""
    # repr round-trips exactly, keeping parse -> serialize -> parse idempotent
    return repr(float(value))


def write_canonical_csv(ds: ExamDataset, target) -> None:
    """Write a dataset in the canonical exam CSV schema."""
    own = isinstance(target, (str, Path))
    stream = open(target, "w", encoding="utf-8", newline="") if own else target
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(CANONICAL_FIELDS)
        for record in ds.records:
            row = [record.patient_id, record.exam_id, record.eye or "", record.status]
            row.extend(_format_value(getattr(record, name)) for name in NUMERIC_FIELDS)
            writer.writerow(row)
    finally:
        if own:
            stream.close()


def canonical_csv_bytes(ds: ExamDataset) -> bytes:
    buffer = io.StringIO()
    write_canonical_csv(ds, buffer)
    return buffer.getvalue().encode("utf-8")


def filter_ok(ds: ExamDataset) -> ExamDataset:
    """Keep only records whose status is ``OK``."""
    kept = tuple(r for r in ds.records if r.status_ok)
    dropped = len(ds.records) - len(kept)
    out = replace(ds, records=kept)
    return out.with_provenance_note(f"filter_ok dropped {dropped}")


def select_one_eye_per_patient(ds: ExamDataset, seed: int) -> ExamDataset:
    """Keep exactly one exam per patient, chosen uniformly at random.

    Selection uses a dedicated PCG64 generator seeded with ``seed``; the same
    dataset and seed always yield the same selection.  Patients are visited in
    first-appearance order.
    """
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    groups: dict[str, list[ExamRecord]] = {}
    order: list[str] = []
    for record in ds.records:
        if record.patient_id not in groups:
            groups[record.patient_id] = []
            order.append(record.patient_id)
        groups[record.patient_id].append(record)

    rng = np.random.default_rng(seed)
    chosen = tuple(groups[pid][int(rng.integers(0, len(groups[pid])))] for pid in order)
    out = replace(ds, records=chosen, selection_seed=seed)
    return out.with_provenance_note(f"one eye per patient (seed={seed})")


@dataclass(frozen=True)
class FieldSummary:
    count: int
    missing: int
    mean: Optional[float]
    sd: Optional[float]
    minimum: Optional[float]
    maximum: Optional[float]


@dataclass(frozen=True)
class DatasetSummary:
    n_records: int
    eye_counts: dict[str, int]
    fields: dict[str, FieldSummary]


def summarize(ds: ExamDataset) -> DatasetSummary:
    """Per-field count/mean/SD/min/max/missing plus eye counts."""
    eye_counts = {"L": 0, "R": 0}
    for record in ds.records:
        if record.eye in eye_counts:
            eye_counts[record.eye] += 1

    fields: dict[str, FieldSummary] = {}
    for name in NUMERIC_FIELDS:
        values = [getattr(r, name) for r in ds.records]
        present = np.array([v for v in values if v is not None], dtype=float)
        if present.size == 0:
            fields[name] = FieldSummary(0, len(values), None, None, None, None)
            continue
        sd = float(np.std(present, ddof=1)) if present.size > 1 else None
        fields[name] = FieldSummary(
            count=int(present.size),
            missing=len(values) - int(present.size),
            mean=float(present.mean()),
            sd=sd,
            minimum=float(present.min()),
            maximum=float(present.max()),
        )
    return DatasetSummary(n_records=len(ds.records), eye_counts=eye_counts, fields=fields)
