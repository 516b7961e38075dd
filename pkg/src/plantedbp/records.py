"""Structured experiment results and their serialization.

:class:`TrialRecord` is the unit of output for every solver run, whether from
the CLI, the sweep driver, or library code.  The field set is fixed and every
serialized record validates against :data:`TRIAL_RECORD_SCHEMA`.  Fields a
producer cannot know are null: the engine fills what it can observe and the
caller enriches (graph parameters, spectral quantities, projections).

``wall_time`` is nullable because sweep outputs must be a pure function of
the sweep configuration; the sweep writes null there, single runs record the
measured time.

Writes go through :func:`write_atomic` (temp file + rename) so a crash never
leaves a half-written output behind.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass, fields

import jsonschema

__all__ = [
    "TrialRecord",
    "TRIAL_RECORD_SCHEMA",
    "TRIAL_CSV_COLUMNS",
    "validate_record",
    "records_to_csv",
    "records_from_csv",
    "write_atomic",
    "write_json_atomic",
]


def _num(nullable=True):
    return {"type": ["number", "null"] if nullable else "number"}


def _int(nullable=True):
    return {"type": ["integer", "null"] if nullable else "integer"}


def _bool(nullable=True):
    return {"type": ["boolean", "null"] if nullable else "boolean"}


TRIAL_RECORD_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "TrialRecord",
    "type": "object",
    "properties": {
        "seed": _int(),
        "per_class": _int(),
        "d": _int(),
        "delta": _num(nullable=False),
        "init_mode": {"enum": ["independent", "balanced", "aligned"]},
        "iterations_run": _int(nullable=False),
        "success": _bool(nullable=False),
        "success_matches_planted": _bool(),
        "feasible_strict": _bool(),
        "feasible_relaxed": _bool(),
        "L2": _int(),
        "L3": _int(),
        "epsilon_hat": _num(),
        "x": {
            "type": ["array", "null"],
            "items": {"type": "number"},
            "minItems": 6,
            "maxItems": 6,
        },
        "y": {
            "type": ["array", "null"],
            "items": {"type": "number"},
            "minItems": 9,
            "maxItems": 9,
        },
        "nu": _num(),
        "wall_time": _num(),
    },
    "required": [
        "seed",
        "per_class",
        "d",
        "delta",
        "init_mode",
        "iterations_run",
        "success",
        "success_matches_planted",
        "feasible_strict",
        "feasible_relaxed",
        "L2",
        "L3",
        "epsilon_hat",
        "x",
        "y",
        "nu",
        "wall_time",
    ],
    "additionalProperties": False,
}


@dataclass
class TrialRecord:
    """One solver run.  Unknown-to-the-producer fields stay None."""

    seed: int | None
    per_class: int | None
    d: int | None
    delta: float
    init_mode: str
    iterations_run: int
    success: bool
    success_matches_planted: bool | None
    feasible_strict: bool | None = None
    feasible_relaxed: bool | None = None
    L2: int | None = None
    L3: int | None = None
    epsilon_hat: float | None = None
    x: list[float] | None = None
    y: list[float] | None = None
    nu: float | None = None
    wall_time: float | None = None

    def __post_init__(self):
        if self.success_matches_planted and not self.success:
            raise ValueError(
                "success_matches_planted requires success"
            )
        if self.x is not None and len(self.x) != 6:
            raise ValueError(f"x must have 6 entries, got {len(self.x)}")
        if self.y is not None and len(self.y) != 9:
            raise ValueError(f"y must have 9 entries, got {len(self.y)}")

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, data: dict) -> "TrialRecord":
        validate_record(data)
        return cls(**data)

    def validate(self) -> None:
        validate_record(self.to_json_dict())


def validate_record(data: dict) -> None:
    """Raise jsonschema.ValidationError if ``data`` is not a valid record."""
    jsonschema.validate(data, TRIAL_RECORD_SCHEMA)


# ---------------------------------------------------------------------------
# CSV round-trip
# ---------------------------------------------------------------------------

TRIAL_CSV_COLUMNS: tuple[str, ...] = tuple(
    f.name for f in fields(TrialRecord)
)

_LIST_COLUMNS = {"x", "y"}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ";".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _uncell(column: str, text: str):
    if text == "":
        return None
    if column in _LIST_COLUMNS:
        return [float(t) for t in text.split(";")]
    if text in ("true", "false"):
        return text == "true"
    if column in ("delta", "epsilon_hat", "nu", "wall_time"):
        return float(text)
    if column == "init_mode":
        return text
    return int(text)


def records_to_csv(records: list[TrialRecord]) -> str:
    """Serialize records to CSV text (header + one row each, LF endings)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRIAL_CSV_COLUMNS)
    for rec in records:
        data = rec.to_json_dict()
        writer.writerow([_cell(data[c]) for c in TRIAL_CSV_COLUMNS])
    return buf.getvalue()


def records_from_csv(text: str) -> list[TrialRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != TRIAL_CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header: {header}")
    out = []
    for row in reader:
        data = {c: _uncell(c, cell) for c, cell in zip(header, row)}
        out.append(TrialRecord.from_json_dict(data))
    return out


# ---------------------------------------------------------------------------
# atomic writes
# ---------------------------------------------------------------------------


def write_atomic(path: str, text: str) -> None:
    """Write text to ``path`` via a same-directory temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_json_atomic(path: str, obj) -> None:
    write_atomic(path, json.dumps(obj, indent=2, sort_keys=False) + "\n")
