"""Ink data model: pen-tablet recordings, task taxonomy, and corpus I/O.

A recording is a uniformly sampled pen time series (100 Hz) with five integer
channels per sample: x, y, pressure, azimuth, altitude. There are no stored
timestamps; the sample index is the clock. Recordings are grouped into a study
corpus keyed by (subject, set, task), where a "set" is one full assessment
(S1..S5) and tasks 1..9 cover three categories of handwriting exercises.

File format (one file per task execution, UTF-8):

    #subject=U01
    #set=S1
    #task=3
    #device=optional free-form value
    812 1040 655 210 55
    815 1043 812 210 55
    ...

Header lines start with ``#`` and hold ``key=value`` pairs; ``subject``,
``set`` and ``task`` are required, anything else is preserved as metadata.
Data lines hold five whitespace-separated integers: x y pressure azimuth
altitude. Directory layout for a corpus:

    <corpus>/<subject>/<set>/task<k>.ink

with an optional per-set sidecar ``<corpus>/<subject>/<set>/aux.tsv`` holding
auxiliary scalars (lactate, flight_time, force, velocity, rpe; ``NA`` allowed).
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import (
    DuplicateError,
    FormatError,
    InkError,
    RangeError,
    ShapeError,
    TooShortError,
)

SAMPLE_RATE_HZ = 100

PRESSURE_MAX = 2047
AZIMUTH_MAX = 359
ALTITUDE_MAX = 90

_CHANNELS = ("x", "y", "pressure", "azimuth", "altitude")

# Subject ids appear in file paths, so keep them path-safe.
_SUBJECT_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")
_HEADER_KEY_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")


class Category(str, enum.Enum):
    """Broad task groups: drawings needing planning, routine writing, and
    shapes demanding precise motor control."""

    COGNITIVE = "Cognitive"
    MECHANICAL = "Mechanical"
    FINE_MOTOR = "FineMotor"


#: Fixed task -> category mapping for the nine tasks of one assessment.
TASK_CATEGORIES: Mapping[int, Category] = {
    1: Category.COGNITIVE,
    2: Category.COGNITIVE,
    3: Category.FINE_MOTOR,
    4: Category.MECHANICAL,
    5: Category.FINE_MOTOR,
    6: Category.MECHANICAL,
    7: Category.MECHANICAL,
    8: Category.MECHANICAL,
    9: Category.FINE_MOTOR,
}

TASK_IDS = tuple(sorted(TASK_CATEGORIES))


class SetId(str, enum.Enum):
    """The five assessment sets, totally ordered by acquisition time."""

    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"
    S5 = "S5"

    @property
    def order(self) -> int:
        return int(self.value[1])

    @property
    def acquisition_label(self) -> str:
        return _SET_LABELS[self]

    def __lt__(self, other: "SetId") -> bool:  # type: ignore[override]
        return self.order < other.order


_SET_LABELS = {
    SetId.S1: "Ph1-Pre-Fa",
    SetId.S2: "Ph1-Post-Fa",
    SetId.S3: "Ph2-Pre-Fa",
    SetId.S4: "Ph2-Post-Fa",
    SetId.S5: "Ph3-Post-Fa",
}

ALL_SETS = tuple(SetId)


def validate_task_id(task: int) -> int:
    if not isinstance(task, (int, np.integer)) or isinstance(task, bool):
        raise RangeError(f"task id must be an integer, got {task!r}")
    if task not in TASK_CATEGORIES:
        raise RangeError(f"task id must be in 1..9, got {task}")
    return int(task)


@dataclass(frozen=True)
class Sample:
    """One acquired pen sample. Position in the signal is the time index."""

    x: int
    y: int
    pressure: int
    azimuth: int
    altitude: int

    def __post_init__(self):
        if not 0 <= self.pressure <= PRESSURE_MAX:
            raise RangeError(f"pressure {self.pressure} outside [0, {PRESSURE_MAX}]")
        if not 0 <= self.azimuth <= AZIMUTH_MAX:
            raise RangeError(f"azimuth {self.azimuth} outside [0, {AZIMUTH_MAX}]")
        if not 0 <= self.altitude <= ALTITUDE_MAX:
            raise RangeError(f"altitude {self.altitude} outside [0, {ALTITUDE_MAX}]")


def _channel_bounds(name: str) -> tuple[int, int] | None:
    return {
        "pressure": (0, PRESSURE_MAX),
        "azimuth": (0, AZIMUTH_MAX),
        "altitude": (0, ALTITUDE_MAX),
    }.get(name)


@dataclass(frozen=True, eq=False)
class InkSignal:
    """Array-backed, immutable pen time series at a fixed 100 Hz clock.

    Channels are int64 numpy arrays of equal length >= 2. Equality is
    structural over all channels.
    """

    x: np.ndarray
    y: np.ndarray
    pressure: np.ndarray
    azimuth: np.ndarray
    altitude: np.ndarray
    sample_rate_hz: int = SAMPLE_RATE_HZ

    def __post_init__(self):
        for name in _CHANNELS:
            arr = np.asarray(getattr(self, name))
            if arr.ndim != 1:
                raise ShapeError(f"channel {name} must be one-dimensional")
            if arr.size and not np.issubdtype(arr.dtype, np.integer):
                rounded = np.rint(arr)
                if not np.array_equal(rounded, arr):
                    raise RangeError(f"channel {name} holds non-integer values")
                arr = rounded
            arr = arr.astype(np.int64, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        n = self.x.size
        for name in _CHANNELS[1:]:
            if getattr(self, name).size != n:
                raise ShapeError("all channels must have the same length")
        if n < 2:
            raise TooShortError(f"a signal needs at least 2 samples, got {n}")
        for name in _CHANNELS:
            bounds = _channel_bounds(name)
            if bounds is None:
                continue
            arr = getattr(self, name)
            bad = np.nonzero((arr < bounds[0]) | (arr > bounds[1]))[0]
            if bad.size:
                i = int(bad[0])
                raise RangeError(
                    f"{name} value {int(arr[i])} at sample {i} outside "
                    f"[{bounds[0]}, {bounds[1]}]"
                )

    @classmethod
    def from_samples(cls, samples: Iterable[Sample]) -> "InkSignal":
        rows = list(samples)
        if len(rows) < 2:
            raise TooShortError(f"a signal needs at least 2 samples, got {len(rows)}")
        cols = {
            name: np.array([getattr(s, name) for s in rows], dtype=np.int64)
            for name in _CHANNELS
        }
        return cls(**cols)

    def __len__(self) -> int:
        return int(self.x.size)

    def __getitem__(self, i: int) -> Sample:
        return Sample(
            int(self.x[i]),
            int(self.y[i]),
            int(self.pressure[i]),
            int(self.azimuth[i]),
            int(self.altitude[i]),
        )

    def __iter__(self) -> Iterator[Sample]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InkSignal):
            return NotImplemented
        return self.sample_rate_hz == other.sample_rate_hz and all(
            np.array_equal(getattr(self, n), getattr(other, n)) for n in _CHANNELS
        )


@dataclass(frozen=True, eq=False)
class TaskRecord:
    """One task execution: who wrote, in which set, which task, plus the ink."""

    subject_id: str
    set_id: SetId
    task: int
    signal: InkSignal
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not _SUBJECT_RE.match(self.subject_id):
            raise FormatError(
                f"subject id {self.subject_id!r} must be non-empty and use only "
                "letters, digits, '_', '.', '-'"
            )
        validate_task_id(self.task)
        object.__setattr__(self, "metadata", dict(self.metadata))
        for k, v in self.metadata.items():
            if not _HEADER_KEY_RE.match(k):
                raise FormatError(f"metadata key {k!r} is not header-safe")
            if "\n" in v or "\r" in v:
                raise FormatError(f"metadata value for {k!r} contains a newline")

    @property
    def key(self) -> tuple[str, SetId, int]:
        return (self.subject_id, self.set_id, self.task)

    @property
    def category(self) -> Category:
        return TASK_CATEGORIES[self.task]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TaskRecord):
            return NotImplemented
        return (
            self.subject_id == other.subject_id
            and self.set_id == other.set_id
            and self.task == other.task
            and dict(self.metadata) == dict(other.metadata)
            and self.signal == other.signal
        )


@dataclass(frozen=True)
class AuxRecord:
    """Per-set auxiliary scalars recorded by other instruments.

    All fields optional (``None`` when not measured) and non-negative when
    present: lactate (mmol/L), flight_time (s), force (N), velocity (m/s),
    rpe (Borg 0-10 scale).
    """

    lactate: float | None = None
    flight_time: float | None = None
    force: float | None = None
    velocity: float | None = None
    rpe: float | None = None

    def __post_init__(self):
        for name in AUX_FIELDS:
            v = getattr(self, name)
            if v is None:
                continue
            if not math.isfinite(v) or v < 0:
                raise RangeError(f"aux field {name} must be finite and >= 0, got {v}")


AUX_FIELDS = ("lactate", "flight_time", "force", "velocity", "rpe")


@dataclass(frozen=True)
class SessionSet:
    """All task records of one subject in one assessment set."""

    subject_id: str
    set_id: SetId
    records: Mapping[int, TaskRecord]
    aux: AuxRecord | None = None

    def __post_init__(self):
        object.__setattr__(self, "records", dict(self.records))

    @property
    def missing_tasks(self) -> tuple[int, ...]:
        return tuple(t for t in TASK_IDS if t not in self.records)


class StudyCorpus:
    """All task records of a study, keyed by (subject, set, task).

    The uniqueness invariant is enforced on insertion. Treat a corpus as
    read-only once loaded; records themselves are immutable.
    """

    def __init__(self):
        self._records: dict[tuple[str, SetId, int], TaskRecord] = {}
        self._aux: dict[tuple[str, SetId], AuxRecord] = {}

    def add(self, record: TaskRecord) -> None:
        if record.key in self._records:
            subject, set_id, task = record.key
            raise DuplicateError(
                f"duplicate record for subject={subject} set={set_id.value} task={task}"
            )
        self._records[record.key] = record

    def set_aux(self, subject_id: str, set_id: SetId, aux: AuxRecord) -> None:
        self._aux[(subject_id, set_id)] = aux

    def get(self, subject_id: str, set_id: SetId, task: int) -> TaskRecord | None:
        return self._records.get((subject_id, set_id, task))

    def aux(self, subject_id: str, set_id: SetId) -> AuxRecord | None:
        return self._aux.get((subject_id, set_id))

    def session(self, subject_id: str, set_id: SetId) -> SessionSet:
        records = {
            task: rec
            for (subj, s, task), rec in self._records.items()
            if subj == subject_id and s == set_id
        }
        return SessionSet(subject_id, set_id, records, self.aux(subject_id, set_id))

    @property
    def subjects(self) -> tuple[str, ...]:
        return tuple(sorted({k[0] for k in self._records}))

    def records(self) -> Iterator[TaskRecord]:
        """All records in deterministic (subject, set, task) order."""
        for key in sorted(self._records, key=lambda k: (k[0], k[1].order, k[2])):
            yield self._records[key]

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, key: tuple[str, SetId, int]) -> bool:
        return key in self._records

    def gaps(self) -> list[tuple[str, SetId, int]]:
        """Missing (subject, set, task) cells against the full 5x9 grid of
        every subject present in the corpus."""
        out = []
        for subject in self.subjects:
            for set_id in ALL_SETS:
                for task in TASK_IDS:
                    if (subject, set_id, task) not in self._records:
                        out.append((subject, set_id, task))
        return out

    def subjects_with_both(self, set_a: SetId, set_b: SetId, task: int) -> tuple[str, ...]:
        """Subjects having the given task recorded in both sets, sorted."""
        return tuple(
            s
            for s in self.subjects
            if (s, set_a, task) in self._records and (s, set_b, task) in self._records
        )


# ---------------------------------------------------------------------------
# Task file parsing / serialization
# ---------------------------------------------------------------------------

_REQUIRED_HEADERS = ("subject", "set", "task")


def parse_task_file(text: str) -> TaskRecord:
    """Parse one task file into a TaskRecord.

    Raises FormatError (with line number) for structural problems, RangeError
    for out-of-range channel values, TooShortError for fewer than 2 samples.
    """
    headers: dict[str, str] = {}
    rows: list[tuple[int, int, int, int, int]] = []
    in_header = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            raise FormatError("blank line not allowed", line=lineno)
        if line.startswith("#"):
            if not in_header:
                raise FormatError("header line after data lines", line=lineno)
            body = line[1:]
            if "=" not in body:
                raise FormatError("header line must be #key=value", line=lineno)
            key, value = body.split("=", 1)
            key = key.strip()
            value = value.strip()
            if not _HEADER_KEY_RE.match(key):
                raise FormatError(f"invalid header key {key!r}", line=lineno)
            if key in headers:
                raise FormatError(f"duplicate header key {key!r}", line=lineno)
            headers[key] = value
            continue
        in_header = False
        fields = line.split()
        if len(fields) != 5:
            raise FormatError(
                f"expected 5 integers (x y pressure azimuth altitude), got "
                f"{len(fields)} fields",
                line=lineno,
            )
        try:
            values = tuple(int(f) for f in fields)
        except ValueError:
            raise FormatError(f"non-integer sample value in {line!r}", line=lineno)
        for name, v in zip(_CHANNELS, values):
            bounds = _channel_bounds(name)
            if bounds and not bounds[0] <= v <= bounds[1]:
                raise RangeError(
                    f"{name} value {v} outside [{bounds[0]}, {bounds[1]}]",
                    line=lineno,
                )
        rows.append(values)  # type: ignore[arg-type]

    header_end = len(headers)
    for key in _REQUIRED_HEADERS:
        if key not in headers:
            raise FormatError(f"missing required header #{key}=...", line=header_end or 1)
    set_value = headers["set"]
    try:
        set_id = SetId(set_value)
    except ValueError:
        raise FormatError(f"set must be one of S1..S5, got {set_value!r}", line=header_end)
    try:
        task = int(headers["task"])
    except ValueError:
        raise FormatError(f"task must be an integer, got {headers['task']!r}", line=header_end)
    if task not in TASK_CATEGORIES:
        raise FormatError(f"task must be in 1..9, got {task}", line=header_end)

    if len(rows) < 2:
        raise TooShortError(f"task file holds {len(rows)} samples, need at least 2")

    data = np.array(rows, dtype=np.int64)
    signal = InkSignal(*(data[:, i] for i in range(5)))
    metadata = {k: v for k, v in headers.items() if k not in _REQUIRED_HEADERS}
    return TaskRecord(headers["subject"], set_id, task, signal, metadata)


def serialize_task(record: TaskRecord) -> str:
    """Render a TaskRecord in the task file format. Output re-parses to an
    identical record; extra metadata keys are written in sorted order so the
    rendering is canonical."""
    lines = [
        f"#subject={record.subject_id}",
        f"#set={record.set_id.value}",
        f"#task={record.task}",
    ]
    for key in sorted(record.metadata):
        lines.append(f"#{key}={record.metadata[key]}")
    sig = record.signal
    for i in range(len(sig)):
        lines.append(
            f"{sig.x[i]} {sig.y[i]} {sig.pressure[i]} {sig.azimuth[i]} {sig.altitude[i]}"
        )
    return "\n".join(lines) + "\n"


def _parse_aux_file(text: str, path: Path) -> AuxRecord:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise FormatError(f"{path}: aux sidecar needs a header line and one value line")
    header = tuple(lines[0].split())
    if header != AUX_FIELDS:
        raise FormatError(f"{path}: aux header must be {' '.join(AUX_FIELDS)}")
    fields = lines[1].split()
    if len(fields) != len(AUX_FIELDS):
        raise FormatError(f"{path}: aux value line needs {len(AUX_FIELDS)} fields")
    values: dict[str, float | None] = {}
    for name, token in zip(AUX_FIELDS, fields):
        if token == "NA":
            values[name] = None
        else:
            try:
                values[name] = float(token)
            except ValueError:
                raise FormatError(f"{path}: aux field {name} is not a number: {token!r}")
    return AuxRecord(**values)


def load_corpus(directory: str | Path) -> StudyCorpus:
    """Load every ``*.ink`` file under ``directory`` into a StudyCorpus.

    Files are visited in lexicographic path order so the result is
    deterministic. Header content (not the path) is authoritative for the
    record key. Parse errors propagate with the file path attached; duplicate
    keys raise DuplicateError. Use ``corpus.gaps()`` for the missing-cell
    report.
    """
    directory = Path(directory)
    corpus = StudyCorpus()
    for path in sorted(directory.rglob("*.ink")):
        try:
            record = parse_task_file(path.read_text(encoding="utf-8"))
        except InkError as exc:
            raise type(exc)(f"{path}: {exc}") from exc
        corpus.add(record)
    for path in sorted(directory.rglob("aux.tsv")):
        rel = path.relative_to(directory)
        if len(rel.parts) != 3:
            raise FormatError(f"{path}: aux sidecar must sit at <subject>/<set>/aux.tsv")
        subject, set_name = rel.parts[0], rel.parts[1]
        try:
            set_id = SetId(set_name)
        except ValueError:
            raise FormatError(f"{path}: directory {set_name!r} is not a set name")
        corpus.set_aux(subject, set_id, _parse_aux_file(path.read_text(encoding="utf-8"), path))
    return corpus


def record_path(record: TaskRecord) -> Path:
    """Relative path of a record inside a corpus directory."""
    return Path(record.subject_id) / record.set_id.value / f"task{record.task}.ink"


def write_corpus(corpus: StudyCorpus, directory: str | Path) -> list[Path]:
    """Write every record of ``corpus`` in the corpus directory layout.

    Returns the written paths (relative to ``directory``), in write order.
    """
    directory = Path(directory)
    written = []
    for record in corpus.records():
        rel = record_path(record)
        target = directory / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(serialize_task(record), encoding="utf-8")
        written.append(rel)
    return written
