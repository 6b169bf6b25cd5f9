"""Frame-record data model and stream (de)serialization.

The analysis engine consumes newline-delimited JSON streams of per-frame
detector output (faces with 128-d encodings, body/device observations,
tracker state), CSV files of ground-truth event intervals, and a flat
key=value config format. All numeric fields reject NaN/Inf at the boundary
and streams are validated to be strictly ordered by frame index and
timestamp.
"""

from __future__ import annotations

import enum
import io
import json
import math
from dataclasses import dataclass, fields, replace
from typing import IO, Iterable, Iterator, Sequence

ENCODING_DIM = 128

FaceEncoding = tuple[float, ...]


class ParseError(ValueError):
    """Malformed input; carries the 1-based line number when known."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class OrderingError(ParseError):
    """Frame index or timestamp not strictly increasing within a stream."""


class ValidationError(ValueError):
    """A value violates a data-model invariant."""


class ObjectClass(enum.Enum):
    BODY = "body"
    PHONE = "phone"
    LAPTOP = "laptop"


DEVICE_CLASSES = (ObjectClass.PHONE, ObjectClass.LAPTOP)


class EventKind(enum.Enum):
    ANOTHER_PERSON = "another_person"
    DEVICE = "device"
    ABSENCE = "absence"


def _finite(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a real number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ValidationError(f"{name} must be finite, got {out!r}")
    return out


def check_encoding(values: Sequence[float]) -> FaceEncoding:
    """Validate and freeze a 128-d face encoding."""
    enc = tuple(float(v) for v in values)
    if len(enc) != ENCODING_DIM:
        raise ValidationError(
            f"encoding length must be {ENCODING_DIM}, got {len(enc)}"
        )
    for v in enc:
        if not math.isfinite(v):
            raise ValidationError(f"encoding contains non-finite value {v!r}")
    return enc


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box with top-left corner (x, y) and extent (w, h)."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            _finite(getattr(self, name), f"box {name}")
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"box extent must be positive, got w={self.w} h={self.h}")
        if self.x < 0 or self.y < 0:
            raise ValidationError(f"box corner must be non-negative, got x={self.x} y={self.y}")

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)


@dataclass(frozen=True)
class FaceObservation:
    """One detected face: location, 128-d encoding and head-pose angles."""

    box: BoundingBox
    encoding: FaceEncoding
    yaw_deg: float
    pitch_deg: float

    def __post_init__(self):
        object.__setattr__(self, "encoding", check_encoding(self.encoding))
        yaw = _finite(self.yaw_deg, "yaw_deg")
        pitch = _finite(self.pitch_deg, "pitch_deg")
        if not -90.0 <= yaw <= 90.0:
            raise ValidationError(f"yaw_deg out of [-90, 90]: {yaw}")
        if not -90.0 <= pitch <= 90.0:
            raise ValidationError(f"pitch_deg out of [-90, 90]: {pitch}")


@dataclass(frozen=True)
class ObjectObservation:
    """One detected body/phone/laptop with its confidence."""

    cls: ObjectClass
    box: BoundingBox
    confidence: float

    def __post_init__(self):
        conf = _finite(self.confidence, "confidence")
        if not 0.0 <= conf <= 1.0:
            raise ValidationError(f"confidence out of [0, 1]: {conf}")


@dataclass(frozen=True)
class TrackerState:
    """Correlation-tracker output: optional box, quality score, active flag."""

    box: BoundingBox | None
    confidence: float
    active: bool

    def __post_init__(self):
        conf = _finite(self.confidence, "tracker confidence")
        if conf < 0:
            raise ValidationError(f"tracker confidence must be non-negative: {conf}")
        if self.active and self.box is None:
            raise ValidationError("active tracker must carry a box")


INACTIVE_TRACKER = TrackerState(box=None, confidence=0.0, active=False)


@dataclass(frozen=True)
class FrameRecord:
    """All detector outputs for one timestamped frame."""

    index: int
    timestamp_sec: float
    frame_w: int
    frame_h: int
    faces: tuple[FaceObservation, ...]
    objects: tuple[ObjectObservation, ...]
    tracker: TrackerState

    def __post_init__(self):
        if isinstance(self.index, bool) or not isinstance(self.index, int) or self.index < 0:
            raise ValidationError(f"frame index must be a non-negative integer: {self.index!r}")
        ts = _finite(self.timestamp_sec, "timestamp_sec")
        if ts < 0:
            raise ValidationError(f"timestamp_sec must be non-negative: {ts}")
        if self.frame_w <= 0 or self.frame_h <= 0:
            raise ValidationError(f"frame dimensions must be positive: {self.frame_w}x{self.frame_h}")
        object.__setattr__(self, "faces", tuple(self.faces))
        object.__setattr__(self, "objects", tuple(self.objects))
        for face in self.faces:
            self._check_box(face.box)
        for obj in self.objects:
            self._check_box(obj.box)
        if self.tracker.box is not None:
            self._check_box(self.tracker.box)

    def _check_box(self, box: BoundingBox):
        if box.x + box.w > self.frame_w or box.y + box.h > self.frame_h:
            raise ValidationError(
                f"box {box} exceeds frame dimensions {self.frame_w}x{self.frame_h}"
            )

    @property
    def diagonal(self) -> float:
        return math.hypot(self.frame_w, self.frame_h)


@dataclass(frozen=True)
class EventInterval:
    """A typed, time-bounded cheating occurrence (truth or prediction)."""

    kind: EventKind
    start_sec: float
    end_sec: float

    def __post_init__(self):
        start = _finite(self.start_sec, "start_sec")
        end = _finite(self.end_sec, "end_sec")
        if start >= end:
            raise ValidationError(f"interval must have start < end, got [{start}, {end}]")

    @property
    def duration(self) -> float:
        return self.end_sec - self.start_sec


@dataclass(frozen=True)
class EngineConfig:
    """Thresholds and timing parameters of the analysis engine."""

    registration_window_sec: float = 20.0
    face_distance_threshold: float = 0.65
    body_conf_threshold: float = 0.65
    device_conf_threshold: float = 0.30
    partial_epsilon: float = 0.01
    absence_ratio_limit: float = 0.05
    link_gap_sec: float = 2.0
    yaw_limit_deg: float = 30.0
    pitch_limit_deg: float = 20.0
    tracker_min_confidence: float = 7.0
    tracker_divergence_frac: float = 0.2
    fps: float = 3.0
    single_candidate: bool = True

    def __post_init__(self):
        for f in fields(self):
            if f.name == "single_candidate":
                continue
            _finite(getattr(self, f.name), f.name)
        for name in ("absence_ratio_limit", "tracker_divergence_frac"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValidationError(f"{name} must lie in (0, 1): {v}")
        if self.fps <= 0:
            raise ValidationError(f"fps must be positive: {self.fps}")
        if self.partial_epsilon < 0:
            raise ValidationError(f"partial_epsilon must be non-negative: {self.partial_epsilon}")
        for name in (
            "registration_window_sec",
            "link_gap_sec",
            "yaw_limit_deg",
            "pitch_limit_deg",
        ):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")

    def with_overrides(self, **overrides) -> "EngineConfig":
        return replace(self, **overrides)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


# --- frame-record stream -------------------------------------------------

def _box_to_list(box: BoundingBox) -> list[float]:
    return [box.x, box.y, box.w, box.h]


def _box_from_list(data, line_no) -> BoundingBox:
    if not isinstance(data, list) or len(data) != 4:
        raise ParseError(f"box must be a 4-element [x, y, w, h] array, got {data!r}", line_no)
    try:
        return BoundingBox(*data)
    except ValidationError as exc:
        raise ParseError(str(exc), line_no) from exc


def record_to_dict(record: FrameRecord) -> dict:
    """Map a FrameRecord onto the one-line JSON wire schema."""
    return {
        "index": record.index,
        "t": record.timestamp_sec,
        "w": record.frame_w,
        "h": record.frame_h,
        "faces": [
            {
                "box": _box_to_list(f.box),
                "enc": list(f.encoding),
                "yaw": f.yaw_deg,
                "pitch": f.pitch_deg,
            }
            for f in record.faces
        ],
        "objects": [
            {"cls": o.cls.value, "box": _box_to_list(o.box), "conf": o.confidence}
            for o in record.objects
        ],
        "tracker": {
            "box": None if record.tracker.box is None else _box_to_list(record.tracker.box),
            "conf": record.tracker.confidence,
            "active": record.tracker.active,
        },
    }


def record_from_dict(data: dict, line_no: int | None = None) -> FrameRecord:
    """Build a validated FrameRecord from a decoded wire-schema object."""
    if not isinstance(data, dict):
        raise ParseError(f"record must be a JSON object, got {type(data).__name__}", line_no)
    try:
        faces = []
        for f in data.get("faces", []):
            faces.append(
                FaceObservation(
                    box=_box_from_list(f["box"], line_no),
                    encoding=f["enc"],
                    yaw_deg=f["yaw"],
                    pitch_deg=f["pitch"],
                )
            )
        objects = []
        for o in data.get("objects", []):
            try:
                cls = ObjectClass(o["cls"])
            except ValueError:
                raise ParseError(f"unknown object class {o['cls']!r}", line_no) from None
            objects.append(
                ObjectObservation(cls=cls, box=_box_from_list(o["box"], line_no), confidence=o["conf"])
            )
        tr = data.get("tracker") or {"box": None, "conf": 0.0, "active": False}
        tracker = TrackerState(
            box=None if tr.get("box") is None else _box_from_list(tr["box"], line_no),
            confidence=tr.get("conf", 0.0),
            active=bool(tr.get("active", False)),
        )
        return FrameRecord(
            index=data["index"],
            timestamp_sec=data["t"],
            frame_w=data["w"],
            frame_h=data["h"],
            faces=tuple(faces),
            objects=tuple(objects),
            tracker=tracker,
        )
    except KeyError as exc:
        raise ParseError(f"missing required key {exc.args[0]!r}", line_no) from exc
    except ValidationError as exc:
        raise ParseError(str(exc), line_no) from exc


def read_record_stream(source: IO) -> Iterator[FrameRecord]:
    """Yield validated FrameRecords from a newline-delimited JSON stream.

    Single-pass and constant-memory per record. Raises ParseError with the
    offending line number on malformed input, OrderingError when frame
    indices or timestamps fail to increase strictly.
    """
    prev_index = -1
    prev_ts = -math.inf
    for line_no, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line:
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", line_no) from exc
        record = record_from_dict(data, line_no)
        if record.index <= prev_index:
            raise OrderingError(
                f"frame index {record.index} not greater than previous {prev_index}", line_no
            )
        if record.timestamp_sec <= prev_ts:
            raise OrderingError(
                f"timestamp {record.timestamp_sec} not greater than previous {prev_ts}", line_no
            )
        prev_index = record.index
        prev_ts = record.timestamp_sec
        yield record


def write_record_stream(records: Iterable[FrameRecord], sink: IO) -> None:
    """Serialize records to the newline-delimited JSON wire format.

    Floats are emitted at full precision (shortest round-trip repr), so
    parse(write(records)) reproduces every value bit-exactly.
    """
    binary = _is_binary(sink)
    for record in records:
        line = json.dumps(record_to_dict(record), separators=(",", ":"), allow_nan=False) + "\n"
        sink.write(line.encode("utf-8") if binary else line)


def _is_binary(stream: IO) -> bool:
    return not isinstance(stream, io.TextIOBase)


# --- labels ---------------------------------------------------------------

def check_no_same_kind_overlap(intervals: Sequence[EventInterval]) -> None:
    """Raise ValidationError when two intervals of one kind overlap in time."""
    by_kind: dict[EventKind, list[EventInterval]] = {}
    for iv in intervals:
        by_kind.setdefault(iv.kind, []).append(iv)
    for kind, group in by_kind.items():
        group = sorted(group, key=lambda iv: iv.start_sec)
        for prev, cur in zip(group, group[1:]):
            if cur.start_sec < prev.end_sec:
                raise ValidationError(
                    f"overlapping {kind.value} intervals "
                    f"[{prev.start_sec}, {prev.end_sec}] and [{cur.start_sec}, {cur.end_sec}]"
                )


def read_labels(source: IO) -> list[EventInterval]:
    """Parse a `kind,start_sec,end_sec` CSV of ground-truth intervals.

    Concurrent intervals of different kinds are legal and both retained;
    same-kind overlap is a validation error.
    """
    intervals: list[EventInterval] = []
    lines = iter(source)
    for line_no, raw in enumerate(lines, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if line_no == 1 and parts[:1] == ["kind"]:
            continue
        if len(parts) != 3:
            raise ParseError(f"expected 'kind,start_sec,end_sec', got {line!r}", line_no)
        try:
            kind = EventKind(parts[0])
        except ValueError:
            raise ParseError(f"unknown event kind {parts[0]!r}", line_no) from None
        try:
            start, end = float(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"non-numeric interval bounds in {line!r}", line_no) from None
        try:
            intervals.append(EventInterval(kind=kind, start_sec=start, end_sec=end))
        except ValidationError as exc:
            raise ValidationError(f"line {line_no}: {exc}") from exc
    check_no_same_kind_overlap(intervals)
    return intervals


def write_labels(intervals: Iterable[EventInterval], sink: IO) -> None:
    binary = _is_binary(sink)

    def put(text: str):
        sink.write(text.encode("utf-8") if binary else text)

    put("kind,start_sec,end_sec\n")
    for iv in intervals:
        put(f"{iv.kind.value},{iv.start_sec!r},{iv.end_sec!r}\n")


# --- config ---------------------------------------------------------------

_BOOL_VALUES = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def parse_config_value(name: str, raw: str):
    if name not in EngineConfig.field_names():
        raise ValidationError(f"unknown config key {name!r}")
    if name == "single_candidate":
        try:
            return _BOOL_VALUES[raw.strip().lower()]
        except KeyError:
            raise ValidationError(f"config key {name!r} expects a boolean, got {raw!r}") from None
    try:
        return float(raw)
    except ValueError:
        raise ValidationError(f"config key {name!r} expects a number, got {raw!r}") from None


def read_config(source: IO) -> EngineConfig:
    """Parse the flat `key = value` config format; every key is optional."""
    overrides = {}
    for line_no, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", line_no)
        name, _, value = line.partition("=")
        name = name.strip()
        try:
            overrides[name] = parse_config_value(name, value)
        except ValidationError as exc:
            raise ParseError(str(exc), line_no) from exc
    return EngineConfig(**overrides)
