"""Per-frame nomination, temporal linking and the three-field decision.

Frames carrying evidence (another-person face, suspicious body count,
device above threshold) are nominated, temporally close nominations are
linked into appearance intervals, and the three decision fields --
another person, device, absence -- are each labeled Clean or Suspicious.
Any suspicious field makes the overall verdict Suspicious.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import IO, Sequence

from proctorlens.records import (
    EngineConfig,
    EventInterval,
    EventKind,
    FrameRecord,
    ObjectClass,
    ParseError,
)
from proctorlens.tracking import ReconciledFrame

REPORT_SCHEMA = "proctorlens/report-v1"


class Label(enum.Enum):
    CLEAN = "clean"
    SUSPICIOUS = "suspicious"


@dataclass(frozen=True)
class FrameVerdict:
    """One row of the per-frame result table.

    ``face_distance`` and ``multi_body_conf`` (second-highest raw body
    confidence) are diagnostic traces used by timeline plots; they carry no
    decision weight of their own.
    """

    index: int
    timestamp_sec: float
    candidate_present: bool
    other_face_nominated: bool
    body_nominated: bool
    device_nominated: bool
    body_count: int
    max_device_conf: float
    face_distance: float | None = None
    multi_body_conf: float = 0.0


@dataclass(frozen=True)
class FieldDecision:
    """Clean/Suspicious decision for one cheating field."""

    field: EventKind
    label: Label
    intervals: tuple[EventInterval, ...]
    supporting_ratio: float | None = None


@dataclass(frozen=True)
class AnalysisReport:
    """Full analysis outcome: per-frame table, field decisions, final label."""

    decisions: tuple[FieldDecision, FieldDecision, FieldDecision]
    overall: Label
    frame_count: int
    per_frame: tuple[FrameVerdict, ...] = ()

    def decision(self, kind: EventKind) -> FieldDecision:
        for dec in self.decisions:
            if dec.field is kind:
                return dec
        raise KeyError(kind)


def nominate_frame(frame: FrameRecord, rec: ReconciledFrame, cfg: EngineConfig) -> FrameVerdict:
    """Evaluate one frame's nomination rules.

    A frame is body-nominated when exactly one confident body appears
    without the candidate, or more than one body appears at all. Device
    nomination fires on any phone/laptop at or above the device threshold.
    """
    body_count = 0
    top_body = 0.0
    second_body = 0.0
    max_device = 0.0
    device_nominated = False
    body_thr = cfg.body_conf_threshold
    dev_thr = cfg.device_conf_threshold
    for obj in frame.objects:
        conf = obj.confidence
        if obj.cls is ObjectClass.BODY:
            if conf >= body_thr:
                body_count += 1
            if conf > top_body:
                second_body = top_body
                top_body = conf
            elif conf > second_body:
                second_body = conf
        else:
            if conf > max_device:
                max_device = conf
            if conf >= dev_thr:
                device_nominated = True
    body_nominated = (body_count == 1 and not rec.candidate_present) or body_count > 1
    return FrameVerdict(
        index=frame.index,
        timestamp_sec=frame.timestamp_sec,
        candidate_present=rec.candidate_present,
        other_face_nominated=rec.other_face_count >= 1,
        body_nominated=body_nominated,
        device_nominated=device_nominated,
        body_count=body_count,
        max_device_conf=max_device,
        face_distance=rec.face_distance,
        multi_body_conf=second_body,
    )


class _Linker:
    """Single-pass interval builder over increasing nominated timestamps."""

    __slots__ = ("gap", "period", "kind", "intervals", "_start", "_last")

    def __init__(self, gap: float, period: float, kind: EventKind):
        self.gap = gap
        self.period = period
        self.kind = kind
        self.intervals: list[EventInterval] = []
        self._start: float | None = None
        self._last = 0.0

    def add(self, timestamp: float) -> None:
        if self._start is None:
            self._start = self._last = timestamp
        elif timestamp - self._last <= self.gap:
            self._last = timestamp
        else:
            self._flush()
            self._start = self._last = timestamp

    def _flush(self) -> None:
        self.intervals.append(
            EventInterval(kind=self.kind, start_sec=self._start, end_sec=self._last + self.period)
        )

    def close(self) -> tuple[EventInterval, ...]:
        if self._start is not None:
            self._flush()
            self._start = None
        return tuple(self.intervals)


def link_frames(
    nominated: Sequence[tuple[int, float]], cfg: EngineConfig, kind: EventKind
) -> tuple[EventInterval, ...]:
    """Merge temporally close nominated frames into appearance intervals.

    Consecutive nominations at most ``cfg.link_gap_sec`` apart join one
    interval; each interval ends one frame period past its last nomination,
    so a lone frame still yields a non-degenerate interval.
    """
    linker = _Linker(cfg.link_gap_sec, 1.0 / cfg.fps, kind)
    prev = None
    for _, ts in nominated:
        if prev is not None and ts < prev:
            raise ValueError("nominated frames must be sorted by timestamp")
        prev = ts
        linker.add(ts)
    return linker.close()


class DecisionAccumulator:
    """Streaming reducer over frame verdicts.

    Holds constant memory (three open linking runs plus counters) unless
    ``keep_per_frame`` retains the verdict table for reporting.
    """

    def __init__(self, cfg: EngineConfig, keep_per_frame: bool = False):
        self.cfg = cfg
        period = 1.0 / cfg.fps
        self._another = _Linker(cfg.link_gap_sec, period, EventKind.ANOTHER_PERSON)
        self._device = _Linker(cfg.link_gap_sec, period, EventKind.DEVICE)
        self._absence = _Linker(cfg.link_gap_sec, period, EventKind.ABSENCE)
        self._total = 0
        self._supporting = 0
        self._frames: list[FrameVerdict] | None = [] if keep_per_frame else None

    def add(self, verdict: FrameVerdict) -> None:
        self._total += 1
        ts = verdict.timestamp_sec
        if verdict.other_face_nominated or verdict.body_nominated:
            self._another.add(ts)
        if verdict.device_nominated:
            self._device.add(ts)
        if not verdict.candidate_present and verdict.body_count == 0:
            self._supporting += 1
            self._absence.add(ts)
        if self._frames is not None:
            self._frames.append(verdict)

    def finalize(self) -> AnalysisReport:
        if self._total == 0:
            raise ValueError("cannot decide on an empty frame sequence")
        another_iv = self._another.close()
        device_iv = self._device.close()
        absence_iv = self._absence.close()
        ratio = self._supporting / self._total
        decisions = (
            FieldDecision(
                field=EventKind.ANOTHER_PERSON,
                label=Label.SUSPICIOUS if another_iv else Label.CLEAN,
                intervals=another_iv,
            ),
            FieldDecision(
                field=EventKind.DEVICE,
                label=Label.SUSPICIOUS if device_iv else Label.CLEAN,
                intervals=device_iv,
            ),
            FieldDecision(
                field=EventKind.ABSENCE,
                label=Label.SUSPICIOUS if ratio > self.cfg.absence_ratio_limit else Label.CLEAN,
                intervals=absence_iv,
                supporting_ratio=ratio,
            ),
        )
        overall = (
            Label.SUSPICIOUS
            if any(d.label is Label.SUSPICIOUS for d in decisions)
            else Label.CLEAN
        )
        return AnalysisReport(
            decisions=decisions,
            overall=overall,
            frame_count=self._total,
            per_frame=tuple(self._frames) if self._frames is not None else (),
        )


def decide(per_frame: Sequence[FrameVerdict], cfg: EngineConfig) -> AnalysisReport:
    """Reduce an ordered verdict table to the three field decisions.

    Another-person evidence unions face- and body-nominated frames before
    linking. The absence field turns Suspicious only when the fraction of
    frames with neither candidate nor any body strictly exceeds
    ``cfg.absence_ratio_limit``.
    """
    if not per_frame:
        raise ValueError("cannot decide on an empty frame sequence")
    acc = DecisionAccumulator(cfg, keep_per_frame=True)
    for verdict in per_frame:
        acc.add(verdict)
    return acc.finalize()


# --- report serialization ---------------------------------------------------

def _verdict_to_dict(v: FrameVerdict) -> dict:
    return {
        "index": v.index,
        "t": v.timestamp_sec,
        "candidate_present": v.candidate_present,
        "other_face_nominated": v.other_face_nominated,
        "body_nominated": v.body_nominated,
        "device_nominated": v.device_nominated,
        "body_count": v.body_count,
        "max_device_conf": v.max_device_conf,
        "face_distance": v.face_distance,
        "multi_body_conf": v.multi_body_conf,
    }


def _verdict_from_dict(data: dict) -> FrameVerdict:
    return FrameVerdict(
        index=data["index"],
        timestamp_sec=data["t"],
        candidate_present=data["candidate_present"],
        other_face_nominated=data["other_face_nominated"],
        body_nominated=data["body_nominated"],
        device_nominated=data["device_nominated"],
        body_count=data["body_count"],
        max_device_conf=data["max_device_conf"],
        face_distance=data.get("face_distance"),
        multi_body_conf=data.get("multi_body_conf", 0.0),
    )


def report_to_dict(report: AnalysisReport, include_per_frame: bool = True) -> dict:
    decisions = {}
    for dec in report.decisions:
        entry = {
            "label": dec.label.value,
            "intervals": [[iv.start_sec, iv.end_sec] for iv in dec.intervals],
        }
        if dec.supporting_ratio is not None:
            entry["supporting_ratio"] = dec.supporting_ratio
        decisions[dec.field.value] = entry
    out = {
        "schema": REPORT_SCHEMA,
        "overall": report.overall.value,
        "frame_count": report.frame_count,
        "decisions": decisions,
    }
    if include_per_frame and report.per_frame:
        out["per_frame"] = [_verdict_to_dict(v) for v in report.per_frame]
    return out


def report_from_dict(data: dict) -> AnalysisReport:
    if data.get("schema") != REPORT_SCHEMA:
        raise ParseError(f"unsupported report schema {data.get('schema')!r}")
    try:
        decisions = []
        for kind in (EventKind.ANOTHER_PERSON, EventKind.DEVICE, EventKind.ABSENCE):
            entry = data["decisions"][kind.value]
            decisions.append(
                FieldDecision(
                    field=kind,
                    label=Label(entry["label"]),
                    intervals=tuple(
                        EventInterval(kind=kind, start_sec=s, end_sec=e)
                        for s, e in entry["intervals"]
                    ),
                    supporting_ratio=entry.get("supporting_ratio"),
                )
            )
        per_frame = tuple(_verdict_from_dict(v) for v in data.get("per_frame", []))
        return AnalysisReport(
            decisions=(decisions[0], decisions[1], decisions[2]),
            overall=Label(data["overall"]),
            frame_count=data["frame_count"],
            per_frame=per_frame,
        )
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed report: {exc!r}") from exc


def write_report(report: AnalysisReport, sink: IO, include_per_frame: bool = True) -> None:
    json.dump(report_to_dict(report, include_per_frame), sink, indent=2, allow_nan=False)
    sink.write("\n")


def read_report(source: IO) -> AnalysisReport:
    try:
        data = json.load(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid report JSON: {exc.msg}") from exc
    return report_from_dict(data)
