"""Evaluation metrics: instance, segment and video families.

Instance scoring matches predicted against true intervals by temporal IOU
(non-exclusively: one prediction may validate several truths). Segment
scoring compares fixed-length windows of binarized frame sequences. Video
scoring reduces each recording to one binary label per field and reports
precision/recall/F1 with Suspicious as the positive class. Detection-rate
denominators that would be empty are reported as not-applicable (None)
rather than 0/0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from proctorlens.events import AnalysisReport, Label
from proctorlens.records import EventInterval, EventKind, ValidationError

OVERALL = "overall"


@dataclass(frozen=True)
class MetricConfig:
    """Parameters of the three metric families."""

    iou_threshold: float = 0.1
    segment_len_sec: float = 1.0
    segment_match_rate: float = 0.5
    fps: float = 3.0
    exclusive_instances: bool = False

    def __post_init__(self):
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValidationError(f"iou_threshold must lie in (0, 1]: {self.iou_threshold}")
        if not 0.0 < self.segment_match_rate <= 1.0:
            raise ValidationError(
                f"segment_match_rate must lie in (0, 1]: {self.segment_match_rate}"
            )
        if self.segment_len_sec <= 0:
            raise ValidationError(f"segment_len_sec must be positive: {self.segment_len_sec}")
        if self.fps <= 0:
            raise ValidationError(f"fps must be positive: {self.fps}")

    @property
    def segment_frames(self) -> int:
        n = int(round(self.segment_len_sec * self.fps))
        return max(n, 1)


@dataclass(frozen=True)
class DetectionCounts:
    """TDR/FAR numerators and denominators, addable across videos."""

    detected: int = 0
    truths: int = 0
    false_alarms: int = 0
    preds: int = 0

    def __add__(self, other: "DetectionCounts") -> "DetectionCounts":
        return DetectionCounts(
            self.detected + other.detected,
            self.truths + other.truths,
            self.false_alarms + other.false_alarms,
            self.preds + other.preds,
        )

    @property
    def tdr(self) -> float | None:
        """Correct detections over positive labels; None when no positives."""
        return self.detected / self.truths if self.truths else None

    @property
    def far(self) -> float | None:
        """False predictions over positive predictions; None when no predictions."""
        return self.false_alarms / self.preds if self.preds else None


def interval_iou(a: EventInterval, b: EventInterval) -> float:
    """Temporal intersection-over-union of two same-kind intervals."""
    if a.kind is not b.kind:
        raise ValueError(f"cannot compare intervals of kind {a.kind} and {b.kind}")
    inter = min(a.end_sec, b.end_sec) - max(a.start_sec, b.start_sec)
    if inter <= 0:
        return 0.0
    union = a.duration + b.duration - inter
    return inter / union


def _check_one_kind(intervals: Iterable[EventInterval]) -> None:
    kinds = {iv.kind for iv in intervals}
    if len(kinds) > 1:
        raise ValueError(f"intervals must be partitioned by kind before scoring, got {kinds}")


def instance_metrics(
    truth: Sequence[EventInterval], pred: Sequence[EventInterval], cfg: MetricConfig
) -> DetectionCounts:
    """Score one kind's predicted intervals against the truth by IOU.

    A truth instance counts as detected when its best-IOU prediction
    reaches ``cfg.iou_threshold``; a prediction counts as a false alarm
    when its best-IOU truth stays below it. Matching is non-exclusive by
    default; ``cfg.exclusive_instances`` switches to greedy one-to-one
    assignment by descending IOU.
    """
    _check_one_kind(list(truth) + list(pred))
    thr = cfg.iou_threshold
    if cfg.exclusive_instances:
        return _exclusive_counts(truth, pred, thr)
    detected = sum(
        1
        for t in truth
        if max((interval_iou(t, p) for p in pred), default=0.0) >= thr
    )
    false_alarms = sum(
        1
        for p in pred
        if max((interval_iou(t, p) for t in truth), default=0.0) < thr
    )
    return DetectionCounts(detected, len(truth), false_alarms, len(pred))


def _exclusive_counts(truth, pred, thr) -> DetectionCounts:
    pairs = sorted(
        (
            (interval_iou(t, p), ti, pi)
            for ti, t in enumerate(truth)
            for pi, p in enumerate(pred)
        ),
        key=lambda x: (-x[0], x[1], x[2]),
    )
    used_t: set[int] = set()
    used_p: set[int] = set()
    detected = 0
    for iou, ti, pi in pairs:
        if iou < thr:
            break
        if ti in used_t or pi in used_p:
            continue
        used_t.add(ti)
        used_p.add(pi)
        detected += 1
    return DetectionCounts(detected, len(truth), len(pred) - len(used_p), len(pred))


def intervals_to_frames(
    intervals: Sequence[EventInterval], n_frames: int, fps: float
) -> np.ndarray:
    """Rasterize intervals onto a constant-rate frame grid.

    Frame ``i`` is positive when its timestamp ``i/fps`` lies in
    ``[start, end)`` of any interval. Boundaries within 1 ns resolve
    toward inclusion at the start and exclusion at the end, so linked
    intervals rasterize back to exactly their nominated frames.
    """
    out = np.zeros(n_frames, dtype=bool)
    guard = 1e-9
    for iv in intervals:
        lo = max(0, int(math.floor(iv.start_sec * fps)) - 1)
        hi = min(n_frames, int(math.ceil(iv.end_sec * fps)) + 2)
        for i in range(lo, hi):
            t = i / fps
            if iv.start_sec - guard <= t < iv.end_sec - guard:
                out[i] = True
    return out


def segment_metrics(
    truth_seq: Sequence[bool], pred_seq: Sequence[bool], cfg: MetricConfig
) -> DetectionCounts:
    """Compare fixed-length segments of binarized truth/prediction sequences.

    A segment is positive when its fraction of positive frames strictly
    exceeds ``cfg.segment_match_rate``; the final partial segment is
    evaluated at its actual length.
    """
    truth = np.asarray(truth_seq, dtype=bool)
    pred = np.asarray(pred_seq, dtype=bool)
    if truth.shape != pred.shape or truth.ndim != 1:
        raise ValueError(
            f"sequences must be 1-d and equally long, got {truth.shape} vs {pred.shape}"
        )
    size = cfg.segment_frames
    rate = cfg.segment_match_rate
    detected = truths = false_alarms = preds = 0
    for start in range(0, len(truth), size):
        t_seg = truth[start : start + size]
        p_seg = pred[start : start + size]
        t_pos = t_seg.sum() / len(t_seg) > rate
        p_pos = p_seg.sum() / len(p_seg) > rate
        if t_pos:
            truths += 1
            if p_pos:
                detected += 1
        if p_pos:
            preds += 1
            if not t_pos:
                false_alarms += 1
    return DetectionCounts(detected, truths, false_alarms, preds)


# --- video level ------------------------------------------------------------

@dataclass(frozen=True)
class VideoScore:
    """Per-field confusion counts with Suspicious as the positive class."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "VideoScore") -> "VideoScore":
        return VideoScore(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    @property
    def precision_defined(self) -> bool:
        return self.tp + self.fp > 0

    @property
    def recall_defined(self) -> bool:
        return self.tp + self.fn > 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.precision_defined else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.recall_defined else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0


Sample = tuple[Sequence[EventInterval], AnalysisReport]


def video_metrics(samples: Sequence[Sample]) -> dict[str, VideoScore]:
    """One binary label per video per field, reduced to confusion counts.

    A video is truth-positive for a field when it carries at least one
    truth interval of that kind, and prediction-positive when the field
    decision is Suspicious. The ``overall`` row compares the video-level
    final label against the presence of any truth interval.
    """
    if not samples:
        raise ValueError("video_metrics requires at least one sample")
    scores: dict[str, VideoScore] = {kind.value: VideoScore() for kind in EventKind}
    scores[OVERALL] = VideoScore()

    def bump(key: str, truth_pos: bool, pred_pos: bool):
        delta = VideoScore(
            tp=int(truth_pos and pred_pos),
            fp=int(not truth_pos and pred_pos),
            fn=int(truth_pos and not pred_pos),
            tn=int(not truth_pos and not pred_pos),
        )
        scores[key] = scores[key] + delta

    for truth, report in samples:
        for kind in EventKind:
            truth_pos = any(iv.kind is kind for iv in truth)
            pred_pos = report.decision(kind).label is Label.SUSPICIOUS
            bump(kind.value, truth_pos, pred_pos)
        bump(OVERALL, len(truth) > 0, report.overall is Label.SUSPICIOUS)
    return scores


# --- aggregate evaluation ----------------------------------------------------

@dataclass(frozen=True)
class MetricReport:
    """Pooled metric results over a set of evaluated videos."""

    instance: Mapping[EventKind, DetectionCounts]
    segment: Mapping[float, Mapping[EventKind, DetectionCounts]]
    video: Mapping[str, VideoScore]
    config: MetricConfig
    segment_lens: tuple[float, ...]
    n_videos: int = 0


def partition_by_kind(intervals: Iterable[EventInterval]) -> dict[EventKind, list[EventInterval]]:
    out: dict[EventKind, list[EventInterval]] = {kind: [] for kind in EventKind}
    for iv in intervals:
        out[iv.kind].append(iv)
    return out


def evaluate_samples(
    samples: Sequence[Sample],
    cfg: MetricConfig,
    segment_lens: Sequence[float] = (1.0, 3.0),
) -> MetricReport:
    """Score all three metric families over (truth, report) pairs.

    Instance and segment counts are pooled across videos before rates are
    formed; video metrics reduce each sample to one label per field.
    """
    if not samples:
        raise ValueError("evaluate_samples requires at least one sample")
    instance: dict[EventKind, DetectionCounts] = {k: DetectionCounts() for k in EventKind}
    segment: dict[float, dict[EventKind, DetectionCounts]] = {
        float(s): {k: DetectionCounts() for k in EventKind} for s in segment_lens
    }
    for truth, report in samples:
        truth_by_kind = partition_by_kind(truth)
        for kind in EventKind:
            pred_iv = report.decision(kind).intervals
            instance[kind] = instance[kind] + instance_metrics(
                truth_by_kind[kind], pred_iv, cfg
            )
            truth_seq = intervals_to_frames(truth_by_kind[kind], report.frame_count, cfg.fps)
            pred_seq = intervals_to_frames(pred_iv, report.frame_count, cfg.fps)
            for seg_len in segment:
                seg_cfg = replace(cfg, segment_len_sec=seg_len)
                segment[seg_len][kind] = segment[seg_len][kind] + segment_metrics(
                    truth_seq, pred_seq, seg_cfg
                )
    return MetricReport(
        instance=instance,
        segment=segment,
        video=video_metrics(samples),
        config=cfg,
        segment_lens=tuple(float(s) for s in segment_lens),
        n_videos=len(samples),
    )


def _rate(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.3f}"


def format_tables(report: MetricReport) -> str:
    """Human-readable tables: one per metric family, fields as rows."""
    lines: list[str] = []
    names = {
        EventKind.ANOTHER_PERSON: "Another person",
        EventKind.DEVICE: "Device",
        EventKind.ABSENCE: "Absence",
    }
    lines.append(f"Instance metrics (IOU threshold {report.config.iou_threshold:g})")
    lines.append(f"{'':16} {'TDR':>8} {'FAR':>8}")
    for kind in EventKind:
        c = report.instance[kind]
        lines.append(f"{names[kind]:16} {_rate(c.tdr):>8} {_rate(c.far):>8}")
    for seg_len in report.segment_lens:
        lines.append("")
        lines.append(
            f"Segment metrics ({seg_len:g} s segments, "
            f"match rate {report.config.segment_match_rate:g})"
        )
        lines.append(f"{'':16} {'TDR':>8} {'FAR':>8}")
        for kind in EventKind:
            c = report.segment[seg_len][kind]
            lines.append(f"{names[kind]:16} {_rate(c.tdr):>8} {_rate(c.far):>8}")
    lines.append("")
    lines.append(f"Video metrics ({report.n_videos} videos)")
    lines.append(f"{'':16} {'Precision':>10} {'Recall':>8} {'F1':>8}")
    for key in [k.value for k in EventKind] + [OVERALL]:
        s = report.video[key]
        label = "Overall cheating" if key == OVERALL else names[EventKind(key)]
        prec = f"{s.precision:.3f}" if s.precision_defined else "n/a"
        rec = f"{s.recall:.3f}" if s.recall_defined else "n/a"
        lines.append(f"{label:16} {prec:>10} {rec:>8} {s.f1:>8.3f}")
    return "\n".join(lines) + "\n"


def metric_report_to_dict(report: MetricReport) -> dict:
    """Machine-readable form of a MetricReport."""

    def counts(c: DetectionCounts) -> dict:
        return {
            "tdr": c.tdr,
            "far": c.far,
            "detected": c.detected,
            "truths": c.truths,
            "false_alarms": c.false_alarms,
            "preds": c.preds,
        }

    def video(s: VideoScore) -> dict:
        return {
            "precision": s.precision if s.precision_defined else None,
            "recall": s.recall if s.recall_defined else None,
            "f1": s.f1,
            "tp": s.tp,
            "fp": s.fp,
            "fn": s.fn,
            "tn": s.tn,
        }

    return {
        "schema": "proctorlens/metrics-v1",
        "n_videos": report.n_videos,
        "iou_threshold": report.config.iou_threshold,
        "segment_match_rate": report.config.segment_match_rate,
        "exclusive_instances": report.config.exclusive_instances,
        "fps": report.config.fps,
        "instance": {k.value: counts(report.instance[k]) for k in EventKind},
        "segment": {
            f"{seg_len:g}": {k.value: counts(report.segment[seg_len][k]) for k in EventKind}
            for seg_len in report.segment_lens
        },
        "video": {key: video(score) for key, score in report.video.items()},
    }
