"""Shared builders for engine objects used across the test suite."""

from __future__ import annotations

import math

from proctorlens.records import (
    BoundingBox,
    EngineConfig,
    FaceObservation,
    FrameRecord,
    ObjectClass,
    ObjectObservation,
    TrackerState,
)

DEFAULT_CFG = EngineConfig()


def const_encoding(value: float = 0.5) -> tuple[float, ...]:
    return (value,) * 128


def shifted_encoding(base: tuple[float, ...], index: int, delta: float) -> tuple[float, ...]:
    out = list(base)
    out[index] += delta
    return tuple(out)


def make_face(encoding, x=100.0, y=80.0, w=50.0, h=50.0, yaw=0.0, pitch=0.0) -> FaceObservation:
    return FaceObservation(
        box=BoundingBox(x, y, w, h), encoding=tuple(encoding), yaw_deg=yaw, pitch_deg=pitch
    )


def make_body(conf: float, x=50.0, y=50.0, w=200.0, h=300.0) -> ObjectObservation:
    return ObjectObservation(cls=ObjectClass.BODY, box=BoundingBox(x, y, w, h), confidence=conf)


def make_device(conf: float, cls=ObjectClass.PHONE, x=400.0, y=300.0, w=60.0, h=40.0):
    return ObjectObservation(cls=cls, box=BoundingBox(x, y, w, h), confidence=conf)


def make_tracker(x=100.0, y=80.0, w=50.0, h=50.0, conf=10.0, active=True) -> TrackerState:
    return TrackerState(box=BoundingBox(x, y, w, h), confidence=conf, active=active)


INACTIVE = TrackerState(box=None, confidence=0.0, active=False)


def make_frame(
    index: int,
    t: float | None = None,
    faces=(),
    objects=(),
    tracker: TrackerState = INACTIVE,
    w: int = 640,
    h: int = 480,
    fps: float = 3.0,
) -> FrameRecord:
    return FrameRecord(
        index=index,
        timestamp_sec=index / fps if t is None else t,
        frame_w=w,
        frame_h=h,
        faces=tuple(faces),
        objects=tuple(objects),
        tracker=tracker,
    )


# --- independent oracles ------------------------------------------------------

def oracle_masked_distance(f_s, f_t, eps: float) -> float:
    """Scalar-loop reference for the partial-matching distance."""
    acc = 0.0
    for a, b in zip(f_s, f_t):
        if abs(b) >= eps:
            d = a - b
            acc += d * d
    return math.sqrt(acc)


def oracle_gallery_best(encodings, f_t, eps: float) -> tuple[float, int]:
    """Double-loop reference for the gallery minimum distance."""
    best_d = math.inf
    best_i = -1
    for i, enc in enumerate(encodings):
        d = oracle_masked_distance(enc, f_t, eps)
        if d < best_d:
            best_d = d
            best_i = i
    return best_d, best_i


def oracle_link_intervals(timestamps, gap: float, period: float) -> list[tuple[float, float]]:
    """All-pairs transitive grouping of nominated timestamps.

    Union-find over every pair within the gap, independent of the engine's
    single scan; O(n^2), for modest n only.
    """
    ts = list(timestamps)
    n = len(ts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(ts[i] - ts[j]) <= gap:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[float]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(ts[i])
    intervals = sorted((min(g), max(g) + period) for g in groups.values())
    return intervals


def oracle_segment_counts(truth_seq, pred_seq, seg_frames: int, rate: float):
    """Explicit segment enumeration; returns (detected, truths, false_alarms, preds)."""
    detected = truths = false_alarms = preds = 0
    for start in range(0, len(truth_seq), seg_frames):
        t_seg = list(truth_seq[start : start + seg_frames])
        p_seg = list(pred_seq[start : start + seg_frames])
        t_pos = sum(t_seg) / len(t_seg) > rate
        p_pos = sum(p_seg) / len(p_seg) > rate
        truths += t_pos
        preds += p_pos
        detected += t_pos and p_pos
        false_alarms += p_pos and not t_pos
    return detected, truths, false_alarms, preds
