"""Reconciliation of face-detection results with the correlation tracker.

The tracker assists detection: when no face matched the candidate but the
tracker is still confidently locked on, the candidate is considered
present. When both a candidate face and a tracker box exist but lie far
apart relative to the frame diagonal, the frame is flagged as carrying an
extra face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from proctorlens.face_match import FrameMatch
from proctorlens.records import EngineConfig, FrameRecord


@dataclass(frozen=True)
class ReconciledFrame:
    """Per-frame candidate presence after tracker reconciliation.

    ``face_distance`` carries the frame's minimum gallery distance (None
    when the frame had no faces) for reporting and plotting.
    """

    candidate_present: bool
    other_face_count: int
    tracker_used: bool
    divergence_flag: bool
    face_distance: float | None = None


def reconcile(frame: FrameRecord, match: FrameMatch, cfg: EngineConfig) -> ReconciledFrame:
    """Apply tracker-assist and detector/tracker divergence rules.

    Tracker state with confidence below ``cfg.tracker_min_confidence`` is
    treated as inactive. Reconciliation never withdraws a detected
    candidate: the tracker can only assert presence or add an extra face
    via the divergence rule.
    """
    face_distance = min((r.distance for r in match.results), default=None)
    tracker = frame.tracker
    tracker_live = tracker.active and tracker.confidence >= cfg.tracker_min_confidence

    if not match.candidate_found:
        if tracker_live:
            return ReconciledFrame(
                candidate_present=True,
                other_face_count=match.other_face_count,
                tracker_used=True,
                divergence_flag=False,
                face_distance=face_distance,
            )
        return ReconciledFrame(
            candidate_present=False,
            other_face_count=match.other_face_count,
            tracker_used=False,
            divergence_flag=False,
            face_distance=face_distance,
        )

    divergence = False
    other = match.other_face_count
    if tracker_live and match.candidate_index is not None:
        fx, fy = frame.faces[match.candidate_index].box.center
        tx, ty = tracker.box.center
        if math.hypot(fx - tx, fy - ty) > cfg.tracker_divergence_frac * frame.diagonal:
            divergence = True
            other += 1
    return ReconciledFrame(
        candidate_present=True,
        other_face_count=other,
        tracker_used=False,
        divergence_flag=divergence,
        face_distance=face_distance,
    )
