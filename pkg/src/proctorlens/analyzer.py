"""Estimator-style front end binding the full analysis pipeline.

``CheatingAnalyzer`` follows the scikit-learn protocol: construction takes
the engine thresholds as parameters (``get_params``/``set_params``/``clone``
all work), ``fit`` registers the candidate gallery from the opening window
of a record stream, and ``predict`` reduces a stream to an AnalysisReport.
``analyze`` does both in a single bounded-memory pass, which is what the
CLI uses.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator

from sklearn.base import BaseEstimator

from proctorlens.events import AnalysisReport, DecisionAccumulator, FrameVerdict, nominate_frame
from proctorlens.face_match import classify_faces
from proctorlens.records import EngineConfig, FrameRecord, OrderingError
from proctorlens.registration import register_candidate
from proctorlens.tracking import reconcile


def ensure_ordered(records: Iterable[FrameRecord]) -> Iterator[FrameRecord]:
    """Pass records through, enforcing strictly increasing index/timestamp."""
    prev_index = -1
    prev_ts = float("-inf")
    for record in records:
        if record.index <= prev_index or record.timestamp_sec <= prev_ts:
            raise OrderingError(
                f"record stream not strictly ordered at frame {record.index} "
                f"(t={record.timestamp_sec})"
            )
        prev_index = record.index
        prev_ts = record.timestamp_sec
        yield record


class CheatingAnalyzer(BaseEstimator):
    """Detects another-person, device and absence events in a record stream.

    Parameters mirror EngineConfig: distance/confidence thresholds, the
    registration window, temporal linking gap, head-pose limits, tracker
    thresholds and the stream frame rate. See EngineConfig for defaults.

    Attributes
    ----------
    gallery_ : CandidateGallery
        Registered candidate encodings, available after ``fit`` or
        ``analyze``.
    """

    def __init__(
        self,
        registration_window_sec: float = 20.0,
        face_distance_threshold: float = 0.65,
        body_conf_threshold: float = 0.65,
        device_conf_threshold: float = 0.30,
        partial_epsilon: float = 0.01,
        absence_ratio_limit: float = 0.05,
        link_gap_sec: float = 2.0,
        yaw_limit_deg: float = 30.0,
        pitch_limit_deg: float = 20.0,
        tracker_min_confidence: float = 7.0,
        tracker_divergence_frac: float = 0.2,
        fps: float = 3.0,
        single_candidate: bool = True,
    ):
        self.registration_window_sec = registration_window_sec
        self.face_distance_threshold = face_distance_threshold
        self.body_conf_threshold = body_conf_threshold
        self.device_conf_threshold = device_conf_threshold
        self.partial_epsilon = partial_epsilon
        self.absence_ratio_limit = absence_ratio_limit
        self.link_gap_sec = link_gap_sec
        self.yaw_limit_deg = yaw_limit_deg
        self.pitch_limit_deg = pitch_limit_deg
        self.tracker_min_confidence = tracker_min_confidence
        self.tracker_divergence_frac = tracker_divergence_frac
        self.fps = fps
        self.single_candidate = single_candidate

    @classmethod
    def from_config(cls, cfg: EngineConfig) -> "CheatingAnalyzer":
        return cls(**{name: getattr(cfg, name) for name in EngineConfig.field_names()})

    def config(self) -> EngineConfig:
        """Validated EngineConfig snapshot of the current parameters."""
        return EngineConfig(**self.get_params())

    def fit(self, records: Iterable[FrameRecord], y=None) -> "CheatingAnalyzer":
        """Register the candidate gallery from the opening window.

        Raises RegistrationFailed when no qualifying face appears before
        the window closes.
        """
        cfg = self.config()
        self.gallery_ = register_candidate(ensure_ordered(records), cfg)
        return self

    def score_frames(self, records: Iterable[FrameRecord]) -> Iterator[FrameVerdict]:
        """Yield one FrameVerdict per record using the fitted gallery."""
        self._check_fitted()
        cfg = self.config()
        gallery = self.gallery_
        for record in ensure_ordered(records):
            match = classify_faces(record, gallery, cfg)
            rec = reconcile(record, match, cfg)
            yield nominate_frame(record, rec, cfg)

    def predict(self, records: Iterable[FrameRecord], keep_per_frame: bool = True) -> AnalysisReport:
        """Reduce a record stream to an AnalysisReport with the fitted gallery."""
        acc = DecisionAccumulator(self.config(), keep_per_frame=keep_per_frame)
        for verdict in self.score_frames(records):
            acc.add(verdict)
        return acc.finalize()

    def fit_predict(self, records: Iterable[FrameRecord], y=None) -> AnalysisReport:
        records = list(records)
        return self.fit(records).predict(records)

    def analyze(self, records: Iterable[FrameRecord], keep_per_frame: bool = False) -> AnalysisReport:
        """Single-pass registration plus analysis over one stream.

        Buffers only the registration window (plus one look-ahead record),
        then scores buffered and remaining frames alike, so memory stays
        bounded for arbitrarily long streams unless ``keep_per_frame``
        retains the verdict table.
        """
        cfg = self.config()
        stream = ensure_ordered(records)
        head: list[FrameRecord] = []
        lookahead: list[FrameRecord] = []
        for record in stream:
            if record.timestamp_sec >= cfg.registration_window_sec:
                lookahead.append(record)
                break
            head.append(record)
        self.gallery_ = register_candidate(head, cfg)
        acc = DecisionAccumulator(cfg, keep_per_frame=keep_per_frame)
        for verdict in self.score_frames(itertools.chain(head, lookahead, stream)):
            acc.add(verdict)
        return acc.finalize()

    def _check_fitted(self):
        if not hasattr(self, "gallery_"):
            raise RuntimeError("analyzer is not fitted; call fit() or analyze() first")
