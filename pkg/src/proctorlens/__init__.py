"""Cheating-event analysis engine and evaluation harness for exam videos."""

from proctorlens.analyzer import CheatingAnalyzer
from proctorlens.events import (
    AnalysisReport,
    DecisionAccumulator,
    FieldDecision,
    FrameVerdict,
    Label,
    decide,
    link_frames,
    nominate_frame,
    read_report,
    write_report,
)
from proctorlens.face_match import (
    FaceMatchResult,
    FrameMatch,
    classify_faces,
    frame_face_distance,
    masked_distance,
)
from proctorlens.metrics import (
    DetectionCounts,
    MetricConfig,
    MetricReport,
    VideoScore,
    evaluate_samples,
    instance_metrics,
    interval_iou,
    intervals_to_frames,
    segment_metrics,
    video_metrics,
)
from proctorlens.records import (
    BoundingBox,
    EngineConfig,
    EventInterval,
    EventKind,
    FaceObservation,
    FrameRecord,
    ObjectClass,
    ObjectObservation,
    OrderingError,
    ParseError,
    TrackerState,
    ValidationError,
    read_config,
    read_labels,
    read_record_stream,
    write_labels,
    write_record_stream,
)
from proctorlens.registration import CandidateGallery, RegistrationFailed, register_candidate
from proctorlens.simulate import NoiseProfile, Scenario, generate, sweep
from proctorlens.tracking import ReconciledFrame, reconcile

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "BoundingBox",
    "CandidateGallery",
    "CheatingAnalyzer",
    "DecisionAccumulator",
    "DetectionCounts",
    "EngineConfig",
    "EventInterval",
    "EventKind",
    "FaceMatchResult",
    "FaceObservation",
    "FieldDecision",
    "FrameMatch",
    "FrameRecord",
    "FrameVerdict",
    "Label",
    "MetricConfig",
    "MetricReport",
    "NoiseProfile",
    "ObjectClass",
    "ObjectObservation",
    "OrderingError",
    "ParseError",
    "ReconciledFrame",
    "RegistrationFailed",
    "Scenario",
    "TrackerState",
    "ValidationError",
    "VideoScore",
    "classify_faces",
    "decide",
    "evaluate_samples",
    "frame_face_distance",
    "generate",
    "instance_metrics",
    "interval_iou",
    "intervals_to_frames",
    "link_frames",
    "masked_distance",
    "nominate_frame",
    "read_config",
    "read_labels",
    "read_record_stream",
    "read_report",
    "reconcile",
    "register_candidate",
    "segment_metrics",
    "sweep",
    "video_metrics",
    "write_labels",
    "write_record_stream",
    "write_report",
]
