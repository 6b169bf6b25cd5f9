"""Candidate registration from the opening window of a stream.

Every face observed before the registration window closes and facing the
screen within the configured yaw/pitch limits is added to the candidate
gallery; all later identity decisions compare against this gallery.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from proctorlens.records import EngineConfig, FaceEncoding, FrameRecord


class RegistrationFailed(RuntimeError):
    """No qualifying candidate face in the registration window."""


@dataclass(frozen=True)
class CandidateGallery:
    """Registered candidate encodings and the frames they came from."""

    encodings: tuple[FaceEncoding, ...]
    source_frames: tuple[int, ...]
    window_end_sec: float

    def __post_init__(self):
        if not self.encodings:
            raise ValueError("gallery must contain at least one encoding")
        if len(self.encodings) != len(self.source_frames):
            raise ValueError("one source frame index is required per encoding")

    def __len__(self) -> int:
        return len(self.encodings)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Gallery as an (n, 128) float64 array, cached for distance math."""
        out = np.asarray(self.encodings, dtype=np.float64)
        out.setflags(write=False)
        return out


def register_candidate(records: Iterable[FrameRecord], cfg: EngineConfig) -> CandidateGallery:
    """Collect candidate encodings from frames before the window closes.

    A face qualifies when its frame timestamp is below
    ``cfg.registration_window_sec`` and both head-pose angles are within the
    configured limits. Frames with several qualifying faces contribute all
    of them. Raises RegistrationFailed when nothing qualifies; the stream
    is then not analyzable.
    """
    encodings: list[FaceEncoding] = []
    source_frames: list[int] = []
    for record in records:
        if record.timestamp_sec >= cfg.registration_window_sec:
            break
        for face in record.faces:
            if abs(face.yaw_deg) > cfg.yaw_limit_deg:
                continue
            if abs(face.pitch_deg) > cfg.pitch_limit_deg:
                continue
            encodings.append(face.encoding)
            source_frames.append(record.index)
    if not encodings:
        raise RegistrationFailed(
            f"no candidate face with |yaw| <= {cfg.yaw_limit_deg} and "
            f"|pitch| <= {cfg.pitch_limit_deg} found in the first "
            f"{cfg.registration_window_sec:g} seconds"
        )
    return CandidateGallery(
        encodings=tuple(encodings),
        source_frames=tuple(source_frames),
        window_end_sec=cfg.registration_window_sec,
    )
