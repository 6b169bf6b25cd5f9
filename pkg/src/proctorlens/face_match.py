"""Face-identity matching against the registered candidate gallery.

The distance between a registered encoding and an observed one is a
partial-matching Frobenius norm: encoding components whose magnitude in the
*observed* vector falls below epsilon are treated as unseen (typically a
partially visible face) and contribute nothing. A frame's face distance is
the minimum over the whole gallery, and faces above the distance threshold
are flagged as belonging to another person.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from proctorlens.records import ENCODING_DIM, EngineConfig, FrameRecord
from proctorlens.registration import CandidateGallery


@dataclass(frozen=True)
class FaceMatchResult:
    """Gallery distance of one observed face.

    ``is_candidate`` records whether the face passed the distance threshold,
    i.e. is consistent with the registered candidate. Attribution of *the*
    candidate face (at most one per frame) happens in FrameMatch.
    """

    distance: float
    best_gallery_index: int
    is_candidate: bool


@dataclass(frozen=True)
class FrameMatch:
    """classify_faces output for one frame.

    candidate_found : bool
        At least one face passed the distance threshold.
    other_face_count : int
        Faces attributed to someone other than the candidate.
    results : tuple of FaceMatchResult
        Per-face scores, in face order.
    candidate_index : int or None
        Index into ``frame.faces`` of the face attributed to the candidate
        (minimum-distance passing face), when one was found.
    """

    candidate_found: bool
    other_face_count: int
    results: tuple[FaceMatchResult, ...]
    candidate_index: int | None


def _as_vector(encoding: Sequence[float], name: str) -> np.ndarray:
    vec = np.asarray(encoding, dtype=np.float64)
    if vec.shape != (ENCODING_DIM,):
        raise ValueError(f"{name} must have shape ({ENCODING_DIM},), got {vec.shape}")
    return vec


def masked_distance(f_s: Sequence[float], f_t: Sequence[float], epsilon: float) -> float:
    """Partial-matching distance between a registered and an observed encoding.

    Parameters
    ----------
    f_s : registered encoding (gallery side)
    f_t : observed encoding; components with ``|f_t[i]| < epsilon`` are
        masked out of the distance
    epsilon : non-negative mask threshold

    Returns
    -------
    float
        ``sqrt(sum((f_s[i] - f_t[i])**2 for unmasked i))``. Exactly zero
        for identical inputs, regardless of epsilon.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    a = _as_vector(f_s, "f_s")
    b = _as_vector(f_t, "f_t")
    diff = (a - b) * (np.abs(b) >= epsilon)
    return float(np.sqrt(diff @ diff))


def frame_face_distance(
    gallery: CandidateGallery, f_t: Sequence[float], epsilon: float
) -> tuple[float, int]:
    """Minimum masked distance from an observed face to the gallery.

    Returns the distance and the index of the closest registered encoding;
    ties resolve to the lowest gallery index.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    if len(gallery) == 0:
        raise ValueError("gallery must be non-empty")
    probe = _as_vector(f_t, "f_t")
    mask = (np.abs(probe) >= epsilon).astype(np.float64)
    diff = gallery.matrix - probe
    # einsum keeps one temporary and exact zeros for identical rows
    sq = np.einsum("ij,ij,j->i", diff, diff, mask)
    best = int(np.argmin(sq))
    return float(np.sqrt(sq[best])), best


def classify_faces(frame: FrameRecord, gallery: CandidateGallery, cfg: EngineConfig) -> FrameMatch:
    """Score every face in a frame against the gallery.

    A face passes when its distance is at or below
    ``cfg.face_distance_threshold`` (equality keeps the candidate label;
    only exceeding the threshold flags another person). With
    ``cfg.single_candidate`` enabled, at most one face is attributed to the
    candidate -- the minimum-distance passing face -- and every other face,
    passing or not, counts as another person.
    """
    results = []
    for face in frame.faces:
        distance, best = frame_face_distance(gallery, face.encoding, cfg.partial_epsilon)
        results.append(
            FaceMatchResult(
                distance=distance,
                best_gallery_index=best,
                is_candidate=distance <= cfg.face_distance_threshold,
            )
        )
    passing = [i for i, r in enumerate(results) if r.is_candidate]
    if not passing:
        return FrameMatch(
            candidate_found=False,
            other_face_count=len(results),
            results=tuple(results),
            candidate_index=None,
        )
    candidate_index = min(passing, key=lambda i: (results[i].distance, i))
    if cfg.single_candidate:
        other = len(results) - 1
    else:
        other = sum(1 for r in results if not r.is_candidate)
    return FrameMatch(
        candidate_found=True,
        other_face_count=other,
        results=tuple(results),
        candidate_index=candidate_index,
    )
