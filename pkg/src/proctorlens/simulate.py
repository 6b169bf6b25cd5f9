"""Synthetic scenario generator and detection simulator.

Scripts ground-truth cheating events and emits a matching noisy frame
record stream, giving end-to-end tests a desk-scale oracle: with all noise
at zero every scripted event is recoverable by the engine by construction.
Streams are reproducible bit-for-bit across platforms; the generator draws
from numpy's PCG64 generator seeded with ``Scenario.seed``, with a fixed
per-frame draw order that does not depend on event membership.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from typing import IO, Iterable, Sequence

import numpy as np

from proctorlens.analyzer import CheatingAnalyzer
from proctorlens.metrics import MetricConfig, MetricReport, evaluate_samples
from proctorlens.records import (
    BoundingBox,
    EngineConfig,
    EventInterval,
    EventKind,
    FaceObservation,
    FrameRecord,
    ObjectClass,
    ObjectObservation,
    ParseError,
    TrackerState,
    ValidationError,
    check_no_same_kind_overlap,
)

FRAME_W = 400
FRAME_H = 300

SCENARIO_SCHEMA = "proctorlens/scenario-v1"


@dataclass(frozen=True)
class NoiseProfile:
    """Detector-imperfection knobs applied on top of a scripted scenario."""

    encoding_jitter_sigma: float = 0.0
    miss_prob: float = 0.0
    false_face_prob: float = 0.0
    confidence_jitter_sigma: float = 0.0
    tracker_dropout_prob: float = 0.0

    def __post_init__(self):
        for name in ("miss_prob", "false_face_prob", "tracker_dropout_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]: {v}")
        for name in ("encoding_jitter_sigma", "confidence_jitter_sigma"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")


@dataclass(frozen=True)
class Scenario:
    """A scripted recording: duration, frame rate, seed, events and noise."""

    duration_sec: float
    fps: float = 3.0
    seed: int = 0
    events: tuple[EventInterval, ...] = ()
    noise: NoiseProfile = NoiseProfile()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.duration_sec <= 0:
            raise ValidationError(f"duration_sec must be positive: {self.duration_sec}")
        if self.fps <= 0:
            raise ValidationError(f"fps must be positive: {self.fps}")
        for iv in self.events:
            if iv.start_sec < 0 or iv.end_sec > self.duration_sec:
                raise ValidationError(
                    f"events must lie within [0, {self.duration_sec}]: "
                    f"[{iv.start_sec}, {iv.end_sec}]"
                )
        check_no_same_kind_overlap(self.events)

    @property
    def n_frames(self) -> int:
        return int(round(self.duration_sec * self.fps))


def _sample_encoding(rng: np.random.Generator) -> np.ndarray:
    # component magnitudes stay well above the partial-matching epsilon so
    # zero-noise distances are free of masking effects
    signs = rng.integers(0, 2, size=128) * 2 - 1
    return signs * rng.uniform(0.02, 0.6, size=128)


def _covering(intervals: Sequence[EventInterval], t: float) -> EventInterval | None:
    for iv in intervals:
        if iv.start_sec <= t < iv.end_sec:
            return iv
    return None


def generate(
    scenario: Scenario, cfg: EngineConfig | None = None
) -> tuple[list[FrameRecord], list[EventInterval]]:
    """Emit the scripted record stream plus its echoed ground truth.

    The candidate's base encoding is fixed per seed; a second person's base
    encoding is sampled at Euclidean distance greater than twice the face
    distance threshold, so the zero-noise stream separates cleanly. During
    absence events both the candidate's face and body disappear and the
    tracker deactivates; device events add a phone/laptop observation with
    confidence around 0.6.
    """
    cfg = cfg or EngineConfig()
    rng = np.random.Generator(np.random.PCG64(scenario.seed))
    noise = scenario.noise

    candidate = _sample_encoding(rng)
    min_sep = 2.0 * cfg.face_distance_threshold
    for _ in range(100):
        other = _sample_encoding(rng)
        if float(np.linalg.norm(candidate - other)) > min_sep:
            break
    else:  # pragma: no cover - 128-d draws essentially never collide
        raise RuntimeError("could not sample a distinct second-person encoding")

    by_kind = {kind: [iv for iv in scenario.events if iv.kind is kind] for kind in EventKind}
    # per-event appearance mode for the second person: 0 face+body, 1 face, 2 body
    ap_variants = {iv: int(rng.integers(0, 3)) for iv in by_kind[EventKind.ANOTHER_PERSON]}
    device_classes = {
        iv: (ObjectClass.PHONE if rng.integers(0, 2) == 0 else ObjectClass.LAPTOP)
        for iv in by_kind[EventKind.DEVICE]
    }

    records: list[FrameRecord] = []
    for i in range(scenario.n_frames):
        t = i / scenario.fps
        # fixed draw order per frame keeps streams byte-identical per seed
        r_miss_candidate = rng.random()
        r_miss_other = rng.random()
        r_dropout = rng.random()
        r_false_face = rng.random()
        jitter_candidate = rng.standard_normal(128)
        jitter_other = rng.standard_normal(128)
        false_encoding = rng.standard_normal(128) * 0.3
        yaw = rng.uniform(-10.0, 10.0)
        pitch = rng.uniform(-8.0, 8.0)
        wobble_x, wobble_y = rng.uniform(-2.0, 2.0, size=2)
        body_conf = rng.uniform(0.80, 0.95)
        other_body_conf = rng.uniform(0.75, 0.95)
        device_conf = rng.uniform(0.50, 0.70)
        conf_jitter = rng.standard_normal(3)
        tracker_conf_live = rng.uniform(9.0, 14.0)
        tracker_conf_dead = rng.uniform(0.0, 3.0)

        absent = _covering(by_kind[EventKind.ABSENCE], t) is not None
        ap_event = _covering(by_kind[EventKind.ANOTHER_PERSON], t)
        device_event = _covering(by_kind[EventKind.DEVICE], t)

        def conf(base: float, j: float) -> float:
            return float(np.clip(base + j * noise.confidence_jitter_sigma, 0.0, 1.0))

        faces: list[FaceObservation] = []
        objects: list[ObjectObservation] = []

        candidate_box = BoundingBox(160.0 + wobble_x, 80.0 + wobble_y, 80.0, 80.0)
        if not absent and r_miss_candidate >= noise.miss_prob:
            enc = candidate + noise.encoding_jitter_sigma * jitter_candidate
            faces.append(FaceObservation(candidate_box, tuple(enc), yaw, pitch))
        if not absent:
            objects.append(
                ObjectObservation(
                    ObjectClass.BODY,
                    BoundingBox(120.0, 60.0, 160.0, 220.0),
                    conf(body_conf, conf_jitter[0]),
                )
            )

        if ap_event is not None:
            variant = ap_variants[ap_event]
            if variant in (0, 1) and r_miss_other >= noise.miss_prob:
                enc = other + noise.encoding_jitter_sigma * jitter_other
                faces.append(
                    FaceObservation(BoundingBox(40.0, 90.0, 70.0, 70.0), tuple(enc), yaw, pitch)
                )
            if variant in (0, 2):
                objects.append(
                    ObjectObservation(
                        ObjectClass.BODY,
                        BoundingBox(10.0, 60.0, 140.0, 230.0),
                        conf(other_body_conf, conf_jitter[1]),
                    )
                )

        if device_event is not None:
            dev_cls = device_classes[device_event]
            dev_box = (
                BoundingBox(250.0, 180.0, 60.0, 40.0)
                if dev_cls is ObjectClass.PHONE
                else BoundingBox(230.0, 170.0, 120.0, 90.0)
            )
            objects.append(ObjectObservation(dev_cls, dev_box, conf(device_conf, conf_jitter[2])))

        if r_false_face < noise.false_face_prob:
            faces.append(
                FaceObservation(
                    BoundingBox(300.0, 40.0, 50.0, 50.0), tuple(false_encoding), yaw, pitch
                )
            )

        if absent or r_dropout < noise.tracker_dropout_prob:
            tracker = TrackerState(box=None, confidence=float(tracker_conf_dead), active=False)
        else:
            tracker = TrackerState(
                box=BoundingBox(160.0, 80.0, 80.0, 80.0),
                confidence=float(tracker_conf_live),
                active=True,
            )

        records.append(
            FrameRecord(
                index=i,
                timestamp_sec=t,
                frame_w=FRAME_W,
                frame_h=FRAME_H,
                faces=tuple(faces),
                objects=tuple(objects),
                tracker=tracker,
            )
        )
    return records, list(scenario.events)


@dataclass(frozen=True)
class SweepPoint:
    """One noise grid point and the metrics it produced."""

    noise: NoiseProfile
    metrics: MetricReport


def sweep(
    template: Scenario,
    noise_points: Iterable[NoiseProfile],
    seeds: Sequence[int] | None = None,
    engine_cfg: EngineConfig | None = None,
    metric_cfg: MetricConfig | None = None,
    segment_lens: Sequence[float] = (1.0, 3.0),
) -> list[SweepPoint]:
    """Evaluate the scenario template across a noise grid.

    Each noise point regenerates the template per seed, analyzes the
    streams and pools the metric families; results are deterministic for a
    fixed seed list.
    """
    seeds = tuple(seeds) if seeds is not None else (template.seed,)
    engine_cfg = engine_cfg or EngineConfig(fps=template.fps)
    metric_cfg = metric_cfg or MetricConfig(fps=template.fps)
    rows: list[SweepPoint] = []
    for noise in noise_points:
        samples = []
        for seed in seeds:
            scn = replace(template, noise=noise, seed=seed)
            records, truth = generate(scn, engine_cfg)
            report = CheatingAnalyzer.from_config(engine_cfg).analyze(iter(records))
            samples.append((truth, report))
        rows.append(SweepPoint(noise=noise, metrics=evaluate_samples(samples, metric_cfg, segment_lens)))
    return rows


# --- scenario files ---------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "schema": SCENARIO_SCHEMA,
        "duration_sec": scenario.duration_sec,
        "fps": scenario.fps,
        "seed": scenario.seed,
        "events": [
            {"kind": iv.kind.value, "start_sec": iv.start_sec, "end_sec": iv.end_sec}
            for iv in scenario.events
        ],
        "noise": {f.name: getattr(scenario.noise, f.name) for f in fields(NoiseProfile)},
    }


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ValidationError("scenario must be a JSON object")
    for key in ("duration_sec",):
        if key not in data:
            raise ValidationError(f"scenario missing required field {key!r}")
    events = []
    for entry in data.get("events", []):
        try:
            kind = EventKind(entry["kind"])
        except (KeyError, ValueError):
            raise ValidationError(f"event field 'kind' invalid in {entry!r}") from None
        try:
            events.append(
                EventInterval(kind=kind, start_sec=entry["start_sec"], end_sec=entry["end_sec"])
            )
        except KeyError as exc:
            raise ValidationError(f"event field {exc.args[0]!r} missing in {entry!r}") from None
    noise_data = data.get("noise", {})
    known = {f.name for f in fields(NoiseProfile)}
    unknown = set(noise_data) - known
    if unknown:
        raise ValidationError(f"unknown noise field(s): {sorted(unknown)}")
    try:
        return Scenario(
            duration_sec=data["duration_sec"],
            fps=data.get("fps", 3.0),
            seed=int(data.get("seed", 0)),
            events=tuple(events),
            noise=NoiseProfile(**noise_data),
        )
    except TypeError as exc:
        raise ValidationError(f"malformed scenario field: {exc}") from exc


def read_scenario(source: IO) -> Scenario:
    try:
        data = json.load(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid scenario JSON: {exc.msg}") from exc
    return scenario_from_dict(data)


def write_scenario(scenario: Scenario, sink: IO) -> None:
    json.dump(scenario_to_dict(scenario), sink, indent=2)
    sink.write("\n")
