"""Record/label/config parsing, validation and round-trip behaviour."""

import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import const_encoding, make_face, make_frame, make_tracker
from proctorlens.records import (
    BoundingBox,
    EngineConfig,
    EventInterval,
    EventKind,
    FaceObservation,
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
from proctorlens.simulate import Scenario, generate


def test_empty_stream_yields_nothing():
    assert list(read_record_stream(io.StringIO(""))) == []


def test_single_record_round_trip():
    frame = make_frame(0, 0.0, faces=[make_face(const_encoding())], tracker=make_tracker())
    buf = io.StringIO()
    write_record_stream([frame], buf)
    buf.seek(0)
    (back,) = list(read_record_stream(buf))
    assert back == frame
    assert len(back.faces) == 1 and len(back.objects) == 0


def test_round_trip_is_bit_exact_for_awkward_floats():
    enc = list(const_encoding(0.1))
    enc[3] = 1.0 / 3.0
    enc[7] = 2.0 ** -40
    frame = make_frame(0, 0.1 + 0.2, faces=[make_face(enc)])
    buf = io.StringIO()
    write_record_stream([frame], buf)
    buf.seek(0)
    (back,) = list(read_record_stream(buf))
    assert back.faces[0].encoding[3] == enc[3]
    assert back.faces[0].encoding[7] == enc[7]
    assert back.timestamp_sec == 0.1 + 0.2


def test_bytes_stream_accepted():
    frame = make_frame(0, 0.0)
    buf = io.BytesIO()
    write_record_stream([frame], buf)
    buf.seek(0)
    assert list(read_record_stream(buf)) == [frame]


def test_short_encoding_is_parse_error_naming_length():
    line = json.dumps(
        {
            "index": 0,
            "t": 0.0,
            "w": 640,
            "h": 480,
            "faces": [{"box": [0, 0, 10, 10], "enc": [0.1] * 127, "yaw": 0.0, "pitch": 0.0}],
            "objects": [],
            "tracker": {"box": None, "conf": 0.0, "active": False},
        }
    )
    with pytest.raises(ParseError, match="encoding length"):
        list(read_record_stream(io.StringIO(line)))


def test_malformed_line_reports_line_number():
    good = io.StringIO()
    write_record_stream([make_frame(0, 0.0)], good)
    text = good.getvalue() + "{not json\n"
    with pytest.raises(ParseError, match="line 2"):
        list(read_record_stream(io.StringIO(text)))


@pytest.mark.parametrize("field,value", [("index", 0), ("t", 0.0)])
def test_non_monotonic_stream_is_ordering_error(field, value):
    a = make_frame(0, 0.0)
    b = make_frame(5, 5.0)
    buf = io.StringIO()
    write_record_stream([a, b], buf)
    lines = buf.getvalue().splitlines()
    clobbered = json.loads(lines[1])
    clobbered[field] = value
    text = lines[0] + "\n" + json.dumps(clobbered) + "\n"
    with pytest.raises(OrderingError):
        list(read_record_stream(io.StringIO(text)))


def test_nan_confidence_refused_at_serialization():
    frame = make_frame(0, 0.0, objects=[ObjectObservation(ObjectClass.BODY, BoundingBox(0, 0, 10, 10), 0.5)])
    object.__setattr__(frame.objects[0], "confidence", float("nan"))
    with pytest.raises(ValueError):
        write_record_stream([frame], io.StringIO())


def test_nan_rejected_at_construction():
    with pytest.raises(ValidationError):
        make_frame(0, float("nan"))
    with pytest.raises(ValidationError):
        make_face(const_encoding(), yaw=float("inf"))
    with pytest.raises(ValidationError):
        FaceObservation(BoundingBox(0, 0, 5, 5), (float("nan"),) * 128, 0.0, 0.0)


def test_box_must_fit_frame():
    with pytest.raises(ValidationError):
        make_frame(0, 0.0, faces=[make_face(const_encoding(), x=630.0, w=50.0)])


def test_tracker_active_requires_box():
    with pytest.raises(ValidationError):
        TrackerState(box=None, confidence=9.0, active=True)


def test_pose_angle_ranges():
    with pytest.raises(ValidationError):
        make_face(const_encoding(), yaw=91.0)
    with pytest.raises(ValidationError):
        make_face(const_encoding(), pitch=-90.5)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_generated_streams_round_trip(seed):
    scenario = Scenario(
        duration_sec=15.0,
        seed=seed,
        events=(EventInterval(EventKind.DEVICE, 5.0, 8.0),),
    )
    records, _ = generate(scenario)
    buf = io.StringIO()
    write_record_stream(records, buf)
    buf.seek(0)
    assert list(read_record_stream(buf)) == records


# --- labels ---------------------------------------------------------------

def test_label_line_maps_directly():
    got = read_labels(io.StringIO("kind,start_sec,end_sec\nanother_person,10.0,25.5\n"))
    assert got == [EventInterval(EventKind.ANOTHER_PERSON, 10.0, 25.5)]


def test_concurrent_events_of_different_kinds_both_retained():
    text = "kind,start_sec,end_sec\nabsence,10,20\nanother_person,12,18\n"
    got = read_labels(io.StringIO(text))
    assert len(got) == 2
    assert {iv.kind for iv in got} == {EventKind.ABSENCE, EventKind.ANOTHER_PERSON}


def test_zero_length_interval_rejected():
    with pytest.raises(ValidationError):
        read_labels(io.StringIO("kind,start_sec,end_sec\ndevice,30,30\n"))


def test_same_kind_overlap_rejected():
    text = "kind,start_sec,end_sec\ndevice,10,20\ndevice,15,30\n"
    with pytest.raises(ValidationError, match="overlapping"):
        read_labels(io.StringIO(text))


def test_touching_same_kind_intervals_allowed():
    text = "kind,start_sec,end_sec\ndevice,10,20\ndevice,20,30\n"
    assert len(read_labels(io.StringIO(text))) == 2


def test_unknown_kind_rejected():
    with pytest.raises(ParseError, match="unknown event kind"):
        read_labels(io.StringIO("kind,start_sec,end_sec\ngazing,1,2\n"))


def test_labels_round_trip():
    intervals = [
        EventInterval(EventKind.DEVICE, 30.0, 40.5),
        EventInterval(EventKind.ABSENCE, 100.0, 130.0),
    ]
    buf = io.StringIO()
    write_labels(intervals, buf)
    buf.seek(0)
    assert read_labels(buf) == intervals


# --- config ---------------------------------------------------------------

def test_config_defaults():
    cfg = EngineConfig()
    assert cfg.registration_window_sec == 20.0
    assert cfg.face_distance_threshold == 0.65
    assert cfg.body_conf_threshold == 0.65
    assert cfg.device_conf_threshold == 0.30
    assert cfg.partial_epsilon == 0.01
    assert cfg.absence_ratio_limit == 0.05
    assert cfg.fps == 3.0


def test_config_file_every_key_optional():
    cfg = read_config(io.StringIO("face_distance_threshold = 0.5\n# comment\nfps=6\n"))
    assert cfg.face_distance_threshold == 0.5
    assert cfg.fps == 6.0
    assert cfg.device_conf_threshold == 0.30


def test_config_unknown_key_rejected():
    with pytest.raises(ParseError, match="unknown config key"):
        read_config(io.StringIO("face_threshold = 0.5\n"))


def test_config_invariants():
    with pytest.raises(ValidationError):
        EngineConfig(absence_ratio_limit=0.0)
    with pytest.raises(ValidationError):
        EngineConfig(absence_ratio_limit=1.0)
    with pytest.raises(ValidationError):
        EngineConfig(fps=0.0)
    with pytest.raises(ValidationError):
        EngineConfig(face_distance_threshold=float("inf"))
