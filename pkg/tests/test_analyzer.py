"""Estimator protocol and streaming behaviour of CheatingAnalyzer."""

import pytest
from sklearn.base import clone

from helpers import const_encoding, make_face, make_frame
from proctorlens.analyzer import CheatingAnalyzer, ensure_ordered
from proctorlens.records import EngineConfig, EventInterval, EventKind, OrderingError, ValidationError
from proctorlens.registration import RegistrationFailed
from proctorlens.simulate import Scenario, generate


def scenario_records(seed=0, events=()):
    scn = Scenario(duration_sec=60.0, seed=seed, events=tuple(events))
    return generate(scn)[0]


def test_params_mirror_engine_config():
    analyzer = CheatingAnalyzer()
    assert set(analyzer.get_params()) == set(EngineConfig.field_names())
    assert analyzer.config() == EngineConfig()


def test_set_params_and_clone():
    analyzer = CheatingAnalyzer(face_distance_threshold=0.5)
    analyzer.set_params(device_conf_threshold=0.4)
    copied = clone(analyzer)
    assert copied.get_params() == analyzer.get_params()
    assert copied.config().device_conf_threshold == 0.4


def test_invalid_params_surface_on_config():
    analyzer = CheatingAnalyzer(absence_ratio_limit=2.0)
    with pytest.raises(ValidationError):
        analyzer.config()


def test_from_config_round_trip():
    cfg = EngineConfig(face_distance_threshold=0.42, fps=6.0)
    assert CheatingAnalyzer.from_config(cfg).config() == cfg


def test_fit_registers_gallery():
    records = scenario_records(seed=4)
    analyzer = CheatingAnalyzer().fit(records)
    assert len(analyzer.gallery_) == 60


def test_predict_requires_fit():
    with pytest.raises(RuntimeError, match="not fitted"):
        CheatingAnalyzer().predict(scenario_records())


def test_analyze_equals_fit_predict():
    records = scenario_records(seed=9, events=[EventInterval(EventKind.DEVICE, 30.0, 40.0)])
    a = CheatingAnalyzer().fit_predict(records)
    b = CheatingAnalyzer().analyze(iter(records), keep_per_frame=True)
    assert a == b


def test_analyze_consumes_a_generator_once():
    records = scenario_records(seed=2, events=[EventInterval(EventKind.ABSENCE, 30.0, 50.0)])
    report = CheatingAnalyzer().analyze(iter(records))
    assert report.frame_count == len(records)
    assert report.decision(EventKind.ABSENCE).label.value == "suspicious"


def test_analyze_without_per_frame_keeps_no_table():
    records = scenario_records(seed=3)
    report = CheatingAnalyzer().analyze(iter(records))
    assert report.per_frame == ()
    with_table = CheatingAnalyzer().analyze(iter(records), keep_per_frame=True)
    assert len(with_table.per_frame) == len(records)


def test_registration_failure_propagates():
    frames = [make_frame(i) for i in range(90)]  # no faces at all
    with pytest.raises(RegistrationFailed):
        CheatingAnalyzer().analyze(iter(frames))


def test_registration_uses_configured_window():
    # faces only from t = 25 s onward; a 30 s window finds them
    frames = [make_frame(i) for i in range(75)]
    frames += [make_frame(75 + i, faces=[make_face(const_encoding())]) for i in range(15)]
    report = CheatingAnalyzer(registration_window_sec=30.0).analyze(iter(frames))
    assert report.frame_count == 90


def test_ensure_ordered_rejects_disorder():
    a = make_frame(0, 0.0)
    b = make_frame(1, 0.0)  # timestamp not increasing
    with pytest.raises(OrderingError):
        list(ensure_ordered([a, b]))


def test_threshold_parameter_changes_outcome():
    records = scenario_records(seed=12, events=[EventInterval(EventKind.DEVICE, 30.0, 40.0)])
    strict = CheatingAnalyzer(device_conf_threshold=0.99).analyze(iter(records))
    assert strict.decision(EventKind.DEVICE).label.value == "clean"
    default = CheatingAnalyzer().analyze(iter(records))
    assert default.decision(EventKind.DEVICE).label.value == "suspicious"
