"""Nomination rules, temporal linking and the three-field decision."""

import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (
    make_body,
    make_device,
    make_frame,
    oracle_link_intervals,
)
from proctorlens.events import (
    DecisionAccumulator,
    FrameVerdict,
    Label,
    decide,
    link_frames,
    nominate_frame,
    read_report,
    report_from_dict,
    report_to_dict,
    write_report,
)
from proctorlens.records import EngineConfig, EventKind, ObjectClass
from proctorlens.tracking import ReconciledFrame

CFG = EngineConfig()


def rec(present: bool, others: int = 0) -> ReconciledFrame:
    return ReconciledFrame(
        candidate_present=present,
        other_face_count=others,
        tracker_used=False,
        divergence_flag=False,
        face_distance=0.2 if present else None,
    )


def verdict(
    index: int,
    other=False,
    body=False,
    device=False,
    present=True,
    body_count=1,
    fps=3.0,
) -> FrameVerdict:
    return FrameVerdict(
        index=index,
        timestamp_sec=index / fps,
        candidate_present=present,
        other_face_nominated=other,
        body_nominated=body,
        device_nominated=device,
        body_count=body_count,
        max_device_conf=0.6 if device else 0.0,
    )


# --- nomination ---------------------------------------------------------------

def test_legitimate_frame_nominates_nothing():
    frame = make_frame(0, 0.0, objects=[make_body(0.9)])
    v = nominate_frame(frame, rec(True), CFG)
    assert not (v.other_face_nominated or v.body_nominated or v.device_nominated)
    assert v.body_count == 1
    assert v.max_device_conf == 0.0


def test_two_bodies_nominated_even_with_candidate():
    frame = make_frame(0, 0.0, objects=[make_body(0.8), make_body(0.7, x=300.0)])
    v = nominate_frame(frame, rec(True), CFG)
    assert v.body_nominated is True
    assert v.body_count == 2
    assert v.multi_body_conf == 0.7


def test_single_body_without_candidate_nominated():
    frame = make_frame(0, 0.0, objects=[make_body(0.9)])
    v = nominate_frame(frame, rec(False), CFG)
    assert v.body_nominated is True


def test_low_confidence_bodies_not_counted():
    frame = make_frame(0, 0.0, objects=[make_body(0.64), make_body(0.9, x=300.0)])
    v = nominate_frame(frame, rec(True), CFG)
    assert v.body_count == 1
    assert v.body_nominated is False


def test_device_threshold_boundary():
    for conf, expected in ((0.29, False), (0.30, True), (0.31, True)):
        frame = make_frame(0, 0.0, objects=[make_device(conf)])
        v = nominate_frame(frame, rec(True), CFG)
        assert v.device_nominated is expected, conf
        assert v.max_device_conf == conf


def test_laptop_counts_as_device():
    frame = make_frame(0, 0.0, objects=[make_device(0.5, cls=ObjectClass.LAPTOP)])
    assert nominate_frame(frame, rec(True), CFG).device_nominated is True


def test_other_face_nomination_from_reconciled_count():
    frame = make_frame(0, 0.0)
    assert nominate_frame(frame, rec(True, others=1), CFG).other_face_nominated is True
    assert nominate_frame(frame, rec(True, others=0), CFG).other_face_nominated is False


def test_max_device_conf_tracks_raw_maximum():
    frame = make_frame(0, 0.0, objects=[make_device(0.25), make_device(0.1, x=500.0)])
    v = nominate_frame(frame, rec(True), CFG)
    assert v.max_device_conf == 0.25
    assert v.device_nominated is False


# --- linking -------------------------------------------------------------------

def test_link_empty():
    assert link_frames([], CFG, EventKind.DEVICE) == ()


def test_link_merges_close_frames():
    ts = [3 / 3, 4 / 3, 5 / 3]
    (iv,) = link_frames([(i, t) for i, t in enumerate(ts)], CFG, EventKind.ANOTHER_PERSON)
    assert (iv.start_sec, iv.end_sec) == (1.0, 2.0)
    assert iv.kind is EventKind.ANOTHER_PERSON


def test_link_splits_on_large_gap():
    intervals = link_frames([(0, 1.0), (1, 10.0)], CFG, EventKind.DEVICE)
    assert len(intervals) == 2
    assert intervals[0].end_sec == pytest.approx(1.0 + 1 / 3)


def test_link_gap_boundary_inclusive():
    (iv,) = link_frames([(0, 1.0), (1, 3.0)], CFG, EventKind.DEVICE)
    assert (iv.start_sec, iv.end_sec) == (1.0, 3.0 + 1 / 3)
    two = link_frames([(0, 1.0), (1, 3.0 + 1e-9)], CFG, EventKind.DEVICE)
    assert len(two) == 2


def test_link_requires_sorted_input():
    with pytest.raises(ValueError):
        link_frames([(0, 5.0), (1, 1.0)], CFG, EventKind.DEVICE)


@settings(max_examples=150, deadline=None)
@given(
    ts=st.lists(
        st.integers(min_value=0, max_value=600), min_size=0, max_size=120, unique=True
    ),
    gap=st.sampled_from([0.0, 1.0, 2.0, 5.0]),
)
def test_link_matches_all_pairs_oracle(ts, gap):
    # timestamps on the 3 fps grid so gap boundaries genuinely occur
    stamps = sorted(t / 3.0 for t in ts)
    cfg = EngineConfig(link_gap_sec=gap) if gap > 0 else EngineConfig(link_gap_sec=1e-12)
    got = link_frames([(i, t) for i, t in enumerate(stamps)], cfg, EventKind.DEVICE)
    expected = oracle_link_intervals(stamps, cfg.link_gap_sec, 1.0 / 3.0)
    assert [(iv.start_sec, iv.end_sec) for iv in got] == expected
    # disjoint and sorted
    for a, b in zip(got, got[1:]):
        assert a.end_sec <= b.start_sec or a.end_sec < b.start_sec + 1e-12
        assert a.start_sec < b.start_sec


# --- decision ------------------------------------------------------------------

def test_all_clean():
    report = decide([verdict(i) for i in range(100)], CFG)
    assert report.overall is Label.CLEAN
    assert all(d.label is Label.CLEAN for d in report.decisions)
    assert report.frame_count == 100


def test_absence_ratio_boundary_exclusive():
    def table(supporting: int, total: int = 100):
        rows = []
        for i in range(total):
            if i < supporting:
                rows.append(verdict(i, present=False, body_count=0))
            else:
                rows.append(verdict(i))
        return rows

    suspicious = decide(table(6), CFG)
    assert suspicious.decision(EventKind.ABSENCE).label is Label.SUSPICIOUS
    assert suspicious.decision(EventKind.ABSENCE).supporting_ratio == pytest.approx(0.06)

    clean = decide(table(5), CFG)
    assert clean.decision(EventKind.ABSENCE).label is Label.CLEAN
    assert clean.decision(EventKind.ABSENCE).supporting_ratio == pytest.approx(0.05)
    # intervals still reported for the clean case
    assert len(clean.decision(EventKind.ABSENCE).intervals) == 1


def test_single_device_interval_flips_overall():
    rows = [verdict(i, device=(30 <= i < 40)) for i in range(100)]
    report = decide(rows, CFG)
    assert report.decision(EventKind.DEVICE).label is Label.SUSPICIOUS
    assert report.decision(EventKind.ANOTHER_PERSON).label is Label.CLEAN
    assert report.overall is Label.SUSPICIOUS


def test_face_and_body_evidence_union_into_one_field():
    rows = [
        verdict(i, other=(i in (10, 11)), body=(i in (12, 13)))
        for i in range(60)
    ]
    report = decide(rows, CFG)
    decision = report.decision(EventKind.ANOTHER_PERSON)
    assert decision.label is Label.SUSPICIOUS
    assert len(decision.intervals) == 1  # one linked appearance, not two


def test_absence_supporting_requires_zero_bodies():
    rows = [verdict(i, present=False, body_count=1, body=True) for i in range(100)]
    report = decide(rows, CFG)
    assert report.decision(EventKind.ABSENCE).supporting_ratio == 0.0


def test_decide_empty_is_usage_error():
    with pytest.raises(ValueError):
        decide([], CFG)


@settings(max_examples=60, deadline=None)
@given(
    confs=st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=120),
    thresholds=st.tuples(
        st.floats(min_value=0.05, max_value=0.95), st.floats(min_value=0.05, max_value=0.95)
    ),
)
def test_lowering_device_threshold_never_removes_an_interval(confs, thresholds):
    lo, hi = sorted(thresholds)

    def report_at(thr):
        rows = [verdict(i, device=(c >= thr)) for i, c in enumerate(confs)]
        return decide(rows, CFG)

    low_iv = report_at(lo).decision(EventKind.DEVICE).intervals
    high_iv = report_at(hi).decision(EventKind.DEVICE).intervals
    # every interval found at the stricter threshold stays covered at the looser one
    for iv in high_iv:
        assert any(
            cover.start_sec <= iv.start_sec and iv.end_sec <= cover.end_sec for cover in low_iv
        )


@settings(max_examples=60, deadline=None)
@given(
    flags=st.lists(
        st.tuples(st.booleans(), st.booleans(), st.booleans(), st.booleans()),
        min_size=1,
        max_size=200,
    )
)
def test_accumulator_equals_batch_decide(flags):
    rows = [
        verdict(i, other=o, body=b, device=d, present=p, body_count=0 if not b else 1)
        for i, (o, b, d, p) in enumerate(flags)
    ]
    batch = decide(rows, CFG)
    acc = DecisionAccumulator(CFG, keep_per_frame=False)
    for row in rows:
        acc.add(row)
    streamed = acc.finalize()
    assert streamed.decisions == batch.decisions
    assert streamed.overall == batch.overall
    assert streamed.per_frame == ()


# --- report serialization --------------------------------------------------------

def test_report_round_trip():
    rows = [verdict(i, device=(3 <= i < 9), other=(i == 20)) for i in range(60)]
    rows[40] = verdict(40, present=False, body_count=0)
    report = decide(rows, CFG)
    buf = io.StringIO()
    write_report(report, buf)
    buf.seek(0)
    back = read_report(buf)
    assert back == report


def test_report_round_trip_without_per_frame():
    report = decide([verdict(i) for i in range(30)], CFG)
    data = report_to_dict(report, include_per_frame=False)
    back = report_from_dict(data)
    assert back.decisions == report.decisions
    assert back.per_frame == ()
    assert back.frame_count == 30


def test_malformed_report_is_parse_error():
    from proctorlens.records import ParseError

    with pytest.raises(ParseError, match="unsupported report schema"):
        report_from_dict({"schema": "something-else"})
    with pytest.raises(ParseError, match="malformed report"):
        report_from_dict({"schema": "proctorlens/report-v1", "decisions": {}})
    with pytest.raises(ParseError, match="malformed report"):
        report_from_dict(
            {
                "schema": "proctorlens/report-v1",
                "overall": "clean",
                "frame_count": 1,
                "decisions": {
                    "another_person": {"label": "no-such-label", "intervals": []},
                    "device": {"label": "clean", "intervals": []},
                    "absence": {"label": "clean", "intervals": [], "supporting_ratio": 0.0},
                },
            }
        )
