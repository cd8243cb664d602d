import json

import pytest

from aarsim.analytics import (
    ATTRACTOR_START,
    CLIP_END,
    CLIP_START,
    MODE_CHANGE,
    POSE,
    ZONE_ENTER,
    ZONE_EXIT,
    EngagementEvent,
    EngagementReport,
    SourceEngagement,
    accumulate_report,
    format_report,
    parse_log,
    parse_report,
)


def ev(t, kind, sid=None, tag=None, **payload):
    return EngagementEvent(t=t, kind=kind, source_id=sid, tag=tag, payload=payload)


class TestEventSerialization:
    def test_json_round_trip(self):
        e = ev(1.25, ZONE_ENTER, "radio", "THEMATIC", distance=4.5)
        back = EngagementEvent.from_record(json.loads(e.to_json()))
        assert back == e

    def test_record_omits_empty_fields(self):
        rec = ev(0.0, POSE).to_record()
        assert set(rec) == {"t", "kind"}

    def test_json_is_compact_and_sorted(self):
        s = ev(0.5, MODE_CHANGE, mode="TRACKED").to_json()
        assert s == '{"kind":"mode_change","payload":{"mode":"TRACKED"},"t":0.5}'

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown event kind"):
            EngagementEvent.from_record({"t": 0.0, "kind": "teleport"})

    def test_missing_fields_rejected(self):
        with pytest.raises(ValueError, match="'t' and 'kind'"):
            EngagementEvent.from_record({"kind": POSE})


class TestParseLog:
    def test_skips_blank_lines(self):
        lines = ["", ev(0.0, POSE).to_json(), "   ", ev(1.0, POSE).to_json()]
        assert len(parse_log(lines)) == 2

    def test_error_carries_line_number(self):
        lines = [ev(0.0, POSE).to_json(), "{broken"]
        with pytest.raises(ValueError, match="line 2"):
            parse_log(lines)


class TestAccumulate:
    def test_dwell_and_visits(self):
        events = [
            ev(0.0, MODE_CHANGE, mode="TRACKED"),
            ev(2.0, ZONE_ENTER, "a", "THEMATIC"),
            ev(5.0, ZONE_EXIT, "a", "THEMATIC"),
            ev(7.0, ZONE_ENTER, "a", "THEMATIC"),
            ev(8.5, ZONE_EXIT, "a", "THEMATIC"),
            ev(10.0, POSE),
        ]
        r = accumulate_report(events)
        assert r.sources["a"].dwell_s == pytest.approx(4.5)
        assert r.sources["a"].visits == 2

    def test_open_interval_closes_at_log_end(self):
        events = [
            ev(1.0, ZONE_ENTER, "a", "THEMATIC"),
            ev(6.0, POSE),
        ]
        r = accumulate_report(events)
        assert r.sources["a"].dwell_s == pytest.approx(5.0)

    def test_completion_needs_completed_reason(self):
        stopped = accumulate_report(
            [ev(1.0, CLIP_END, "a", "THEMATIC", reason="stopped")]
        )
        assert not stopped.sources["a"].completed
        done = accumulate_report(
            [ev(1.0, CLIP_END, "a", "THEMATIC", reason="completed")]
        )
        assert done.sources["a"].completed

    def test_attractor_plays_counted(self):
        r = accumulate_report(
            [
                ev(1.0, ATTRACTOR_START, "a", "THEMATIC"),
                ev(90.0, ATTRACTOR_START, "a", "THEMATIC"),
            ]
        )
        assert r.sources["a"].attractor_plays == 2

    def test_mode_occupancy_fractions(self):
        events = [
            ev(0.0, MODE_CHANGE, mode="TRACKED"),
            ev(6.0, MODE_CHANGE, mode="EXTENDED"),
            ev(8.0, MODE_CHANGE, mode="LOST"),
            ev(10.0, POSE),
        ]
        r = accumulate_report(events)
        assert r.tracked_frac == pytest.approx(0.6)
        assert r.extended_frac == pytest.approx(0.2)
        assert r.lost_frac == pytest.approx(0.2)
        assert r.tracked_frac + r.extended_frac + r.lost_frac == pytest.approx(1.0)

    def test_clip_count_from_final_pose(self):
        r = accumulate_report([ev(3.0, POSE, clip_count=17)])
        assert r.clip_count == 17

    def test_accepts_jsonl_strings(self):
        lines = [ev(0.0, ZONE_ENTER, "a", "THEMATIC").to_json()]
        r = accumulate_report(lines)
        assert r.sources["a"].visits == 1

    def test_zone_event_without_source_rejected(self):
        with pytest.raises(ValueError, match="missing source_id"):
            accumulate_report([ev(0.0, ZONE_ENTER)])

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError, match="unknown mode"):
            accumulate_report([ev(0.0, MODE_CHANGE, mode="WARP")])

    def test_empty_log(self):
        r = accumulate_report([])
        assert r == EngagementReport()

    def test_clip_start_ignored_for_dwell(self):
        events = [
            ev(0.0, ZONE_ENTER, "a", "THEMATIC"),
            ev(0.0, CLIP_START, "a", "THEMATIC"),
            ev(4.0, ZONE_EXIT, "a", "THEMATIC"),
        ]
        r = accumulate_report(events)
        assert r.sources["a"].dwell_s == pytest.approx(4.0)
        assert r.sources["a"].visits == 1


class TestReportCsv:
    def _report(self):
        r = EngagementReport(
            sources={
                "b": SourceEngagement(dwell_s=2.5, visits=1, completed=True),
                "a": SourceEngagement(dwell_s=0.125, visits=3, attractor_plays=2),
            },
            tracked_frac=0.5,
            extended_frac=0.375,
            lost_frac=0.125,
            clip_count=4,
        )
        return r

    def test_round_trip(self):
        r = self._report()
        assert parse_report(format_report(r)) == r

    def test_rows_sorted_by_id(self):
        lines = format_report(self._report()).splitlines()
        assert lines[1].startswith("a,")
        assert lines[2].startswith("b,")

    def test_bad_header_rejected(self):
        with pytest.raises(ValueError, match="header"):
            parse_report("nope\n")

    def test_unknown_global_rejected(self):
        text = format_report(self._report()) + "#volume,11\n"
        with pytest.raises(ValueError, match="volume"):
            parse_report(text)
