"""Engagement events, event-log parsing, and per-source dwell reporting."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

ZONE_ENTER = "zone_enter"
ZONE_EXIT = "zone_exit"
CLIP_START = "clip_start"
CLIP_END = "clip_end"
ATTRACTOR_START = "attractor_start"
MODE_CHANGE = "mode_change"
POSE = "pose"

EVENT_KINDS = frozenset(
    {ZONE_ENTER, ZONE_EXIT, CLIP_START, CLIP_END, ATTRACTOR_START, MODE_CHANGE, POSE}
)


@dataclass(frozen=True)
class EngagementEvent:
    """One timestamped record in the engagement log."""

    t: float
    kind: str
    source_id: str | None = None
    tag: str | None = None
    payload: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec: dict = {"t": self.t, "kind": self.kind}
        if self.source_id is not None:
            rec["source_id"] = self.source_id
        if self.tag is not None:
            rec["tag"] = self.tag
        if self.payload:
            rec["payload"] = self.payload
        return rec

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_record(cls, rec: dict) -> "EngagementEvent":
        if "t" not in rec or "kind" not in rec:
            raise ValueError("event record needs 't' and 'kind'")
        kind = rec["kind"]
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        return cls(
            t=float(rec["t"]),
            kind=kind,
            source_id=rec.get("source_id"),
            tag=rec.get("tag"),
            payload=dict(rec.get("payload", {})),
        )


@dataclass
class SourceEngagement:
    dwell_s: float = 0.0
    visits: int = 0
    completed: bool = False
    attractor_plays: int = 0


@dataclass
class EngagementReport:
    """Per-source dwell summary plus global tracking-mode occupancy."""

    sources: dict[str, SourceEngagement] = field(default_factory=dict)
    tracked_frac: float = 0.0
    extended_frac: float = 0.0
    lost_frac: float = 0.0
    clip_count: int = 0


def parse_log(lines: Iterable[str]) -> list[EngagementEvent]:
    """Parse a JSONL event log; errors carry the 1-based line number."""
    events = []
    for i, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            events.append(EngagementEvent.from_record(rec))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"line {i}: {exc}") from exc
    return events


def accumulate_report(log: Union[Iterable[str], Iterable[EngagementEvent]]) -> EngagementReport:
    """Fold an event log into dwell times, visit counts, and mode occupancy.

    Dwell is the sum of zone enter/exit intervals; intervals still open at
    the end of the log are closed at the last event's timestamp.
    """
    events: list[EngagementEvent] = []
    for item in log:
        if isinstance(item, EngagementEvent):
            events.append(item)
        else:
            events.extend(parse_log([item]) if isinstance(item, str) else [])
    if events and not isinstance(events[0], EngagementEvent):
        raise TypeError("log must contain JSONL strings or EngagementEvents")

    report = EngagementReport()
    if not events:
        return report

    t_end = max(e.t for e in events)
    open_since: dict[str, float] = {}
    mode_since: float | None = None
    current_mode: str | None = None
    mode_totals = {"TRACKED": 0.0, "EXTENDED": 0.0, "LOST": 0.0}

    for e in events:
        if e.kind in (ZONE_ENTER, ZONE_EXIT, CLIP_END, ATTRACTOR_START) and e.source_id is None:
            raise ValueError(f"{e.kind} event at t={e.t} missing source_id")
        if e.source_id is not None:
            stats = report.sources.setdefault(e.source_id, SourceEngagement())
        if e.kind == ZONE_ENTER:
            report.sources[e.source_id].visits += 1
            open_since[e.source_id] = e.t
        elif e.kind == ZONE_EXIT:
            t0 = open_since.pop(e.source_id, None)
            if t0 is not None:
                report.sources[e.source_id].dwell_s += e.t - t0
        elif e.kind == CLIP_END:
            if e.payload.get("reason") == "completed":
                report.sources[e.source_id].completed = True
        elif e.kind == ATTRACTOR_START:
            report.sources[e.source_id].attractor_plays += 1
        elif e.kind == MODE_CHANGE:
            mode = e.payload.get("mode")
            if mode not in mode_totals:
                raise ValueError(f"mode_change at t={e.t} with unknown mode {mode!r}")
            if current_mode is not None:
                mode_totals[current_mode] += e.t - mode_since
            current_mode, mode_since = mode, e.t
        elif e.kind == POSE:
            if "clip_count" in e.payload:
                report.clip_count = int(e.payload["clip_count"])

    for sid, t0 in open_since.items():
        report.sources[sid].dwell_s += t_end - t0
    if current_mode is not None:
        mode_totals[current_mode] += t_end - mode_since
    total = sum(mode_totals.values())
    if total > 0:
        report.tracked_frac = mode_totals["TRACKED"] / total
        report.extended_frac = mode_totals["EXTENDED"] / total
        report.lost_frac = mode_totals["LOST"] / total
    return report


def write_report(report: EngagementReport, out: IO[str]) -> None:
    """Write the CSV report: per-source rows sorted by id, then a #global block."""
    out.write("source_id,dwell_s,visits,completed,attractor_plays\n")
    for sid in sorted(report.sources):
        s = report.sources[sid]
        completed = "true" if s.completed else "false"
        out.write(f"{sid},{s.dwell_s:.3f},{s.visits},{completed},{s.attractor_plays}\n")
    out.write("#global\n")
    out.write(f"#tracked_frac,{report.tracked_frac:.6f}\n")
    out.write(f"#extended_frac,{report.extended_frac:.6f}\n")
    out.write(f"#lost_frac,{report.lost_frac:.6f}\n")
    out.write(f"#clip_count,{report.clip_count}\n")


def format_report(report: EngagementReport) -> str:
    import io

    buf = io.StringIO()
    write_report(report, buf)
    return buf.getvalue()


def parse_report(text: str) -> EngagementReport:
    """Inverse of write_report, for report round-trips and tooling."""
    report = EngagementReport()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "source_id,dwell_s,visits,completed,attractor_plays":
        raise ValueError("missing report header row")
    for ln in lines[1:]:
        if ln.startswith("#"):
            if ln == "#global":
                continue
            key, _, val = ln[1:].partition(",")
            if key == "tracked_frac":
                report.tracked_frac = float(val)
            elif key == "extended_frac":
                report.extended_frac = float(val)
            elif key == "lost_frac":
                report.lost_frac = float(val)
            elif key == "clip_count":
                report.clip_count = int(val)
            else:
                raise ValueError(f"unknown global field {key!r}")
        else:
            sid, dwell, visits, completed, plays = ln.split(",")
            report.sources[sid] = SourceEngagement(
                dwell_s=float(dwell),
                visits=int(visits),
                completed=completed == "true",
                attractor_plays=int(plays),
            )
    return report
