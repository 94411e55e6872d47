"""Line-oriented text formats for logs, snapshots, traces and reports.

Every data file starts with '#'-prefixed metadata lines followed by
comma-delimited rows.  Floats are written with repr, so files round-trip
exactly and rerunning a seeded configuration reproduces byte-identical
outputs.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .config import (
    ConfigError,
    phi_from_spec,
    phi_to_spec,
    rule_from_spec,
    rule_to_spec,
    window_from_spec,
    window_to_spec,
)
from .division import DivisionEvent, EventLog, TessellationSnapshot
from .fragmentation import FragEvent
from .geometry import AxisPlane, Box, Line2
from .hyperplanes import ExplosionReport, ZeroCellChain

__all__ = [
    "write_event_log",
    "read_event_log",
    "write_snapshot",
    "write_frag_trace",
    "write_chain_trace",
    "write_explosion_report",
    "write_report",
]


def _plane_to_field(plane) -> str:
    if isinstance(plane, AxisPlane):
        return f"a{plane.axis}:{plane.offset!r}"
    return f"l:{plane.normal[0]!r}:{plane.normal[1]!r}:{plane.offset!r}"


def _plane_from_field(field: str):
    if field.startswith("a"):
        axis, offset = field[1:].split(":")
        return AxisPlane(int(axis), float(offset))
    if field.startswith("l:"):
        ux, uy, offset = field[2:].split(":")
        return Line2((float(ux), float(uy)), float(offset))
    raise ConfigError(f"bad plane field {field!r}")


def write_event_log(log: EventLog, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# celldiv-events 1\n")
        fh.write(f"# phi = {phi_to_spec(log.phi)}\n")
        fh.write(f"# rule = {rule_to_spec(log.rule)}\n")
        fh.write(f"# window = {window_to_spec(log.window)}\n")
        fh.write(f"# seed = {'none' if log.seed is None else log.seed}\n")
        fh.write(f"# t_max = {log.t_max!r}\n")
        fh.write(f"# max_events = {log.max_events}\n")
        fh.write(f"# min_cell_volume = {log.min_cell_volume!r}\n")
        fh.write(f"# truncated = {int(log.truncated)}\n")
        fh.write(f"# volume_floor_hits = {log.volume_floor_hits}\n")
        for note in log.notes:
            fh.write(f"# note = {note}\n")
        fh.write("# columns = time,parent,child_lo,child_hi,plane\n")
        for e in log.events:
            fh.write(f"{e.time!r},{e.parent},{e.child_lo},{e.child_hi},{_plane_to_field(e.plane)}\n")


def read_event_log(path) -> EventLog:
    meta: dict[str, str] = {}
    notes: list[str] = []
    events: list[DivisionEvent] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    key = key.strip()
                    if key == "note":
                        notes.append(value.strip())
                    else:
                        meta[key] = value.strip()
                continue
            time, parent, lo, hi, plane = line.split(",")
            events.append(
                DivisionEvent(float(time), int(parent), _plane_from_field(plane), int(lo), int(hi))
            )
    try:
        log = EventLog(
            window_from_spec(meta["window"]),
            rule_from_spec(meta["rule"]),
            phi_from_spec(meta["phi"]),
            float(meta["t_max"]),
            seed=None if meta.get("seed", "none") == "none" else int(meta["seed"]),
            max_events=int(meta.get("max_events", "0") or 0),
            min_cell_volume=float(meta.get("min_cell_volume", "0")),
            notes=tuple(notes),
        )
    except KeyError as exc:
        raise ConfigError(f"event log {path} is missing header key {exc}") from exc
    log.truncated = meta.get("truncated", "0") == "1"
    log.volume_floor_hits = int(meta.get("volume_floor_hits", "0"))
    for e in events:
        log.append(e)
    return log


def _geometry_to_field(geom) -> str:
    if isinstance(geom, Box):
        return (
            "box "
            + " ".join(repr(v) for v in geom.lower)
            + " ; "
            + " ".join(repr(v) for v in geom.upper)
        )
    return "poly " + " ; ".join(f"{x!r} {y!r}" for x, y in geom.vertices)


def write_snapshot(snapshot: TessellationSnapshot, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# celldiv-snapshot 1\n")
        fh.write(f"# time = {snapshot.time!r}\n")
        fh.write(f"# cells = {len(snapshot.cells)}\n")
        fh.write("# columns = id,birth,death,geometry\n")
        for c in sorted(snapshot.cells, key=lambda c: c.id):
            death = "" if c.death is None else repr(c.death)
            fh.write(f"{c.id},{c.birth!r},{death},{_geometry_to_field(c.geometry)}\n")


def write_frag_trace(events: Sequence[FragEvent], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# celldiv-frag 1\n")
        fh.write("# columns = jump,time,index,u,m1,m2,m3,m4,m5\n")
        for j, e in enumerate(events, start=1):
            top = [repr(m) for m in e.partition.masses[:5]]
            top += [""] * (5 - len(top))
            fh.write(f"{j},{e.time!r},{e.index},{e.u!r},{','.join(top)}\n")


def write_chain_trace(chain: ZeroCellChain, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# celldiv-zero-chain 1\n")
        fh.write(f"# phi = {phi_to_spec(chain.phi)}\n")
        fh.write("# columns = step,log_time,axis,sign,sum_of_sides\n")
        sos = chain.sum_of_sides()
        for i in range(chain.depth):
            k, sign = chain.labels[i]
            fh.write(f"{i},{chain.log_times[i]!r},{k},{sign:+d},{sos[i]!r}\n")


def write_explosion_report(report: ExplosionReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# celldiv-explosion 1\n")
        fh.write(f"# rule = {rule_to_spec(report.rule)}\n")
        fh.write(f"# verdict = {report.verdict}\n")
        fh.write(
            f"# tail_min = {report.tail_min!r}\n# tail_median = {report.tail_median!r}\n"
            f"# tail_max = {report.tail_max!r}\n"
        )
        fh.write("# note = verdict thresholds are reporting heuristics, not proofs\n")
        fh.write("# columns = depth,partial_sum,increment\n")
        for j in range(report.depth):
            fh.write(f"{j},{report.partial_sums[j]!r},{report.increments[j]!r}\n")


def write_report(items: Iterable, path) -> None:
    """Human-readable report block: one line per GoFResult or SampleSummary."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# celldiv-report 1\n")
        for item in items:
            fh.write(item.line() + "\n")


def write_report_csv(items: Iterable, path) -> None:
    """Delimited form of a report: one row per result."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# celldiv-report 1\n")
        fh.write("# columns = kind,name,statistic,p_value,n,passed\n")
        for item in items:
            if hasattr(item, "p_value"):
                fh.write(
                    f"gof,{item.name},{item.statistic!r},{item.p_value!r},{item.n},{int(item.passed)}\n"
                )
            else:
                fh.write(f"summary,cv,{item.cv!r},{item.cv_se!r},{item.n},\n")
