"""Event-driven simulation of cell-division tessellation processes.

Model summary:

* The state is a tessellation of a bounded window; the initial state is the
  window itself as a single cell.
* Every living cell carries an independent exponential clock whose rate is
  the life-time rule evaluated on the cell (rate zero means the cell is
  never divided).
* When a cell dies it is split by a random hyperplane drawn from the
  normalized hitting measure of the cell, and the two children receive
  fresh independent clocks.

The simulation is a priority-queue walk over death times.  Clocks are drawn
once at cell birth, which is valid by memorylessness and gives O(log n)
per event.  The full division history is logged so that the tessellation at
any intermediate time can be replayed deterministically.

For models other than the hitting-measure rule the process in a window is
not a restriction of a whole-space process; the cut-out construction
samples an enclosing zero cell of a Poisson hyperplane tessellation first
and runs the division process inside it, which reproduces the whole-space
restriction up to an unknown time offset.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace

from .geometry import (
    AxisPlane,
    Atoms2D,
    Box,
    ConstantRule,
    ConvexPolygon2,
    GeometryError,
    Hyperplane,
    IntrinsicVolumeRule,
    LambdaRule,
    Mondrian,
    SplitRejected,
    cell_volume,
    lifetime_rate,
    sample_dividing_hyperplane,
    split_cell,
)
from .hyperplanes import MarkedHyperplane, build_zero_cell_chain, sample_marked_hyperplanes

__all__ = [
    "Cell",
    "DivisionEvent",
    "EventLog",
    "TessellationSnapshot",
    "CutoutResult",
    "run_in_window",
    "stit_reference_run",
    "snapshot_at",
    "cutout_construction",
    "sample_poisson_zero_cell",
    "zero_cell_at_time",
]

DEFAULT_MAX_EVENTS = 10_000_000
_MAX_SPLIT_RETRIES = 50


@dataclass(frozen=True)
class Cell:
    """One cell of the division history."""

    id: int
    geometry: Box | ConvexPolygon2
    birth: float
    death: float | None = None
    parent: int | None = None
    plane: Hyperplane | None = None  # dividing hyperplane at death
    children: tuple[int, int] | None = None

    def alive_at(self, t: float) -> bool:
        return self.birth <= t and (self.death is None or t < self.death)


@dataclass(frozen=True)
class DivisionEvent:
    """A single division: parent splits into (child_lo, child_hi) at `time`."""

    time: float
    parent: int
    plane: Hyperplane
    child_lo: int
    child_hi: int


class EventLog:
    """Full history of a division run.

    Replaying the events from the window geometry reproduces every cell
    deterministically; the cell table is materialized lazily and cached.
    """

    def __init__(
        self,
        window,
        rule,
        phi,
        t_max: float,
        *,
        seed: int | None = None,
        max_events: int = DEFAULT_MAX_EVENTS,
        min_cell_volume: float = 0.0,
        notes: tuple[str, ...] = (),
    ) -> None:
        self.window = window
        self.rule = rule
        self.phi = phi
        self.t_max = t_max
        self.seed = seed
        self.max_events = max_events
        self.min_cell_volume = min_cell_volume
        self.notes = notes
        self.events: list[DivisionEvent] = []
        self.truncated = False
        self.volume_floor_hits = 0
        self._cells: dict[int, Cell] | None = None

    def append(self, event: DivisionEvent) -> None:
        if self.events and event.time <= self.events[-1].time:
            raise ValueError("event times must be strictly increasing")
        self.events.append(event)
        self._cells = None

    def n_events(self) -> int:
        return len(self.events)

    def cells(self) -> dict[int, Cell]:
        """Cell table obtained by replaying all logged events."""
        if self._cells is None:
            cells: dict[int, Cell] = {0: Cell(0, self.window, 0.0)}
            for e in self.events:
                parent = cells[e.parent]
                lo, hi = split_cell(parent.geometry, e.plane)
                cells[e.parent] = replace(
                    parent, death=e.time, plane=e.plane, children=(e.child_lo, e.child_hi)
                )
                cells[e.child_lo] = Cell(e.child_lo, lo, e.time, parent=e.parent)
                cells[e.child_hi] = Cell(e.child_hi, hi, e.time, parent=e.parent)
            self._cells = cells
        return self._cells

    def _set_cells(self, cells: dict[int, Cell]) -> None:
        self._cells = cells


@dataclass(frozen=True)
class TessellationSnapshot:
    """The cells alive at one instant, covering the window."""

    time: float
    cells: tuple[Cell, ...]
    window: object = None

    def total_volume(self) -> float:
        return sum(cell_volume(c.geometry) for c in self.cells)

    def __len__(self) -> int:
        return len(self.cells)


def _rate_fn(rule, phi):
    if isinstance(rule, ConstantRule):
        c = rule.c
        return lambda z: c
    return lambda z: lifetime_rate(rule, z, phi)


def run_in_window(
    window,
    rule,
    phi,
    t_max: float,
    rng,
    *,
    max_events: int = DEFAULT_MAX_EVENTS,
    min_cell_volume: float = 0.0,
    seed: int | None = None,
    notes: tuple[str, ...] = (),
) -> EventLog:
    """Simulate the division process in a window up to time t_max.

    The run starts from the window as the single cell.  `max_events` and
    `min_cell_volume` guard against near-explosive parameter choices; when a
    cap bites, the log carries an explicit flag (`truncated`, respectively
    `volume_floor_hits`).  Cells below the volume floor are never divided.
    """
    if not t_max > 0.0:
        raise GeometryError("t_max must be > 0")
    if math.isinf(t_max) and max_events >= DEFAULT_MAX_EVENTS:
        raise GeometryError("infinite t_max requires a finite max_events cap")
    if isinstance(phi, Atoms2D) and isinstance(window, Box):
        window = window.to_polygon()
    log = EventLog(
        window,
        rule,
        phi,
        t_max,
        seed=seed,
        max_events=max_events,
        min_cell_volume=min_cell_volume,
        notes=notes,
    )
    rate_of = _rate_fn(rule, phi)

    cells: dict[int, Cell] = {0: Cell(0, window, 0.0)}
    geoms = {0: window}
    heap: list[tuple[float, int]] = []

    def schedule(cid: int, geom, birth: float) -> None:
        if min_cell_volume > 0.0 and cell_volume(geom) < min_cell_volume:
            log.volume_floor_hits += 1
            return
        rate = rate_of(geom)
        if rate > 0.0:
            heapq.heappush(heap, (birth + rng.standard_exponential() / rate, cid))

    schedule(0, window, 0.0)
    next_id = 1
    while heap:
        t, cid = heapq.heappop(heap)
        if t > t_max:
            break
        if len(log.events) >= max_events:
            log.truncated = True
            break
        geom = geoms.pop(cid)
        for attempt in range(_MAX_SPLIT_RETRIES):
            plane = sample_dividing_hyperplane(geom, phi, rng)
            try:
                lo, hi = split_cell(geom, plane)
                break
            except SplitRejected:
                continue
        else:
            raise GeometryError(f"could not split cell {cid} after {_MAX_SPLIT_RETRIES} attempts")
        id_lo, id_hi = next_id, next_id + 1
        next_id += 2
        log.append(DivisionEvent(t, cid, plane, id_lo, id_hi))
        cells[cid] = replace(cells[cid], death=t, plane=plane, children=(id_lo, id_hi))
        cells[id_lo] = Cell(id_lo, lo, t, parent=cid)
        cells[id_hi] = Cell(id_hi, hi, t, parent=cid)
        geoms[id_lo] = lo
        geoms[id_hi] = hi
        schedule(id_lo, lo, t)
        schedule(id_hi, hi, t)
    log._set_cells(cells)
    return log


def stit_reference_run(window, phi, t_max: float, rng, **caps) -> EventLog:
    """Division run with the hitting-measure life-time rule.

    This is the one spatially consistent model: launching it directly in the
    window already has the law of the whole-space process restricted to the
    window, so no cut-out embedding is needed.  The note on the returned log
    records this.
    """
    caps.setdefault(
        "notes",
        ("spatially consistent reference model: in-window launch equals whole-space restriction",),
    )
    return run_in_window(window, LambdaRule(), phi, t_max, rng, **caps)


def snapshot_at(log: EventLog, t: float) -> TessellationSnapshot:
    """Cells alive at time t (birth <= t < death)."""
    if not 0.0 <= t <= log.t_max:
        raise GeometryError(f"time {t} outside [0, {log.t_max}]")
    alive = tuple(c for c in log.cells().values() if c.alive_at(t))
    return TessellationSnapshot(t, alive, log.window)


# ---------------------------------------------------------------------------
# zero cells of the auxiliary Poisson process, cut-out construction


def _zero_cell_from_planes(planes: list[MarkedHyperplane], d: int) -> tuple[list[float], list[float]] | None:
    """Nearest-plane zero cell around the origin, or None when some side has
    no plane (the cell would be censored by the sampling region)."""
    lower = [None] * d
    upper = [None] * d
    for m in planes:
        p = m.plane
        if not isinstance(p, AxisPlane):
            raise GeometryError("zero-cell shortcut requires axis-aligned planes")
        x = p.offset
        k = p.axis
        if x > 0.0:
            if upper[k] is None or x < upper[k]:
                upper[k] = x
        elif x < 0.0:
            if lower[k] is None or x > lower[k]:
                lower[k] = x
    if any(v is None for v in lower) or any(v is None for v in upper):
        return None
    return lower, upper


def sample_poisson_zero_cell(phi: Mondrian, time: float, rng, *, tail: float = 40.0) -> Box:
    """Zero cell of the Poisson hyperplane tessellation at a fixed time.

    Samples the marked process on a box large enough that a missing nearest
    plane has probability ~exp(-tail), computes the nearest plane on each
    side of the origin, and enlarges the region in the rare censored case.
    """
    if not isinstance(phi, Mondrian):
        raise GeometryError("zero-cell sampling requires a Mondrian distribution")
    if not time > 0.0:
        raise GeometryError("time must be > 0")
    d = phi.dim
    half = [tail / (p * time) for p in phi.weights]
    for _ in range(50):
        region = Box(tuple(-h for h in half), tuple(half))
        planes = sample_marked_hyperplanes(region, 0.0, time, phi, rng)
        zc = _zero_cell_from_planes(planes, d)
        if zc is not None:
            return Box(tuple(zc[0]), tuple(zc[1]))
        half = [2.0 * h for h in half]
    raise GeometryError("zero-cell sampling failed to find planes on every side")


@dataclass
class CutoutResult:
    """A window cut-out embedded in a sampled enclosing zero cell.

    All times of the inner run are relative: the construction reproduces the
    law of the whole-space restriction shifted by an unknown offset (the
    jump time at which the enclosing zero cell appears is not observable).
    """

    zero_cell: Box
    rounds: int
    log: EventLog
    window: Box
    relative_time_only: bool = True

    def snapshot_at(self, t: float) -> TessellationSnapshot:
        """Inner tessellation at relative time t, clipped to the window."""
        inner = snapshot_at(self.log, t)
        clipped = []
        for c in inner.cells:
            g = c.geometry.intersect(self.window)
            if g is not None:
                clipped.append(replace(c, geometry=g))
        return TessellationSnapshot(t, tuple(clipped), self.window)


def cutout_construction(
    window: Box,
    rule,
    phi: Mondrian,
    t_run: float,
    rng,
    *,
    max_rounds: int = 10_000,
    **caps,
) -> CutoutResult:
    """Embed a window in a sampled zero cell and run the division process.

    Round n (starting at 2) samples the marked Poisson process restricted to
    the hyperplanes hitting the bounding box of the radius-n*R ball with
    birth times below 1/n, where R is minimal with window inside the
    R-ball.  The round is accepted when the induced zero cell strictly
    contains the window and does not touch the sampling region boundary
    (otherwise the cell would be censored).  The division process then runs
    inside the accepted zero cell for `t_run` and snapshots are clipped to
    the window.  Output times are relative only.
    """
    if not isinstance(phi, Mondrian):
        raise GeometryError("the cut-out construction requires a Mondrian distribution")
    d = phi.dim
    if window.dim != d:
        raise GeometryError("window dimension does not match the distribution")
    radius = max(math.sqrt(sum(c * c for c in corner)) for corner in window.corners())
    if radius <= 0.0:
        raise GeometryError("window must be nondegenerate")
    for n in range(2, max_rounds + 2):
        half = n * radius
        region = Box((-half,) * d, (half,) * d)
        planes = sample_marked_hyperplanes(region, 0.0, 1.0 / n, phi, rng)
        zc = _zero_cell_from_planes(planes, d)
        if zc is None:
            continue
        lower, upper = zc
        inside_region = all(lo > -half and hi < half for lo, hi in zip(lower, upper))
        covers = all(
            lo < wl and wu < hi
            for lo, hi, wl, wu in zip(lower, upper, window.lower, window.upper)
        )
        if inside_region and covers:
            cell = Box(tuple(lower), tuple(upper))
            log = run_in_window(cell, rule, phi, t_run, rng, **caps)
            log.notes = log.notes + (
                "relative time only: the offset of the enclosing zero cell is unknown",
            )
            return CutoutResult(cell, n, log, window)
    raise GeometryError(f"no enclosing zero cell found in {max_rounds} rounds")


# ---------------------------------------------------------------------------
# time-changed zero-cell sampler


def _origin_side(z: Box, plane: AxisPlane) -> Box:
    lo, hi = split_cell(z, plane)
    return lo if plane.offset > 0.0 else hi


def zero_cell_at_time(rule, phi: Mondrian, t: float, rng, *, chain_depth: int = 40) -> Box:
    """Zero cell of the whole-space division process at time t.

    Implements the existence construction: the backward zero-cell chain of
    the Poisson hyperplane process supplies the jump states, and the clock
    is changed so that state z is held for an Exp(G(z)) time.  The clock is
    accumulated from the deepest sampled state (the neglected tail of the
    holding-time series is exponentially small in the chain depth; the
    chain is deepened automatically when t falls too close to the
    truncation).  Beyond the top of the backward chain the jump chain is
    continued forward: cut by a hyperplane from the normalized hitting
    measure, keep the piece containing the origin.
    """
    if not isinstance(phi, Mondrian):
        raise GeometryError("zero-cell sampling requires a Mondrian distribution")
    if isinstance(rule, ConstantRule):
        raise GeometryError("constant rule: the holding-time series diverges, no whole-space process")
    if isinstance(rule, IntrinsicVolumeRule) and rule.alpha < 1.0:
        raise GeometryError("alpha < 1 is not valid for the whole-space construction")
    if not t > 0.0:
        raise GeometryError("t must be > 0")
    depth = chain_depth
    for _ in range(12):
        chain = build_zero_cell_chain(phi, depth, rng)
        clock = 0.0
        hit: Box | None = None
        hit_index = None
        for i in range(depth - 1, -1, -1):
            z = chain.box(i)
            g = lifetime_rate(rule, z, phi)
            clock += rng.standard_exponential() / g
            if t < clock:
                hit = z
                hit_index = i
                break
        if hit is not None:
            # too close to the truncated tail: deepen and retry
            if hit_index > depth - 6:
                depth *= 2
                continue
            return hit
        z = chain.box(0)
        while True:
            plane = sample_dividing_hyperplane(z, phi, rng)
            try:
                z = _origin_side(z, plane)
            except SplitRejected:
                continue
            clock += rng.standard_exponential() / lifetime_rate(rule, z, phi)
            if t < clock:
                return z
    raise GeometryError("time-changed zero-cell sampling did not stabilize")
