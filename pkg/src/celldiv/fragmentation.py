"""Binary mass-fragmentation chain and its link to the geometric simulator.

The chain lives on finite descending mass vectors with unit total mass.
Jumps happen at unit exponential rate; at a jump one fragment is chosen
with probability equal to its mass and split into (U*m, (1-U)*m) with U
uniform on (0,1).  This is exactly the jump chain induced by the
volume-rate division process in a unit-volume window when the state is read
as the ordered vector of cell volumes, which `equivalence_check` verifies
distributionally on replicate collections.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .division import EventLog
from .geometry import GeometryError, cell_volume, split_cell
from . import stats as _stats

__all__ = [
    "MassPartition",
    "FragEvent",
    "frag_step",
    "run_fragmentation",
    "mass_chain_from_log",
    "EquivalenceReport",
    "equivalence_check",
]


@dataclass(frozen=True)
class MassPartition:
    """Finite descending vector of strictly positive masses."""

    masses: tuple[float, ...]

    def __post_init__(self) -> None:
        m = tuple(float(v) for v in self.masses)
        object.__setattr__(self, "masses", m)
        if not m:
            raise GeometryError("partition must be nonempty")
        if any(v <= 0.0 for v in m):
            raise GeometryError("masses must be strictly positive")
        if any(a < b for a, b in zip(m, m[1:])):
            raise GeometryError("masses must be sorted descending")

    def total(self) -> float:
        return sum(self.masses)

    def __len__(self) -> int:
        return len(self.masses)


@dataclass(frozen=True)
class FragEvent:
    """One jump of the chain: fragment `index` split by fraction `u`."""

    time: float
    index: int
    u: float
    partition: MassPartition


def _partition_unchecked(masses: tuple[float, ...]) -> MassPartition:
    # fast path for states the chain maintains itself (sorted, positive)
    p = object.__new__(MassPartition)
    object.__setattr__(p, "masses", masses)
    return p


def _step(state: list[float], total: float, rng) -> tuple[float, int, float, float]:
    """Advance the descending internal state by one jump in place.

    Returns (holding time, selected index, split fraction, new total).
    Selection walks from the largest mass, which terminates after O(1)
    expected steps because the selection is mass-weighted.
    """
    hold = rng.standard_exponential()
    r = rng.random() * total
    k = 0
    acc = state[0]
    last = len(state) - 1
    while acc < r and k < last:
        k += 1
        acc += state[k]
    u = rng.random()
    m = state.pop(k)
    a = u * m
    b = (1.0 - u) * m
    bisect.insort(state, a, key=_NEG)
    bisect.insort(state, b, key=_NEG)
    return hold, k, u, total - m + a + b


_NEG = float.__neg__  # descending order via a negating bisect key


def frag_step(state: MassPartition, rng, *, t0: float = 0.0) -> FragEvent:
    """One jump from `state`: exponential holding time with parameter 1,
    fragment chosen with probability equal to its mass, uniform split."""
    total = state.total()
    if abs(total - 1.0) > 1e-9:
        raise GeometryError("fragmentation state must have unit total mass")
    masses = list(state.masses)
    hold, rank, u, _ = _step(masses, total, rng)
    return FragEvent(t0 + hold, rank, u, _partition_unchecked(tuple(masses)))


def run_fragmentation(n_jumps: int, rng, *, initial: MassPartition | None = None) -> list[FragEvent]:
    """Jump chain of length n_jumps started from the unit mass."""
    if n_jumps < 1:
        raise GeometryError("n_jumps must be >= 1")
    state = initial if initial is not None else MassPartition((1.0,))
    total = state.total()
    if abs(total - 1.0) > 1e-9:
        raise GeometryError("fragmentation state must have unit total mass")
    masses = list(state.masses)
    events: list[FragEvent] = []
    t = 0.0
    for _ in range(n_jumps):
        hold, rank, u, total = _step(masses, total, rng)
        t += hold
        events.append(FragEvent(t, rank, u, _partition_unchecked(tuple(masses))))
    return events


def mass_chain_from_log(log: EventLog) -> list[FragEvent]:
    """Read a geometric division log as a mass-partition jump chain.

    Masses are cell volumes divided by the window volume; when the window
    volume differs from 1 the clock is rescaled by it as well (the chain is
    self-similar with index 1), and the events carry that normalization.
    """
    w_vol = cell_volume(log.window)
    geoms = {0: log.window}
    vols = {0: w_vol}
    events: list[FragEvent] = []
    for e in log.events:
        parent_geom = geoms.pop(e.parent)
        lo, hi = split_cell(parent_geom, e.plane)
        parent_vol = vols.pop(e.parent)
        v_lo, v_hi = cell_volume(lo), cell_volume(hi)
        m = parent_vol / w_vol
        rank = sum(1 for v in vols.values() if v > parent_vol)
        geoms[e.child_lo] = lo
        geoms[e.child_hi] = hi
        vols[e.child_lo] = v_lo
        vols[e.child_hi] = v_hi
        partition = MassPartition(tuple(sorted((v / w_vol for v in vols.values()), reverse=True)))
        events.append(FragEvent(e.time * w_vol, rank, (v_lo / w_vol) / m, partition))
    return events


@dataclass
class EquivalenceReport:
    """Distributional comparison of geometric and abstract chains."""

    dislocation: "_stats.GoFResult"
    holding: "_stats.GoFResult"
    largest: "_stats.GoFResult"
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.dislocation.passed and self.holding.passed and self.largest.passed


def _chain_stats(runs: Iterable[Sequence[FragEvent]], n_jumps: int):
    xis: list[float] = []
    holds: list[float] = []
    largest: list[float] = []
    for run in runs:
        if len(run) < n_jumps:
            raise GeometryError(f"each run must have at least {n_jumps} jumps")
        prev = 0.0
        for e in run[:n_jumps]:
            xis.append(max(e.u, 1.0 - e.u))
            holds.append(e.time - prev)
            prev = e.time
        largest.append(run[n_jumps - 1].partition.masses[0])
    return np.asarray(xis), np.asarray(holds), np.asarray(largest)


def equivalence_check(
    logs: Sequence[EventLog],
    frag_runs: Sequence[Sequence[FragEvent]],
    *,
    n_jumps: int = 10,
    level: float = 0.01,
) -> EquivalenceReport:
    """Two-sample comparison of the chains induced by geometric logs against
    abstract fragmentation runs: the largest split fraction per dislocation,
    the holding times, and the largest fragment after n_jumps jumps."""
    notes: tuple[str, ...] = ()
    for log in logs:
        if abs(cell_volume(log.window) - 1.0) > 1e-9:
            notes = ("windows rescaled to unit mass (self-similarity, index 1)",)
            break
    geo = [mass_chain_from_log(log) for log in logs]
    gx, gh, gl = _chain_stats(geo, n_jumps)
    ax, ah, al = _chain_stats(frag_runs, n_jumps)
    return EquivalenceReport(
        dislocation=_stats.ks_test(gx, _stats.Empirical(ax), level=level, name="dislocation fraction"),
        holding=_stats.ks_test(gh, _stats.Empirical(ah), level=level, name="holding times"),
        largest=_stats.ks_test(gl, _stats.Empirical(al), level=level, name=f"largest fragment after {n_jumps}"),
        notes=notes,
    )
