"""Estimators and goodness-of-fit tests for tessellation statistics.

Kolmogorov-Smirnov tests use the asymptotic Kolmogorov tail (100-term
series) rather than exact small-n tables; the intended sample sizes are in
the thousands, where the asymptotic p-value is accurate, and a calibration
test in the suite checks the rejection rate under the null.  All tests are
pure functions of their inputs: repeated calls return identical results.

The typical cell is estimated by minus-sampling: a cell enters the sample,
whole, when its reference point (lower corner for boxes, lexicographically
smallest vertex for polygons) lies in the window eroded by a margin.  Every
sampled cell has equal weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy import special as sc

from .division import Cell, TessellationSnapshot
from .geometry import Box, GeometryError, cell_volume, reference_point

__all__ = [
    "Exp",
    "Gamma",
    "Uniform",
    "PowerMax",
    "Empirical",
    "GoFResult",
    "SampleSummary",
    "kolmogorov_sf",
    "ks_test",
    "cv_report",
    "poisson_count_test",
    "typical_cell_samples",
    "minus_sampled_volumes",
    "scaling_check",
]


# ---------------------------------------------------------------------------
# distribution specs (closed-form cdfs except the general gamma)


@dataclass(frozen=True)
class Exp:
    rate: float


@dataclass(frozen=True)
class Gamma:
    shape: float
    rate: float


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float


@dataclass(frozen=True)
class PowerMax:
    """cdf r**degree on (0,1): the maximum of `degree` independent uniforms."""

    degree: int


@dataclass(frozen=True)
class Empirical:
    """Two-sample comparison against a reference sample."""

    reference: tuple[float, ...]

    def __init__(self, reference) -> None:
        object.__setattr__(self, "reference", tuple(float(v) for v in reference))


DistributionSpec = Union[Exp, Gamma, Uniform, PowerMax, Empirical]


def _cdf(spec, x: np.ndarray) -> np.ndarray:
    if isinstance(spec, Exp):
        return -np.expm1(-spec.rate * np.maximum(x, 0.0))
    if isinstance(spec, Gamma):
        return sc.gammainc(spec.shape, spec.rate * np.maximum(x, 0.0))
    if isinstance(spec, Uniform):
        return np.clip((x - spec.a) / (spec.b - spec.a), 0.0, 1.0)
    if isinstance(spec, PowerMax):
        return np.clip(x, 0.0, 1.0) ** spec.degree
    raise GeometryError(f"unsupported distribution spec {spec!r}")


def _spec_name(spec) -> str:
    if isinstance(spec, Exp):
        return f"Exp({spec.rate:g})"
    if isinstance(spec, Gamma):
        return f"Gamma({spec.shape:g},{spec.rate:g})"
    if isinstance(spec, Uniform):
        return f"U({spec.a:g},{spec.b:g})"
    if isinstance(spec, PowerMax):
        return f"PowerMax({spec.degree})"
    return f"Empirical(n={len(spec.reference)})"


# ---------------------------------------------------------------------------
# test results


@dataclass(frozen=True)
class GoFResult:
    name: str
    statistic: float
    p_value: float
    n: int
    passed: bool
    level: float
    notes: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise GeometryError("p-value outside [0, 1]")

    def line(self) -> str:
        flag = "pass" if self.passed else "FAIL"
        return (
            f"[{flag}] {self.name}: stat={self.statistic:.5g} "
            f"p={self.p_value:.4g} n={self.n} level={self.level:g}"
            + (f" ({self.notes})" if self.notes else "")
        )


@dataclass(frozen=True)
class SampleSummary:
    """Moments of a nonnegative sample.

    `cv` is the coefficient of variation in its squared (relative variance)
    form Var/mean**2, the normalization under which an exponential sample
    scores 1 and a product of d independent exponentials scores 2**d - 1.
    """

    n: int
    mean: float
    variance: float
    cv: float
    cv_se: float
    quantiles: tuple[tuple[float, float], ...]

    def line(self) -> str:
        return (
            f"n={self.n} mean={self.mean:.6g} var={self.variance:.6g} "
            f"cv={self.cv:.4f} (bootstrap se {self.cv_se:.4f})"
        )


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov


def kolmogorov_sf(lam: float, terms: int = 100) -> float:
    """Asymptotic Kolmogorov tail probability via its alternating series."""
    if lam <= 0.0:
        return 1.0
    ks = np.arange(1, terms + 1, dtype=float)
    s = 2.0 * np.sum((-1.0) ** (ks - 1) * np.exp(-2.0 * ks * ks * lam * lam))
    return float(min(1.0, max(0.0, s)))


def _ks_one_sample(x: np.ndarray, spec) -> float:
    x = np.sort(x)
    n = len(x)
    f = _cdf(spec, x)
    up = np.max(np.arange(1, n + 1) / n - f)
    down = np.max(f - np.arange(0, n) / n)
    return float(max(up, down))


def _ks_two_sample(x: np.ndarray, y: np.ndarray) -> float:
    x = np.sort(x)
    y = np.sort(y)
    data = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, data, side="right") / len(x)
    cdf_y = np.searchsorted(y, data, side="right") / len(y)
    return float(np.max(np.abs(cdf_x - cdf_y)))


def ks_test(samples, spec, *, level: float = 0.01, name: str | None = None) -> GoFResult:
    """One-sample KS test against a distribution spec, or two-sample against
    an Empirical reference, with the asymptotic p-value."""
    x = np.asarray(samples, dtype=float)
    if len(x) < 20:
        raise GeometryError("KS test needs at least 20 samples")
    if isinstance(spec, Empirical):
        y = np.asarray(spec.reference, dtype=float)
        d = _ks_two_sample(x, y)
        n_eff = len(x) * len(y) / (len(x) + len(y))
    else:
        d = _ks_one_sample(x, spec)
        n_eff = float(len(x))
    p = kolmogorov_sf(math.sqrt(n_eff) * d)
    label = name or f"KS vs {_spec_name(spec)}"
    return GoFResult(label, d, p, len(x), p > level, level)


# ---------------------------------------------------------------------------
# moments


_BOOTSTRAP_SEED = 20230301


def _cv_of(x: np.ndarray) -> float:
    m = float(np.mean(x))
    v = float(np.var(x, ddof=1))
    return v / (m * m)


def cv_report(samples, *, bootstrap: int = 2000, rng=None) -> SampleSummary:
    """Sample moments with the squared coefficient of variation and its
    bootstrap standard error (resampling is internally seeded, so repeated
    calls on the same sample agree)."""
    x = np.asarray(samples, dtype=float)
    if len(x) < 100:
        raise GeometryError("cv_report needs at least 100 samples")
    m = float(np.mean(x))
    if not m > 0.0:
        raise GeometryError("cv is defined for positive-mean samples only")
    v = float(np.var(x, ddof=1))
    cv = v / (m * m)
    if rng is None:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(_BOOTSTRAP_SEED)))
    reps = np.empty(bootstrap)
    n = len(x)
    for b in range(bootstrap):
        reps[b] = _cv_of(x[rng.integers(0, n, n)])
    qs = (0.05, 0.25, 0.5, 0.75, 0.95)
    quantiles = tuple((q, float(np.quantile(x, q))) for q in qs)
    return SampleSummary(n, m, v, cv, float(np.std(reps)), quantiles)


# ---------------------------------------------------------------------------
# Poisson count test


def _chi2_sf(stat: float, dof: int) -> float:
    return float(sc.gammaincc(dof / 2.0, stat / 2.0))


def poisson_count_test(counts, mean: float, *, level: float = 0.01) -> GoFResult:
    """Dispersion (variance/mean) plus chi-square test against Poisson(mean).

    Passes when both sub-tests exceed the level; the reported p-value is the
    smaller of the two.
    """
    c = np.asarray(counts, dtype=float)
    n = len(c)
    if n < 200:
        raise GeometryError("poisson_count_test needs at least 200 replicate counts")
    if mean == 0.0:
        ok = bool(np.all(c == 0.0))
        return GoFResult("poisson(0)", 0.0, 1.0 if ok else 0.0, n, ok, level)
    cbar = float(np.mean(c))
    disp_stat = float(np.sum((c - cbar) ** 2) / cbar)
    sf = _chi2_sf(disp_stat, n - 1)
    p_disp = min(1.0, 2.0 * min(sf, 1.0 - sf))
    dispersion = disp_stat / (n - 1)

    # chi-square bins with expected count >= 5, tails merged
    kmax = int(mean + 12.0 * math.sqrt(mean)) + 2
    ks = np.arange(0, kmax + 1)
    log_pmf = -mean + ks * math.log(mean) - sc.gammaln(ks + 1.0)
    pmf = np.exp(log_pmf)
    pmf = np.append(pmf, max(0.0, 1.0 - pmf.sum()))
    expected = n * pmf
    edges = [0]
    acc = 0.0
    for i, e in enumerate(expected):
        acc += e
        if acc >= 5.0:
            edges.append(i + 1)
            acc = 0.0
    if acc > 0.0 and len(edges) > 1:
        edges[-1] = len(expected)
    obs_full = np.bincount(np.clip(c.astype(int), 0, kmax + 1), minlength=kmax + 2).astype(float)
    obs = np.array([obs_full[a:b].sum() for a, b in zip(edges, edges[1:])])
    exp_binned = np.array([expected[a:b].sum() for a, b in zip(edges, edges[1:])])
    chi2 = float(np.sum((obs - exp_binned) ** 2 / exp_binned))
    p_chi2 = _chi2_sf(chi2, len(obs) - 1)

    p = min(p_disp, p_chi2)
    return GoFResult(
        f"poisson({mean:g})",
        dispersion,
        p,
        n,
        p > level,
        level,
        notes=f"dispersion p={p_disp:.4g}, chi2 p={p_chi2:.4g} ({len(obs)} bins)",
    )


# ---------------------------------------------------------------------------
# typical-cell sampling


def typical_cell_samples(snapshot: TessellationSnapshot, window: Box, margin: float) -> list[Cell]:
    """Minus-sampling estimator of the typical cell.

    Returns the cells whose reference point lies in the window eroded by
    `margin` (closed containment, so margin 0 keeps every cell).  A cell
    straddling the window boundary whose reference point is inside the
    eroded window is included whole.
    """
    if not isinstance(window, Box):
        raise GeometryError("minus-sampling requires a box window")
    if margin < 0.0:
        raise GeometryError("margin must be >= 0")
    if margin >= 0.5 * min(window.sides):
        raise GeometryError("margin must be below half the smallest window side")
    lo = tuple(a + margin for a in window.lower)
    hi = tuple(b - margin for b in window.upper)
    out = []
    for c in snapshot.cells:
        p = reference_point(c.geometry)
        if all(a <= x <= b for a, x, b in zip(lo, p, hi)):
            out.append(c)
    return out


def minus_sampled_volumes(snapshot: TessellationSnapshot, window: Box, margin: float) -> np.ndarray:
    """Volumes of the minus-sampled cells."""
    return np.array([cell_volume(c.geometry) for c in typical_cell_samples(snapshot, window, margin)])


# ---------------------------------------------------------------------------
# scaling check


def scaling_check(
    sampler: Callable,
    t1: float,
    t2: float,
    reps: int,
    rng,
    *,
    scale: bool = True,
    level: float = 0.01,
) -> GoFResult:
    """Two-sample KS between t1-scaled zero-cell volumes at time t1 and
    t2-scaled volumes at time t2.

    `sampler(t, rng)` must return one volume of the zero cell at time t.
    With `scale=False` the raw volumes are compared (a negative control:
    the raw laws differ whenever t1 != t2).
    """
    if reps < 1000:
        raise GeometryError("scaling_check needs at least 1000 replicates")
    x1 = np.array([sampler(t1, rng) for _ in range(reps)])
    x2 = np.array([sampler(t2, rng) for _ in range(reps)])
    if scale:
        x1 = t1 * x1
        x2 = t2 * x2
    label = f"scaling t1={t1:g} vs t2={t2:g}" + ("" if scale else " (unscaled control)")
    return ks_test(x1, Empirical(x2), level=level, name=label)
