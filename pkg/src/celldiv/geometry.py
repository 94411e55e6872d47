"""Cell geometries, hyperplane hitting measures and cell splitting.

Cells are axis-aligned boxes in any dimension, or convex polygons in the
plane.  A directional distribution puts weights on hyperplane normal
directions; together with a cell it determines

* the total measure of the set of hyperplanes hitting the cell,
* the law of a random hyperplane dividing the cell (direction chosen
  proportionally to weight times cell width, offset uniform over the
  support interval), and
* the life-time functionals used by the division engine.

Directions are stored canonically (an axis index, or a unit vector in the
upper half circle) carrying the full weight of the +/- direction pair, so
each geometric hyperplane is parametrized exactly once.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Union

__all__ = [
    "REL_TOL",
    "GeometryError",
    "SplitRejected",
    "Box",
    "ConvexPolygon2",
    "Mondrian",
    "Atoms2D",
    "DirectionalDistribution",
    "AxisPlane",
    "Line2",
    "Hyperplane",
    "LambdaRule",
    "SumOfSidesRule",
    "IntrinsicVolumeRule",
    "ConstantRule",
    "LifetimeRule",
    "cell_volume",
    "cell_diameter",
    "support_interval",
    "width",
    "lambda_hit_rate",
    "intrinsic_volume",
    "lifetime_rate",
    "sample_dividing_hyperplane",
    "split_cell",
]

# Geometric tolerance, relative to the cell diameter.  Dividing hyperplanes
# landing within this distance of a face are rejected and resampled; an
# exact-boundary split has probability zero in the model.
REL_TOL = 1e-12


class GeometryError(ValueError):
    """Invalid geometry, or a geometry/distribution variant mismatch."""


class SplitRejected(GeometryError):
    """The hyperplane misses the cell interior (within tolerance).

    This is a rejection signal: the caller is expected to resample the
    dividing hyperplane.
    """


# ---------------------------------------------------------------------------
# cell geometries


@dataclass(frozen=True)
class Box:
    """Axis-aligned cuboid with strictly positive side lengths."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi) or not lo:
            raise GeometryError("lower/upper must be nonempty and of equal length")
        for a, b in zip(lo, hi):
            if not (math.isfinite(a) and math.isfinite(b)):
                raise GeometryError("box coordinates must be finite")
            if not a < b:
                raise GeometryError(f"degenerate box: lower {a} !< upper {b}")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def sides(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lower, self.upper))

    def volume(self) -> float:
        return math.prod(self.sides)

    def sum_of_sides(self) -> float:
        return sum(self.sides)

    def diameter(self) -> float:
        return math.sqrt(sum(s * s for s in self.sides))

    def corners(self) -> list[tuple[float, ...]]:
        pts = [()]
        for a, b in zip(self.lower, self.upper):
            pts = [p + (c,) for p in pts for c in (a, b)]
        return pts

    def contains(self, point, strict: bool = False) -> bool:
        if strict:
            return all(a < x < b for a, x, b in zip(self.lower, point, self.upper))
        return all(a <= x <= b for a, x, b in zip(self.lower, point, self.upper))

    def translate(self, shift) -> "Box":
        return Box(
            tuple(a + s for a, s in zip(self.lower, shift)),
            tuple(b + s for b, s in zip(self.upper, shift)),
        )

    def to_polygon(self) -> "ConvexPolygon2":
        if self.dim != 2:
            raise GeometryError("only 2-d boxes convert to polygons")
        (x0, y0), (x1, y1) = self.lower, self.upper
        return ConvexPolygon2(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    def intersect(self, other: "Box") -> "Box | None":
        """Intersection box, or None when the interiors do not meet."""
        lo = tuple(max(a, c) for a, c in zip(self.lower, other.lower))
        hi = tuple(min(b, d) for b, d in zip(self.upper, other.upper))
        if any(a >= b for a, b in zip(lo, hi)):
            return None
        return Box(lo, hi)


def _shoelace2(vertices) -> float:
    a = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        a += x0 * y1 - x1 * y0
    return 0.5 * a


@dataclass(frozen=True)
class ConvexPolygon2:
    """Convex polygon in the plane, vertices counter-clockwise."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        vs = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if len(vs) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        area = _shoelace2(vs)
        if not area > 0.0:
            raise GeometryError("polygon must have positive area and CCW orientation")
        # Convexity up to tolerance; collinear vertices (from repeated clips)
        # are allowed.
        scale = self.diameter()
        tol = 1e-9 * scale * scale
        n = len(vs)
        for i in range(n):
            ax, ay = vs[i]
            bx, by = vs[(i + 1) % n]
            cx, cy = vs[(i + 2) % n]
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if cross < -tol:
                raise GeometryError("polygon is not convex (CCW) within tolerance")

    @property
    def dim(self) -> int:
        return 2

    def area(self) -> float:
        return _shoelace2(self.vertices)

    def volume(self) -> float:
        return self.area()

    def diameter(self) -> float:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return math.hypot(max(xs) - min(xs), max(ys) - min(ys))

    def reference_point(self) -> tuple[float, float]:
        """Lexicographically smallest vertex."""
        return min(self.vertices)

    def translate(self, shift) -> "ConvexPolygon2":
        sx, sy = shift
        return ConvexPolygon2(tuple((x + sx, y + sy) for x, y in self.vertices))


Cell = Union[Box, ConvexPolygon2]


def cell_volume(z) -> float:
    return z.volume()


def cell_diameter(z) -> float:
    return z.diameter()


def reference_point(z) -> tuple[float, ...]:
    """Reference point used for minus-sampling: the lower corner of a box,
    the lexicographically smallest vertex of a polygon."""
    if isinstance(z, Box):
        return z.lower
    return z.reference_point()


# ---------------------------------------------------------------------------
# directional distributions


@dataclass(frozen=True)
class Mondrian:
    """Directional distribution on the coordinate axes with weights p_k.

    All hyperplanes are axis-aligned, so every cell stays a cuboid.
    """

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise GeometryError("Mondrian needs d >= 1 weights")
        if any(v <= 0.0 for v in w):
            raise GeometryError("weights must be strictly positive")
        if abs(sum(w) - 1.0) > 1e-12:
            raise GeometryError("weights must sum to 1 within 1e-12")

    @property
    def dim(self) -> int:
        return len(self.weights)


def _canonical_direction(u) -> tuple[float, float]:
    ux, uy = float(u[0]), float(u[1])
    norm = math.hypot(ux, uy)
    if norm == 0.0:
        raise GeometryError("zero direction vector")
    # keep already-unit vectors bit-stable (file round trips)
    if abs(norm - 1.0) > 1e-12:
        ux, uy = ux / norm, uy / norm
    if uy < 0.0 or (uy == 0.0 and ux < 0.0):
        ux, uy = -ux, -uy
    return ux, uy


@dataclass(frozen=True)
class Atoms2D:
    """Atomic planar directional distribution: unit normals with weights.

    Normals are canonicalized to the upper half circle and each atom carries
    the full weight of its +/- direction pair.  At least two non-parallel
    directions are required, otherwise the generated cells would be
    unbounded strips.
    """

    directions: tuple[tuple[float, float], ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.directions) != len(self.weights):
            raise GeometryError("directions and weights must have equal length")
        canon: dict[tuple[float, float], float] = {}
        for u, p in zip(self.directions, self.weights):
            p = float(p)
            if p <= 0.0:
                raise GeometryError("weights must be strictly positive")
            cu = _canonical_direction(u)
            # merge +/- duplicates produced by canonicalization
            for known in canon:
                if math.hypot(known[0] - cu[0], known[1] - cu[1]) < 1e-12:
                    cu = known
                    break
            canon[cu] = canon.get(cu, 0.0) + p
        dirs = tuple(sorted(canon))
        w = tuple(canon[u] for u in dirs)
        if len(dirs) < 2:
            raise GeometryError("need at least 2 non-parallel directions")
        if abs(sum(w) - 1.0) > 1e-12:
            raise GeometryError("weights must sum to 1 within 1e-12")
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return 2


DirectionalDistribution = Union[Mondrian, Atoms2D]


# ---------------------------------------------------------------------------
# hyperplanes


@dataclass(frozen=True)
class AxisPlane:
    """Hyperplane orthogonal to coordinate axis `axis` at `offset`."""

    axis: int
    offset: float


@dataclass(frozen=True)
class Line2:
    """Line {y : <y, normal> = offset} with a unit normal."""

    normal: tuple[float, float]
    offset: float


Hyperplane = Union[AxisPlane, Line2]


# ---------------------------------------------------------------------------
# life-time rules


@dataclass(frozen=True)
class LambdaRule:
    """Life-time rate equal to the hyperplane measure of the hitting set.

    This is the STIT choice: division intensity matches the driving measure.
    """


@dataclass(frozen=True)
class SumOfSidesRule:
    """Life-time rate equal to the sum of the side lengths (boxes only)."""


@dataclass(frozen=True)
class IntrinsicVolumeRule:
    """Life-time rate V_n(z)**alpha for boxes.

    Exponents below 1 break the whole-space construction and are only
    meaningful for bounded-window runs; creating such a rule requires the
    explicit `allow_small_alpha` opt-in and emits a warning.
    """

    n: int
    alpha: float = 1.0
    allow_small_alpha: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GeometryError("intrinsic volume index n must be >= 1")
        if self.alpha < 1.0:
            if not self.allow_small_alpha:
                raise GeometryError(
                    "alpha < 1 is only permitted in bounded-window mode; "
                    "set allow_small_alpha=True to opt in"
                )
            warnings.warn(
                "alpha < 1: rule is valid only for bounded-window runs",
                stacklevel=2,
            )


@dataclass(frozen=True)
class ConstantRule:
    """Constant life-time rate c > 0 ('equally likely' cell selection)."""

    c: float

    def __post_init__(self) -> None:
        if not self.c > 0.0:
            raise GeometryError("constant rate must be > 0")


LifetimeRule = Union[LambdaRule, SumOfSidesRule, IntrinsicVolumeRule, ConstantRule]


# ---------------------------------------------------------------------------
# hitting measure, widths, intrinsic volumes


def support_interval(z, u) -> tuple[float, float]:
    """Range of <y, u> over the cell z."""
    if isinstance(z, Box):
        lo = hi = 0.0
        for uk, a, b in zip(u, z.lower, z.upper):
            if uk >= 0.0:
                lo += uk * a
                hi += uk * b
            else:
                lo += uk * b
                hi += uk * a
        return lo, hi
    dots = [vx * u[0] + vy * u[1] for vx, vy in z.vertices]
    return min(dots), max(dots)


def width(z, u) -> float:
    """Length of the support interval of z in direction u."""
    lo, hi = support_interval(z, u)
    return hi - lo


def lambda_hit_rate(z, phi) -> float:
    """Total measure of the hyperplanes hitting z.

    Equals the weighted sum of cell widths over the direction atoms; for a
    Mondrian distribution on a box this is sum_k p_k * side_k.
    """
    if isinstance(phi, Mondrian):
        if not isinstance(z, Box):
            raise GeometryError("Mondrian distribution requires box cells")
        if phi.dim != z.dim:
            raise GeometryError("dimension mismatch between cell and distribution")
        return sum(p * s for p, s in zip(phi.weights, z.sides))
    if z.dim != 2:
        raise GeometryError("planar atomic distribution requires 2-d cells")
    return sum(p * width(z, u) for u, p in zip(phi.directions, phi.weights))


def intrinsic_volume(z: Box, n: int) -> float:
    """Elementary symmetric polynomial of degree n in the side lengths."""
    if not isinstance(z, Box):
        raise GeometryError("intrinsic volumes implemented for boxes only")
    if not 1 <= n <= z.dim:
        raise GeometryError(f"n must be in 1..{z.dim}, got {n}")
    sides = z.sides
    return sum(math.prod(sides[k] for k in idx) for idx in combinations(range(z.dim), n))


def lifetime_rate(rule, z, phi=None) -> float:
    """Division rate G(z) of a cell under the given life-time rule."""
    if isinstance(rule, ConstantRule):
        return rule.c
    if isinstance(rule, LambdaRule):
        if phi is None:
            raise GeometryError("the hitting-measure rule needs a directional distribution")
        return lambda_hit_rate(z, phi)
    if not isinstance(z, Box):
        raise GeometryError("side-length based rules require box cells")
    if isinstance(rule, SumOfSidesRule):
        return z.sum_of_sides()
    if isinstance(rule, IntrinsicVolumeRule):
        v = intrinsic_volume(z, rule.n)
        return v if rule.alpha == 1.0 else v**rule.alpha
    raise GeometryError(f"unknown life-time rule {rule!r}")


# ---------------------------------------------------------------------------
# dividing hyperplanes and splitting

_MAX_RESAMPLE = 100


def sample_dividing_hyperplane(z, phi, rng) -> Hyperplane:
    """Draw the random hyperplane dividing z.

    The direction atom is chosen with probability proportional to its weight
    times the cell width in that direction, the offset uniformly over the
    support interval.  Offsets within tolerance of the support boundary are
    rejected and resampled so the returned hyperplane meets the interior.
    """
    eps = REL_TOL * cell_diameter(z)
    if isinstance(phi, Mondrian):
        if not isinstance(z, Box):
            raise GeometryError("Mondrian distribution requires box cells")
        w = [p * s for p, s in zip(phi.weights, z.sides)]
        total = sum(w)
        if total <= 0.0:
            raise GeometryError("degenerate cell: zero width in every direction")
        r = rng.random() * total
        axis = 0
        acc = w[0]
        while acc < r and axis < len(w) - 1:
            axis += 1
            acc += w[axis]
        lo, hi = z.lower[axis], z.upper[axis]
        for _ in range(_MAX_RESAMPLE):
            x = lo + (hi - lo) * rng.random()
            if lo + eps < x < hi - eps:
                return AxisPlane(axis, x)
        raise GeometryError("could not place a hyperplane inside the cell")
    if z.dim != 2:
        raise GeometryError("planar atomic distribution requires 2-d cells")
    w = [p * width(z, u) for u, p in zip(phi.directions, phi.weights)]
    total = sum(w)
    if total <= 0.0:
        raise GeometryError("degenerate cell: zero width in every direction")
    r = rng.random() * total
    j = 0
    acc = w[0]
    while acc < r and j < len(w) - 1:
        j += 1
        acc += w[j]
    u = phi.directions[j]
    lo, hi = support_interval(z, u)
    for _ in range(_MAX_RESAMPLE):
        x = lo + (hi - lo) * rng.random()
        if lo + eps < x < hi - eps:
            return Line2(u, x)
    raise GeometryError("could not place a hyperplane inside the cell")


def _split_box_axis(z: Box, h: AxisPlane) -> tuple[Box, Box]:
    k, x = h.axis, h.offset
    if not 0 <= k < z.dim:
        raise GeometryError(f"axis {k} out of range for dimension {z.dim}")
    lo, hi = z.lower[k], z.upper[k]
    eps = REL_TOL * z.diameter()
    if not (lo + eps < x < hi - eps):
        raise SplitRejected(f"plane offset {x} misses the interior of [{lo}, {hi}]")
    upper_lo = z.upper[:k] + (x,) + z.upper[k + 1 :]
    lower_hi = z.lower[:k] + (x,) + z.lower[k + 1 :]
    return Box(z.lower, upper_lo), Box(lower_hi, z.upper)


def _split_polygon(z: ConvexPolygon2, normal, offset: float) -> tuple[ConvexPolygon2, ConvexPolygon2]:
    ux, uy = normal
    eps = REL_TOL * z.diameter()
    vs = z.vertices
    s = [vx * ux + vy * uy - offset for vx, vy in vs]
    if max(s) <= eps or min(s) >= -eps:
        raise SplitRejected("line misses the polygon interior")
    neg: list[tuple[float, float]] = []
    pos: list[tuple[float, float]] = []
    n = len(vs)
    for i in range(n):
        si = s[i]
        side_i = 0 if abs(si) <= eps else (1 if si > 0 else -1)
        if side_i <= 0:
            neg.append(vs[i])
        if side_i >= 0:
            pos.append(vs[i])
        j = (i + 1) % n
        sj = s[j]
        side_j = 0 if abs(sj) <= eps else (1 if sj > 0 else -1)
        if side_i * side_j < 0:
            t = si / (si - sj)
            w = (
                vs[i][0] + t * (vs[j][0] - vs[i][0]),
                vs[i][1] + t * (vs[j][1] - vs[i][1]),
            )
            neg.append(w)
            pos.append(w)
    if len(neg) < 3 or len(pos) < 3:
        raise SplitRejected("split produced a degenerate piece")
    try:
        return ConvexPolygon2(tuple(neg)), ConvexPolygon2(tuple(pos))
    except GeometryError as exc:
        raise SplitRejected(f"split produced an invalid piece: {exc}") from exc


def split_cell(z, h) -> tuple[Cell, Cell]:
    """Split a cell by a hyperplane through its interior.

    Returns the two pieces with disjoint interiors whose union is z; the
    first piece is the one on the lower / negative side of the hyperplane.
    Raises SplitRejected when the hyperplane misses the interior within
    tolerance, so the caller can resample.
    """
    if isinstance(h, AxisPlane):
        if isinstance(z, Box):
            return _split_box_axis(z, h)
        normal = (1.0, 0.0) if h.axis == 0 else (0.0, 1.0)
        return _split_polygon(z, normal, h.offset)
    if isinstance(z, Box):
        z = z.to_polygon()
    return _split_polygon(z, h.normal, h.offset)
