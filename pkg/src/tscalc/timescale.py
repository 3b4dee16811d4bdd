"""Exact representation of regular time scales.

A :class:`TimeScale` is an ordered list of segments. Grid points are stored by
integer index, so the jump operators and graininess never depend on floating
subtraction of neighbouring points. The accumulation point of a geometric grid
has index ``-inf``.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from functools import total_ordering
from typing import NamedTuple, Union

from .errors import (
    DenseSpanError,
    NotRegularError,
    PointNotInTimeScale,
    TimeScaleError,
    TruncationError,
    max_factors,
)

Local = Union[int, float]

_LOCATE_RTOL = 1e-9
_JUNCTION_TOL = 1e-12
# geometric tails are cut once the distance to the accumulation point has
# shrunk by this factor
TAIL_SHRINK = 2.0**-60


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


class Segment:
    """Common interface of the three segment kinds.

    ``first``/``last`` are the local coordinates of the segment minimum and
    maximum, or ``None`` when the segment is unbounded on that side.
    """

    dense = False
    first: Local | None
    last: Local | None

    @property
    def lo(self) -> float:
        return -math.inf if self.first is None else self.value(self.first)

    @property
    def hi(self) -> float:
        return math.inf if self.last is None else self.value(self.last)

    def value(self, local: Local) -> float:
        raise NotImplementedError

    def locate(self, x: float) -> Local | None:
        raise NotImplementedError

    def succ(self, local: Local) -> Local | None:
        raise NotImplementedError

    def pred(self, local: Local) -> Local | None:
        raise NotImplementedError

    def fwd_gap(self, local: Local) -> float:
        raise NotImplementedError

    def bwd_gap(self, local: Local) -> float:
        raise NotImplementedError

    def ceil(self, x: float) -> Local | None:
        raise NotImplementedError

    def floor(self, x: float) -> Local | None:
        raise NotImplementedError

    def terms(self, a: Local, b: Local, side: str) -> Iterator[tuple[Local, float]]:
        """Scattered points of the span [a, b] with their graininess weight.

        ``side="delta"`` yields right-scattered points of [a, b) weighted by
        the forward gap, ``side="nabla"`` left-scattered points of (a, b]
        weighted by the backward gap.
        """
        raise NotImplementedError

    def clause(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class RealInterval(Segment):
    lo_: float
    hi_: float
    dense = True

    def __post_init__(self):
        if not self.lo_ < self.hi_:
            raise TimeScaleError(f"interval needs lo < hi, got [{self.lo_}, {self.hi_}]")

    @property
    def first(self):
        return None if math.isinf(self.lo_) else float(self.lo_)

    @property
    def last(self):
        return None if math.isinf(self.hi_) else float(self.hi_)

    def value(self, local):
        return float(local)

    def locate(self, x):
        return float(x) if self.lo_ <= x <= self.hi_ else None

    def succ(self, local):
        return None if local == self.last else local

    def pred(self, local):
        return None if local == self.first else local

    def fwd_gap(self, local):
        return 0.0

    def bwd_gap(self, local):
        return 0.0

    def ceil(self, x):
        if x > self.hi_:
            return None
        return max(float(x), self.lo_)

    def floor(self, x):
        if x < self.lo_:
            return None
        return min(float(x), self.hi_)

    def terms(self, a, b, side):
        return iter(())

    def clause(self):
        return f"interval({_fmt(self.lo_)},{_fmt(self.hi_)})"


@dataclass(frozen=True)
class UniformGrid(Segment):
    """Points ``origin + step*k`` for ``lo_index <= k <= hi_index``."""

    step: float
    lo_index: Local = -math.inf
    hi_index: Local = math.inf
    origin: float = 0.0

    def __post_init__(self):
        if not self.step > 0:
            raise TimeScaleError(f"grid step must be positive, got {self.step}")
        for k in (self.lo_index, self.hi_index):
            if not (isinstance(k, int) or math.isinf(k)):
                raise TimeScaleError(f"grid index bounds must be integers or infinite, got {k!r}")
        if not self.lo_index < self.hi_index:
            raise TimeScaleError("grid needs lo_index < hi_index")

    @property
    def first(self):
        return None if math.isinf(self.lo_index) else self.lo_index

    @property
    def last(self):
        return None if math.isinf(self.hi_index) else self.hi_index

    def value(self, local):
        return self.origin + self.step * local

    def _inside(self, k):
        return self.lo_index <= k <= self.hi_index

    def locate(self, x):
        r = (x - self.origin) / self.step
        if not math.isfinite(r):
            return None
        k = round(r)
        if abs(r - k) > _LOCATE_RTOL or not self._inside(k):
            return None
        return k

    def succ(self, local):
        return None if local == self.last else local + 1

    def pred(self, local):
        return None if local == self.first else local - 1

    def fwd_gap(self, local):
        return self.step

    def bwd_gap(self, local):
        return self.step

    def ceil(self, x):
        k = math.ceil((x - self.origin) / self.step - _LOCATE_RTOL)
        k = max(k, self.lo_index)
        return k if k <= self.hi_index else None

    def floor(self, x):
        k = math.floor((x - self.origin) / self.step + _LOCATE_RTOL)
        k = min(k, self.hi_index)
        return k if k >= self.lo_index else None

    def terms(self, a, b, side):
        lo, hi = (a, b - 1) if side == "delta" else (a + 1, b)
        if hi - lo + 1 > max_factors():
            raise TruncationError(f"span of {hi - lo + 1} grid points exceeds the factor cap")
        for k in range(lo, hi + 1):
            yield k, self.step

    def clause(self):
        lo = -math.inf if self.first is None else self.value(self.first)
        hi = math.inf if self.last is None else self.value(self.last)
        return f"grid({_fmt(self.step)},{_fmt(lo)},{_fmt(hi)})"


@dataclass(frozen=True)
class GeometricGrid(Segment):
    """Closure of ``center + sign*q**k`` for ``k <= k_max``.

    ``sign=+1`` gives the grid to the right of its accumulation point
    (which is then the segment minimum); ``sign=-1`` the mirrored grid whose
    maximum is the accumulation point.
    """

    q: float
    sign: int = 1
    k_max: Local = math.inf
    center: float = 0.0

    def __post_init__(self):
        if not self.q > 1:
            raise TimeScaleError(f"geometric ratio must exceed 1, got {self.q}")
        if self.sign not in (1, -1):
            raise TimeScaleError("sign must be +1 or -1")
        if not (isinstance(self.k_max, int) or self.k_max == math.inf):
            raise TimeScaleError("k_max must be an integer or +inf")

    @property
    def _top(self):
        return None if math.isinf(self.k_max) else self.k_max

    @property
    def first(self):
        return -math.inf if self.sign > 0 else self._top

    @property
    def last(self):
        return self._top if self.sign > 0 else -math.inf

    def value(self, local):
        return self.center + self.sign * self.q**local

    def locate(self, x):
        d = self.sign * (x - self.center)
        if d == 0:
            return -math.inf
        if d < 0:
            return None
        r = math.log(d) / math.log(self.q)
        k = round(r)
        if k > self.k_max or abs(self.q**k - d) > _LOCATE_RTOL * d:
            return None
        return k

    # Forward (increasing value) means k+1 for sign=+1 and k-1 for sign=-1.
    def succ(self, local):
        if local == self.last:
            return None
        if local == -math.inf:
            return local
        return local + self.sign

    def pred(self, local):
        if local == self.first:
            return None
        if local == -math.inf:
            return local
        return local - self.sign

    def fwd_gap(self, local):
        if local == -math.inf:
            return 0.0
        k = local if self.sign > 0 else local - 1
        return (self.q - 1.0) * self.q**k

    def bwd_gap(self, local):
        if local == -math.inf:
            return 0.0
        k = local - 1 if self.sign > 0 else local
        return (self.q - 1.0) * self.q**k

    def _exponent_ceil(self, d):
        return math.ceil(math.log(d) / math.log(self.q) - _LOCATE_RTOL)

    def _exponent_floor(self, d):
        return math.floor(math.log(d) / math.log(self.q) + _LOCATE_RTOL)

    def ceil(self, x):
        d = self.sign * (x - self.center)
        if self.sign > 0:
            if d <= 0:
                return -math.inf
            k = self._exponent_ceil(d)
            return k if k <= self.k_max else None
        # points center - q**k >= x  <=>  q**k <= d
        if d < 0:
            return None
        if d == 0:
            return -math.inf
        return min(self._exponent_floor(d), self.k_max)

    def floor(self, x):
        d = self.sign * (x - self.center)
        if self.sign > 0:
            if d < 0:
                return None
            if d == 0:
                return -math.inf
            return min(self._exponent_floor(d), self.k_max)
        if d <= 0:
            return -math.inf
        k = self._exponent_ceil(d)
        return k if k <= self.k_max else None

    def _tail_length(self):
        n = math.ceil(-math.log(TAIL_SHRINK) / math.log(self.q))
        if n > max_factors():
            raise TruncationError(
                f"geometric tail with q={self.q} needs {n} factors, above the cap {max_factors()}"
            )
        return n

    def terms(self, a, b, side):
        if self.sign > 0:
            # forward points are a, a+1, ..., b
            if side == "delta":
                top, bottom = b - 1, a
            else:
                top, bottom = b, a + 1
        else:
            # forward points are a, a-1, ..., b
            if side == "delta":
                top, bottom = a, b + 1
            else:
                top, bottom = a - 1, b
        if bottom == -math.inf:
            bottom = top - self._tail_length()
        elif top - bottom + 1 > max_factors():
            raise TruncationError("geometric span exceeds the factor cap")
        gap = self.fwd_gap if side == "delta" else self.bwd_gap
        k = top
        while k >= bottom:
            yield k, gap(k)
            k -= 1

    def clause(self):
        side = "+" if self.sign > 0 else "-"
        extra = ""
        if not math.isinf(self.k_max):
            extra += f",kmax={self.k_max}"
        if self.center != 0:
            extra += f",center={_fmt(self.center)}"
        return f"qgrid({_fmt(self.q)},{side}{extra})"


@total_ordering
@dataclass(frozen=True)
class Point:
    """A point of a time scale: owning segment plus local coordinate.

    Equality is exact on ``(segment, local)``; ordering uses the real value.
    """

    segment: int
    local: Local
    value: float = field(compare=False)

    def __lt__(self, other):
        if not isinstance(other, Point):
            return NotImplemented
        return self.value < other.value

    def __float__(self):
        return float(self.value)


class PointClass(NamedTuple):
    left: str
    right: str
    is_min: bool
    is_max: bool

    @property
    def two_sided_dense(self) -> bool:
        return self.left == "dense" and self.right == "dense"

    @property
    def two_sided_scattered(self) -> bool:
        return self.left == "scattered" and self.right == "scattered"


class RegularityReport(NamedTuple):
    regular: bool
    point: float | None = None
    reason: str | None = None

    def __bool__(self):
        return self.regular


class Partition(NamedTuple):
    atoms: list
    switching_points: list
    segment_ranges: list


PointLike = Union[Point, float, int]


class TimeScale:
    """Ordered finite union of segments.

    Consecutive segments either share exactly one point (a junction, owned by
    the lower segment) or are separated by a gap.
    """

    def __init__(self, segments: Sequence[Segment]):
        segments = tuple(segments)
        if not segments:
            raise TimeScaleError("a time scale needs at least one segment")
        junction = []
        for i, (left, right) in enumerate(zip(segments, segments[1:])):
            a, b = left.hi, right.lo
            if math.isinf(a) or math.isinf(b):
                raise TimeScaleError(f"segment {i} is unbounded but is followed by another segment")
            tol = _JUNCTION_TOL * max(1.0, abs(a), abs(b))
            if abs(a - b) <= tol:
                if left.dense and right.dense:
                    raise TimeScaleError(
                        f"junction at {a}: both sides dense, so neither side is scattered near the junction"
                    )
                junction.append(True)
            elif a < b:
                junction.append(False)
            else:
                raise TimeScaleError(f"segments {i} and {i + 1} overlap ({a} > {b})")
        self.segments = segments
        self._junction = tuple(junction)

    # ------------------------------------------------------------------ basics
    def __repr__(self):
        return f"TimeScale({self.describe()!r})"

    def __eq__(self, other):
        return isinstance(other, TimeScale) and self.segments == other.segments

    def __hash__(self):
        return hash(self.segments)

    def describe(self) -> str:
        return "; ".join(seg.clause() for seg in self.segments)

    @classmethod
    def reals(cls, lo: float = -math.inf, hi: float = math.inf) -> TimeScale:
        return cls([RealInterval(lo, hi)])

    @classmethod
    def integers(cls) -> TimeScale:
        return cls([UniformGrid(1.0)])

    @classmethod
    def uniform(cls, c: float, lo: float = -math.inf, hi: float = math.inf) -> TimeScale:
        """``cZ`` restricted to ``[lo, hi]`` (endpoints must be grid points)."""
        if math.isinf(lo) and math.isinf(hi):
            return cls([UniformGrid(c)])
        origin = hi if math.isinf(lo) else lo
        lo_k = -math.inf if math.isinf(lo) else 0
        hi_k = math.inf if math.isinf(hi) else round((hi - origin) / c)
        return cls([UniformGrid(c, lo_k, hi_k, origin)])

    @classmethod
    def geometric(cls, q: float, sign: int = 1) -> TimeScale:
        return cls([GeometricGrid(q, sign)])

    @classmethod
    def q_symmetric(cls, q: float) -> TimeScale:
        """``Q_q = {-q^k, 0, q^k}``."""
        return cls([GeometricGrid(q, -1), GeometricGrid(q, 1)])

    @property
    def min(self) -> float:
        return self.segments[0].lo

    @property
    def max(self) -> float:
        return self.segments[-1].hi

    def is_junction(self, i: int) -> bool:
        """Whether segments ``i`` and ``i + 1`` share a point."""
        return self._junction[i]

    # ------------------------------------------------------------------ points
    def point_at(self, i: int, local: Local) -> Point:
        """Canonical point for local coordinate ``local`` of segment ``i``."""
        seg = self.segments[i]
        if i > 0 and self._junction[i - 1] and local == seg.first:
            i -= 1
            seg = self.segments[i]
            local = seg.last
        return Point(i, local, seg.value(local))

    def point(self, x: PointLike) -> Point:
        """Locate ``x`` in the time scale (lowest owning segment)."""
        if isinstance(x, Point):
            return x
        x = float(x)
        for i, seg in enumerate(self.segments):
            local = seg.locate(x)
            if local is not None:
                return Point(i, local, seg.value(local))
        raise PointNotInTimeScale(f"{x!r} is not a point of {self.describe()}")

    def contains(self, x: PointLike) -> bool:
        try:
            self.point(x)
        except PointNotInTimeScale:
            return False
        return True

    def ceil_point(self, x: float) -> Point | None:
        """Smallest point ``>= x``."""
        for i, seg in enumerate(self.segments):
            if seg.hi < x:
                continue
            local = seg.ceil(x)
            if local is not None:
                return self.point_at(i, local)
        return None

    def floor_point(self, x: float) -> Point | None:
        """Largest point ``<= x``."""
        for i in range(len(self.segments) - 1, -1, -1):
            seg = self.segments[i]
            if seg.lo > x:
                continue
            local = seg.floor(x)
            if local is not None:
                return self.point_at(i, local)
        return None

    # ------------------------------------------------------------------ jumps
    def sigma(self, t: PointLike) -> Point:
        t = self.point(t)
        i = t.segment
        seg = self.segments[i]
        nxt = seg.succ(t.local)
        if nxt is not None:
            return self.point_at(i, nxt)
        if i + 1 == len(self.segments):
            return t
        right = self.segments[i + 1]
        if not self._junction[i]:
            return Point(i + 1, right.first, right.value(right.first))
        after = right.succ(right.first)
        if after is None or after == right.first:
            return t
        return Point(i + 1, after, right.value(after))

    def rho(self, t: PointLike) -> Point:
        t = self.point(t)
        i = t.segment
        seg = self.segments[i]
        prev = seg.pred(t.local)
        if prev is not None:
            return self.point_at(i, prev)
        if i == 0:
            return t
        left = self.segments[i - 1]
        # a segment minimum is only canonical when a gap precedes it
        return Point(i - 1, left.last, left.value(left.last))

    def mu(self, t: PointLike) -> float:
        t = self.point(t)
        i = t.segment
        seg = self.segments[i]
        if t.local != seg.last:
            return seg.fwd_gap(t.local)
        if i + 1 == len(self.segments):
            return 0.0
        right = self.segments[i + 1]
        if self._junction[i]:
            return right.fwd_gap(right.first)
        return right.lo - seg.hi

    def nu(self, t: PointLike) -> float:
        t = self.point(t)
        i = t.segment
        seg = self.segments[i]
        if t.local != seg.first:
            return seg.bwd_gap(t.local)
        if i == 0:
            return 0.0
        left = self.segments[i - 1]
        return seg.lo - left.hi

    def classify(self, t: PointLike) -> PointClass:
        t = self.point(t)
        left = "dense" if self.rho(t) == t else "scattered"
        right = "dense" if self.sigma(t) == t else "scattered"
        return PointClass(left, right, t.value == self.min, t.value == self.max)

    # --------------------------------------------------------------- structure
    def _boundary_points(self) -> list[Point]:
        pts = []
        for i, seg in enumerate(self.segments):
            for local in (seg.first, seg.last):
                if local is not None:
                    pts.append(self.point_at(i, local))
            if isinstance(seg, GeometricGrid):
                acc = -math.inf
                pts.append(self.point_at(i, acc))
        out, seen = [], set()
        for p in sorted(pts):
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out

    def is_regular(self) -> RegularityReport:
        """Regularity test via the two-sided dense/scattered characterisation.

        Interior points of every segment are homogeneous, so only segment
        endpoints and accumulation points need checking.
        """
        for p in self._boundary_points():
            cls = self.classify(p)
            if cls.is_min and not cls.is_max:
                if cls.right != "dense":
                    return RegularityReport(False, p.value, "minimum of T is right-scattered")
                continue
            if cls.is_max and not cls.is_min:
                if cls.left != "dense":
                    return RegularityReport(False, p.value, "maximum of T is left-scattered")
                continue
            if cls.left != cls.right:
                return RegularityReport(
                    False, p.value, f"point is left-{cls.left} but right-{cls.right}"
                )
        return RegularityReport(True)

    def atomic_partition(self) -> Partition:
        """Unique ordered partition into atomic time scales.

        Adjacent segments stay in the same atom when the point joining them is
        two-sided scattered; every other junction is a switching point.
        """
        report = self.is_regular()
        if not report:
            raise NotRegularError(f"time scale is not regular at {report.point}: {report.reason}")
        groups = [[0]]
        switching = []
        for i in range(len(self.segments) - 1):
            shared = self.point_at(i, self.segments[i].last)
            if not self._junction[i] or self.classify(shared).two_sided_scattered:
                groups[-1].append(i + 1)
            else:
                switching.append(shared)
                groups.append([i + 1])
        atoms = [TimeScale([self.segments[j] for j in g]) for g in groups]
        ranges = [(g[0], g[-1]) for g in groups]
        return Partition(atoms, switching, ranges)

    # ---------------------------------------------------------------- walking
    def iterate_scattered(self, start: PointLike, stop: PointLike) -> list[Point]:
        """σ-chain ``start, σ(start), ..., ρ(stop)``."""
        start, stop = self.point(start), self.point(stop)
        if stop < start:
            raise ValueError("iterate_scattered needs start <= stop")
        chain = []
        cap = max_factors()
        cur = start
        while cur != stop:
            nxt = self.sigma(cur)
            if nxt == cur:
                raise DenseSpanError(f"span [{start.value}, {stop.value}] is dense at {cur.value}")
            chain.append(cur)
            if len(chain) > cap:
                raise TruncationError("σ-chain exceeds the factor cap")
            cur = nxt
        return chain

    def points_between(self, lo: float, hi: float) -> list[Point]:
        """All points of T in ``[lo, hi]``; the span must be finite and scattered."""
        first = self.ceil_point(lo)
        if first is None or first.value > hi:
            return []
        last = self.floor_point(hi)
        return self.iterate_scattered(first, last) + [last]

    def walk(self, a: PointLike, b: PointLike, side: str = "delta"):
        """Decompose ``[a, b]`` into dense spans and weighted scattered points.

        Yields ``("dense", lo, hi)`` and ``("point", Point, weight)`` items.
        For ``side="delta"`` the points are the right-scattered points of
        ``[a, b)`` weighted by μ; for ``"nabla"`` the left-scattered points of
        ``(a, b]`` weighted by ν. Tails accumulating at a point are truncated
        once the remaining distance has shrunk by ``TAIL_SHRINK``.
        """
        if side not in ("delta", "nabla"):
            raise ValueError(f"side must be 'delta' or 'nabla', got {side!r}")
        a, b = self.point(a), self.point(b)
        if b < a:
            raise ValueError("walk needs a <= b")
        if a == b:
            return
        n = len(self.segments)
        for i, seg in enumerate(self.segments):
            if seg.lo < b.value and seg.hi > a.value:
                la = a.local if a.segment == i else seg.first
                if b.segment == i:
                    lb = b.local
                else:
                    lb = seg.last
                if seg.dense:
                    lo, hi = seg.value(la), seg.value(lb)
                    if lo < hi:
                        yield ("dense", lo, hi)
                else:
                    for local, weight in seg.terms(la, lb, side):
                        yield ("point", self.point_at(i, local), weight)
            if i + 1 < n and not self._junction[i]:
                gap_lo, gap_hi = seg.hi, self.segments[i + 1].lo
                if a.value <= gap_lo and gap_hi <= b.value:
                    if side == "delta":
                        yield ("point", self.point_at(i, seg.last), gap_hi - gap_lo)
                    else:
                        right = self.segments[i + 1]
                        yield ("point", Point(i + 1, right.first, gap_hi), gap_hi - gap_lo)

    def dense_neighbour(self, t: PointLike, side: str, h: float) -> float | None:
        """A point of T at distance about ``h`` on a dense side of ``t``.

        Returns ``None`` when that side of ``t`` is scattered or absent.
        """
        t = self.point(t)
        cls = self.classify(t)
        i = t.segment
        if side == "right":
            if cls.right != "dense" or cls.is_max:
                return None
            if t.local == self.segments[i].last:
                i += 1
            seg = self.segments[i]
            if seg.dense:
                return min(t.value + h, seg.hi)
            local = seg.floor(t.value + h)
            if local is None or seg.value(local) <= t.value:
                local = seg.ceil(t.value + h)
            return seg.value(local)
        if cls.left != "dense" or cls.is_min:
            return None
        seg = self.segments[i]
        if t.local == seg.first and i > 0:
            seg = self.segments[i - 1]
        if seg.dense:
            return max(t.value - h, seg.lo)
        local = seg.ceil(t.value - h)
        if local is None or seg.value(local) >= t.value:
            local = seg.floor(t.value - h)
        return seg.value(local)
