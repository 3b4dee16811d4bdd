"""Linear diamond-alpha equations and the diamond-alpha exponential.

On scattered stretches ``y^◇α = p y + f`` is the second-order recurrence

    y(σt) = a(t) y(t) + b(t) y(ρt) + μ(t) f(t) / α,

    b = (1-α) μ / (α ν),    a = 1 + μ p / α - b,

i.e. the state row ``Y(t) = [y(t), y(ρt)]`` advances by right multiplication
with ``A(t) = [[a, 1], [b, 0]]``. Dense stretches scale ``Y`` by
``exp(∫p)``. Leaving an accumulation point needs an infinite product, which
is truncated once it has settled.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

from .calculus import FunctionLike, TSFunction, as_function, check_alpha, diamond_derivative
from .errors import (
    BackwardEvaluationError,
    BVPError,
    DenseSpanError,
    DivergenceError,
    max_factors,
)
from .exponentials import delta_exp, nabla_exp
from .quadrature import DEFAULT_TOL, adaptive_simpson
from .timescale import GeometricGrid, Point, PointLike, TimeScale

DEFAULT_PRODUCT_TOL = 1e-14
SETTLE_STEPS = 3
GROWTH_STEPS = 64

Matrix2 = tuple[tuple[float, float], tuple[float, float]]
_IDENTITY: Matrix2 = ((1.0, 0.0), (0.0, 1.0))


def _matmul(m: Matrix2, n: Matrix2) -> Matrix2:
    return (
        (m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]),
        (m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]),
    )


def _maxabs(m: Matrix2) -> float:
    return max(abs(m[0][0]), abs(m[0][1]), abs(m[1][0]), abs(m[1][1]))


def _maxdiff(m: Matrix2, n: Matrix2) -> float:
    return max(abs(m[i][j] - n[i][j]) for i in (0, 1) for j in (0, 1))


@dataclass(frozen=True)
class TransitionMatrix:
    """``[[a, 1], [b, 0]]``."""

    a: float
    b: float

    @property
    def rows(self) -> Matrix2:
        return ((self.a, 1.0), (self.b, 0.0))


@dataclass(frozen=True)
class StateRow:
    """Row vector ``[y(t), y(ρ(t))]``."""

    y: float
    y_prev: float

    def step(self, m: TransitionMatrix, forcing: float = 0.0) -> StateRow:
        return StateRow(self.y * m.a + self.y_prev * m.b + forcing, self.y)

    def times(self, m: Matrix2) -> StateRow:
        return StateRow(
            self.y * m[0][0] + self.y_prev * m[1][0],
            self.y * m[0][1] + self.y_prev * m[1][1],
        )


class AccumulationResult(NamedTuple):
    row: StateRow | None
    converged: bool
    depth: int
    limit_b: float


@dataclass
class SolutionTrace:
    """Values of a solution at the requested points, in ascending order."""

    points: list[Point]
    values: list[float]
    depths: list[int] = field(default_factory=list)
    converged: bool = True

    def __iter__(self):
        return iter(zip(self.points, self.values))

    def __len__(self):
        return len(self.points)

    def value_at(self, t: PointLike) -> float:
        x = t.value if isinstance(t, Point) else float(t)
        for p, v in self:
            if p.value == x:
                return v
        raise KeyError(x)

    def as_function(self) -> TSFunction:
        """Lookup function over the traced points (raises ``KeyError`` elsewhere)."""
        table = {p.value: v for p, v in self}
        return TSFunction(lambda x: table[x])


@dataclass(frozen=True)
class DiamondBVP:
    """``y^◇α = p y + f`` with ``y(t0) = y0`` and, for ``0 < α < 1``, ``y(ρ(t0)) = y_rho``.

    ``y_rho`` defaults to ``y0``, the boundary pair of the diamond-alpha
    exponential.
    """

    ts: TimeScale
    alpha: float
    p: FunctionLike
    t0: PointLike
    y0: float = 1.0
    f: FunctionLike | None = None
    y_rho: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        object.__setattr__(self, "p", as_function(self.p))
        if self.f is not None:
            object.__setattr__(self, "f", as_function(self.f))
        object.__setattr__(self, "t0", self.ts.point(self.t0))
        report = self.ts.is_regular()
        if not report:
            raise BVPError(f"time scale is not regular at {report.point}: {report.reason}")
        y_rho = self.y0 if self.y_rho is None else float(self.y_rho)
        if self.ts.rho(self.t0) == self.t0 and y_rho != self.y0:
            raise BVPError("t0 is left-dense, so y(rho(t0)) = y(t0) and y_rho must equal y0")
        object.__setattr__(self, "y_rho", y_rho)

    @property
    def two_point(self) -> bool:
        """Whether the second condition at ρ(t0) is active."""
        return 0.0 < self.alpha < 1.0 and self.ts.rho(self.t0) != self.t0


def apply_L(p: FunctionLike, ts: TimeScale, alpha: float, y: FunctionLike, t: PointLike) -> float:
    """Residual ``y^◇α(t) - p(t) y(t)``."""
    p, y = as_function(p), as_function(y)
    t = ts.point(t)
    return diamond_derivative(y, ts, t, alpha) - p(t) * y(t)


def _open_alpha(alpha):
    alpha = check_alpha(alpha)
    if alpha in (0.0, 1.0):
        raise BVPError("transition matrices need 0 < alpha < 1")
    return alpha


def transition_matrix(ts: TimeScale, p: FunctionLike, alpha: float, t: PointLike) -> TransitionMatrix:
    alpha = _open_alpha(alpha)
    p = as_function(p)
    t = ts.point(t)
    mu, nu = ts.mu(t), ts.nu(t)
    if mu == 0.0 or nu == 0.0:
        raise DenseSpanError(f"transition matrix needs a two-sided scattered point, {t.value} is not")
    b = (1.0 - alpha) * mu / (alpha * nu)
    a = 1.0 + mu * p(t) / alpha - b
    return TransitionMatrix(a, b)


def transition_product(ts: TimeScale, p: FunctionLike, alpha: float, t0: PointLike, t: PointLike) -> Matrix2:
    """``S(t0, t) = A(t0) A(σ(t0)) ... A(ρ(t))`` over a finite scattered span."""
    s = _IDENTITY
    for point in ts.iterate_scattered(t0, t):
        s = _matmul(s, transition_matrix(ts, p, alpha, point).rows)
    return s


def sandwich(s: Matrix2) -> float:
    """``[1 1] S [1 0]^T``: the exponential read off a transition product."""
    return s[0][0] + s[1][0]


def propagate_forward(
    ts: TimeScale,
    p: FunctionLike,
    alpha: float,
    row: StateRow,
    t0: PointLike,
    t: PointLike,
    f: FunctionLike | None = None,
) -> StateRow:
    """Advance ``[y(t0), y(ρ t0)]`` to ``[y(t), y(ρ t)]`` through a scattered span."""
    alpha = _open_alpha(alpha)
    p = as_function(p)
    f = None if f is None else as_function(f)
    for s in ts.iterate_scattered(t0, t):
        forcing = 0.0 if f is None else ts.mu(s) * f(s) / alpha
        row = row.step(transition_matrix(ts, p, alpha, s), forcing)
    return row


def _settle(factors, tol, cap, append_right):
    """Multiply factors until the partial product settles or visibly blows up."""
    prod = _IDENTITY
    norm_prev = 1.0
    settled = grown = 0
    depth = 0
    last_b = math.nan
    for depth, m in enumerate(factors, start=1):
        last_b = m.b
        new = _matmul(prod, m.rows) if append_right else _matmul(m.rows, prod)
        norm = _maxabs(new)
        if not math.isfinite(norm):
            return None, False, depth, last_b
        change = _maxdiff(new, prod) / norm if norm > 0 else math.inf
        settled = settled + 1 if change < tol else 0
        grown = grown + 1 if norm > norm_prev else 0
        prod, norm_prev = new, norm
        if settled >= SETTLE_STEPS:
            return prod, True, depth, last_b
        if grown >= GROWTH_STEPS:
            return None, False, depth, last_b
        if depth >= cap:
            break
    return None, False, depth, last_b


def propagate_from_accumulation(
    ts: TimeScale,
    p: FunctionLike,
    alpha: float,
    row: StateRow,
    t0: PointLike,
    t: PointLike,
    tol: float = DEFAULT_PRODUCT_TOL,
) -> AccumulationResult:
    """``Y(t) = Y(t0) (... A(ρ²t) A(ρt))`` for ``t0`` right-dense and ``(t0, t]`` scattered.

    Factors are prepended one at a time, from ``A(ρt)`` toward the
    accumulation point. The product counts as converged once the max-norm
    relative change stays below ``tol`` for three steps; as divergent once
    the norm has grown for 64 consecutive steps, on overflow, or at the
    factor cap.
    """
    alpha = _open_alpha(alpha)
    p = as_function(p)
    t0, t = ts.point(t0), ts.point(t)
    if ts.sigma(t0) != t0:
        raise BVPError(f"{t0.value} is right-scattered; use propagate_forward")
    if not t0 < t:
        raise BVPError("propagate_from_accumulation needs t0 < t")

    def factors():
        s = t
        while True:
            s_next = ts.rho(s)
            if s_next == s or s_next.value <= t0.value:
                raise DenseSpanError(f"({t0.value}, {t.value}] is not purely scattered")
            s = s_next
            yield transition_matrix(ts, p, alpha, s)

    prod, ok, depth, last_b = _settle(factors(), tol, max_factors(), append_right=False)
    return AccumulationResult(row.times(prod) if ok else None, ok, depth, last_b)


def propagate_into_accumulation(
    ts: TimeScale,
    p: FunctionLike,
    alpha: float,
    row: StateRow,
    t0: PointLike,
    tol: float = DEFAULT_PRODUCT_TOL,
) -> tuple[Point, AccumulationResult]:
    """Forward product ``A(t0) A(σt0) ...`` into the accumulation point above ``t0``.

    Used where a left-accumulating grid (e.g. ``-q^Z``) reaches its limit
    point. Same stopping rules as :func:`propagate_from_accumulation`.
    """
    alpha = _open_alpha(alpha)
    p = as_function(p)
    t0 = ts.point(t0)
    seg = ts.segments[t0.segment]
    if not (isinstance(seg, GeometricGrid) and seg.sign < 0):
        raise BVPError(f"no left-accumulation point above {t0.value}")
    acc = ts.point_at(t0.segment, seg.last)

    def factors():
        s = t0
        while True:
            yield transition_matrix(ts, p, alpha, s)
            s = ts.sigma(s)

    prod, ok, depth, last_b = _settle(factors(), tol, max_factors(), append_right=True)
    if not ok:
        return acc, AccumulationResult(None, False, depth, last_b)
    y = row.times(prod).y
    return acc, AccumulationResult(StateRow(y, y), True, depth, last_b)


def propagate_dense(
    ts: TimeScale, p: FunctionLike, row: StateRow, t0: PointLike, t: PointLike, tol: float = DEFAULT_TOL
) -> StateRow:
    """Scale the state row by ``exp(∫ p)`` across a real interval."""
    p = as_function(p)
    t0, t = ts.point(t0), ts.point(t)
    lo, hi = (t0, t) if t0 <= t else (t, t0)
    for piece in ts.walk(lo, hi, "delta"):
        if piece[0] != "dense":
            raise DenseSpanError(f"[{lo.value}, {hi.value}] is not a dense span")
    factor = math.exp(adaptive_simpson(p, t0.value, t.value, tol))
    return StateRow(row.y * factor, row.y_prev * factor)


def _divergence_message(ts, t, alpha, limit_b):
    seg = ts.segments[t.segment]
    msg = f"transition product diverges at accumulation point {t.value!r}: b -> {limit_b:.6g} >= 1"
    if isinstance(seg, GeometricGrid):
        q = seg.q
        if seg.sign > 0:
            msg += f"; q={q:g} requires alpha > q/(q+1), but alpha={alpha:g} <= q/(q+1) = {q / (q + 1):.6g}"
        else:
            msg += f"; q={q:g} requires alpha > 1/(q+1), but alpha={alpha:g} <= 1/(q+1) = {1 / (q + 1):.6g}"
    return msg


class _Marcher:
    """Forward construction of a two-point solution for ``0 < α < 1``."""

    def __init__(self, bvp: DiamondBVP, tol: float):
        self.bvp = bvp
        self.ts = bvp.ts
        self.tol = tol
        self.depths: list[int] = []

    def advance(self, cur: Point, row: StateRow, target: Point) -> tuple[Point, StateRow]:
        ts, bvp = self.ts, self.bvp
        i = cur.segment
        seg = ts.segments[i]
        if ts.sigma(cur) != cur:
            if isinstance(seg, GeometricGrid) and seg.sign < 0 and target.value >= seg.hi:
                self._no_forcing(cur)
                acc, res = propagate_into_accumulation(ts, bvp.p, bvp.alpha, row, cur, self.tol)
                self.depths.append(res.depth)
                if not res.converged:
                    raise DivergenceError(
                        _divergence_message(ts, acc, bvp.alpha, res.limit_b), depth=res.depth, limit_b=res.limit_b
                    )
                return acc, res.row
            forcing = 0.0 if bvp.f is None else ts.mu(cur) * bvp.f(cur) / bvp.alpha
            return ts.sigma(cur), row.step(transition_matrix(ts, bvp.p, bvp.alpha, cur), forcing)
        j = i + 1 if cur.local == seg.last else i
        right = ts.segments[j]
        self._no_forcing(cur)
        if right.dense:
            end = target if target.value <= right.hi else ts.point_at(j, right.last)
            return end, propagate_dense(ts, bvp.p, row, cur, end)
        end = target if target.value <= right.hi else ts.point_at(j, right.last)
        res = propagate_from_accumulation(ts, bvp.p, bvp.alpha, row, cur, end, self.tol)
        self.depths.append(res.depth)
        if not res.converged:
            raise DivergenceError(
                _divergence_message(ts, cur, bvp.alpha, res.limit_b), depth=res.depth, limit_b=res.limit_b
            )
        return end, res.row

    def _no_forcing(self, cur):
        if self.bvp.f is not None:
            raise BVPError(f"forcing terms are only supported on scattered stretches (dense or limit point at {cur.value})")


def _targets(bvp: DiamondBVP, targets: Iterable[PointLike]) -> list[Point]:
    pts = sorted({bvp.ts.point(t) for t in targets})
    rho_t0 = bvp.ts.rho(bvp.t0)
    for p in pts:
        if p < bvp.t0 and not (bvp.two_point and p == rho_t0):
            raise BackwardEvaluationError(f"target {p.value} lies before t0={bvp.t0.value}; only forward solutions are built")
    return pts


def _first_order(bvp: DiamondBVP, pts: Sequence[Point]) -> list[float]:
    ts, p, f = bvp.ts, bvp.p, bvp.f
    if f is None:
        exp = delta_exp if bvp.alpha == 1.0 else nabla_exp
        return [bvp.y0 * exp(p, ts, t, bvp.t0).value for t in pts]
    values = []
    cur, y = bvp.t0, bvp.y0
    for target in pts:
        try:
            chain = ts.iterate_scattered(cur, target)
        except DenseSpanError as exc:
            raise BVPError(f"forcing terms are only supported on scattered stretches: {exc}") from None
        for s in chain:
            if bvp.alpha == 1.0:
                mu = ts.mu(s)
                y = (1.0 + mu * p(s)) * y + mu * f(s)
            else:
                nxt = ts.sigma(s)
                nu = ts.nu(nxt)
                y = (y + nu * f(nxt)) / (1.0 - nu * p(nxt))
        cur = target
        values.append(y)
    return values


def solve(bvp: DiamondBVP, targets: Iterable[PointLike], tol: float = DEFAULT_PRODUCT_TOL) -> SolutionTrace:
    """Forward solution of a diamond-alpha boundary value problem at ``targets``.

    ``α`` in {0, 1} is a first-order Δ/∇ initial value problem. Otherwise the
    state row is carried across scattered steps, dense intervals and limit
    points in turn. Targets may not precede ``t0``, except ``ρ(t0)`` when the
    second boundary condition is active.
    """
    pts = _targets(bvp, targets)
    if bvp.alpha in (0.0, 1.0):
        return SolutionTrace(pts, _first_order(bvp, pts))
    marcher = _Marcher(bvp, tol)
    rho_t0 = bvp.ts.rho(bvp.t0)
    cur = bvp.t0
    row = StateRow(bvp.y0, bvp.y_rho)
    values = []
    for target in pts:
        if target == rho_t0 and target != bvp.t0:
            values.append(bvp.y_rho)
            continue
        while cur != target:
            cur, row = marcher.advance(cur, row, target)
        values.append(row.y)
    return SolutionTrace(pts, values, marcher.depths)


def diamond_exponential(
    alpha: float, p: FunctionLike, ts: TimeScale, t0: PointLike, targets: Iterable[PointLike]
) -> SolutionTrace:
    """``E_{α,p}(t, t0)``: the solution with ``y(t0) = y(ρ(t0)) = 1``."""
    return solve(DiamondBVP(ts, alpha, p, t0), targets)


def solve_nonhomogeneous(bvp: DiamondBVP, targets: Iterable[PointLike]) -> SolutionTrace:
    """Forced problem ``L y = f`` on purely scattered time scales."""
    if bvp.f is None:
        raise BVPError("solve_nonhomogeneous needs a forcing term f")
    if any(seg.dense for seg in bvp.ts.segments):
        raise BVPError("forcing terms are not supported on time scales with dense segments")
    return solve(bvp, targets)


def residuals(bvp: DiamondBVP, trace: SolutionTrace) -> list[tuple[Point, float]]:
    """``L y - f`` at traced two-sided scattered points whose neighbours are traced too."""
    ts = bvp.ts
    y = trace.as_function()
    traced = {p.value for p in trace.points}
    out = []
    for t in trace.points:
        s, r = ts.sigma(t), ts.rho(t)
        if s == t or r == t or s.value not in traced or r.value not in traced:
            continue
        res = apply_L(bvp.p, ts, bvp.alpha, y, t)
        if bvp.f is not None:
            res -= bvp.f(t)
        out.append((t, res))
    return out


@dataclass(frozen=True)
class SecondOrderDelta:
    """``y^ΔΔ + p̃ y^Δ + q̃ y = 0`` with ``y(s0) = y_s0``, ``y(σ s0) = y_sigma_s0``."""

    ts: TimeScale
    alpha: float
    p_tilde: TSFunction
    q_tilde: TSFunction
    s0: Point
    y_s0: float
    y_sigma_s0: float

    def regressivity_defect(self, s: PointLike) -> float:
        """``1 - μ p̃ + μ² q̃``, identically ``1 - 1/α``."""
        mu = self.ts.mu(s)
        return 1.0 - mu * self.p_tilde(s) + mu * mu * self.q_tilde(s)

    def solve(self, targets: Iterable[PointLike]) -> SolutionTrace:
        """Iterate the Δ-recurrence forward from ``s0``."""
        ts = self.ts
        pts = sorted({ts.point(t) for t in targets})
        if pts and pts[0] < self.s0:
            raise BackwardEvaluationError("targets must not precede s0")
        s, y_s = self.s0, self.y_s0
        ss, y_ss = ts.sigma(s), self.y_sigma_s0
        values = []
        cap = max_factors()
        for target in pts:
            steps = 0
            while s != target:
                mu_s = ts.mu(s)
                d1 = (y_ss - y_s) / mu_s
                d2 = -self.p_tilde(s) * d1 - self.q_tilde(s) * y_s
                d1_next = d1 + mu_s * d2
                sss = ts.sigma(ss)
                if sss == ss:
                    raise DenseSpanError(f"second-order recurrence reached dense point {ss.value}")
                y_sss = y_ss + ts.mu(ss) * d1_next
                s, y_s, ss, y_ss = ss, y_ss, sss, y_sss
                steps += 1
                if steps > cap:
                    raise DenseSpanError("recurrence exceeded the factor cap")
            values.append(y_s)
        return SolutionTrace(pts, values)


def to_second_order_delta(bvp: DiamondBVP) -> SecondOrderDelta:
    """Equivalent second-order Δ-problem at ``s = ρ(t)``.

    ``p̃ = (1 - p^σ μ) / (α μ)``, ``q̃ = -p^σ / (α μ)``, boundary pair
    ``y(σ(s0)) = y0``, ``y(s0) = y_rho`` with ``s0 = ρ(t0)``.
    """
    alpha = _open_alpha(bvp.alpha)
    ts, p = bvp.ts, bvp.p
    s0 = ts.rho(bvp.t0)
    if s0 == bvp.t0:
        raise DenseSpanError("t0 is left-dense: no second-order form")

    def _mu(x):
        mu = ts.mu(x)
        if mu == 0.0:
            raise DenseSpanError(f"{x} is right-dense: no second-order form")
        return mu

    def p_tilde(x):
        mu = _mu(x)
        return (1.0 - p(ts.sigma(ts.point(x))) * mu) / (alpha * mu)

    def q_tilde(x):
        mu = _mu(x)
        return -p(ts.sigma(ts.point(x))) / (alpha * mu)

    return SecondOrderDelta(ts, alpha, TSFunction(p_tilde), TSFunction(q_tilde), s0, bvp.y_rho, bvp.y0)
