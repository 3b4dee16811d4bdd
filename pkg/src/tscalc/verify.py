"""Identity checks for one (time scale, p, α, t0) setting.

Each check samples points near ``t0`` and compares two independent ways of
computing the same quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .calculus import FunctionLike, TSFunction, as_function, delta_derivative, diamond_derivative, nabla_derivative
from .errors import DivergenceError, TSCalcError
from .exponentials import (
    combined_e,
    delta_exp,
    delta_to_nabla_param,
    diamond_derivative_of_delta_exp,
    diamond_derivative_of_nabla_exp,
    exp_function,
    nabla_exp,
    nabla_to_delta_param,
    rho_shift_delta_exp,
    rho_shift_nabla_exp,
)
from .solver import DiamondBVP, diamond_exponential, residuals, solve, to_second_order_delta
from .timescale import Point, PointLike, TimeScale

DEFAULT_VERIFY_TOL = 1e-9
MIN_GAP = 1e-5
_PROBE = TSFunction(lambda x: x * x + math.sin(x), lambda x: 2.0 * x + math.cos(x))


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # "PASS", "FAIL" or "SKIP"
    cases: int
    max_error: float
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "FAIL"

    def line(self) -> str:
        text = f"{self.status} {self.name}: {self.cases} cases, max rel error {self.max_error:.3g}"
        return f"{text} ({self.detail})" if self.detail else text


def rel_error(a: float, b: float) -> float:
    """``|a - b| / max(1, |a|, |b|)``."""
    return abs(a - b) / max(1.0, abs(a), abs(b))


def sample_points(ts: TimeScale, t0: PointLike, radius: float = 4.0, n: int = 12) -> list[Point]:
    """Up to ``n`` points of ``ts`` within ``radius`` of ``t0``, spread over its segments.

    Scattered points whose gaps fall below ``MIN_GAP`` (relative) are left
    out: near an accumulation point their difference quotients lose all
    significant digits.
    """
    t0 = ts.point(t0)
    lo = ts.ceil_point(max(ts.min, t0.value - radius))
    hi = ts.floor_point(min(ts.max, t0.value + radius))
    pool = {lo, hi, t0}
    for piece in ts.walk(lo, hi, "delta"):
        if piece[0] == "dense":
            a, b = piece[1], piece[2]
            pool.update(ts.point(a + (b - a) * k / 6) for k in range(7))
        elif _well_separated(ts, piece[1]):
            pool.add(piece[1])
    pts = sorted(pool)
    if len(pts) <= n:
        return pts
    step = (len(pts) - 1) / (n - 1)
    return sorted({pts[round(k * step)] for k in range(n)})


def _well_separated(ts, t):
    # difference quotients over gaps near rounding level are pure cancellation
    floor = MIN_GAP * max(1.0, abs(t.value))
    return min(ts.mu(t), ts.nu(t)) >= floor or (ts.mu(t) == 0.0 and ts.nu(t) == 0.0)


def _interior(ts, pts):
    return [t for t in pts if t.value not in (ts.min, ts.max)]


class _Check:
    def __init__(self, name, tol):
        self.name, self.tol = name, tol
        self.cases, self.worst, self.note = 0, 0.0, ""

    def compare(self, a, b):
        self.cases += 1
        err = rel_error(a, b)
        if not math.isfinite(err):
            err = math.inf
        self.worst = max(self.worst, err)

    def result(self):
        if self.cases == 0:
            return CheckResult(self.name, "SKIP", 0, 0.0, self.note or "no applicable points")
        status = "PASS" if self.worst <= self.tol else "FAIL"
        return CheckResult(self.name, status, self.cases, self.worst, self.note)


def _guard(check, fn):
    try:
        fn()
    except DivergenceError as exc:
        # the solution does not exist here, so there is nothing to compare
        return CheckResult(check.name, "SKIP", 0, 0.0, f"no solution: {exc}")
    except (TSCalcError, ValueError, ArithmeticError) as exc:
        check.cases += 1
        check.worst = math.inf
        check.note = f"{type(exc).__name__}: {exc}"
    return check.result()


def check_duality(ts, pts, tol):
    c = _Check("duality f^nabla(t) = f^delta(rho t)", tol)

    def run():
        for t in _interior(ts, pts):
            r, s = ts.rho(t), ts.sigma(t)
            if ts.sigma(r) == t and r != t:
                c.compare(nabla_derivative(_PROBE, ts, t), delta_derivative(_PROBE, ts, r))
            if ts.rho(s) == t and s != t:
                c.compare(delta_derivative(_PROBE, ts, t), nabla_derivative(_PROBE, ts, s))

    return _guard(c, run)


def check_conversion(p, ts, t0, pts, tol):
    c = _Check("conversion e_p = e^_{p^rho/(1+p^rho nu)}, e^_p = e_{p^sigma/(1-p^sigma mu)}", tol)

    def run():
        q = delta_to_nabla_param(p, ts)
        r = nabla_to_delta_param(p, ts)
        for t in pts:
            c.compare(delta_exp(p, ts, t, t0).value, nabla_exp(q, ts, t, t0).value)
            c.compare(nabla_exp(p, ts, t, t0).value, delta_exp(r, ts, t, t0).value)

    return _guard(c, run)


def check_rho_shift(p, ts, t0, pts, tol):
    c = _Check("rho-shift identities for e_p and e^_p", tol)

    def run():
        for t in pts:
            r = ts.rho(t)
            c.compare(rho_shift_delta_exp(p, ts, t, t0), delta_exp(p, ts, r, t0).value)
            c.compare(rho_shift_nabla_exp(p, ts, t, t0), nabla_exp(p, ts, r, t0).value)

    return _guard(c, run)


def check_diamond_of_exp(p, ts, t0, alpha, pts, tol):
    c = _Check("diamond derivative of e_p and e^_p vs closed form", tol)

    def run():
        e, h = exp_function(p, ts, t0, "delta"), exp_function(p, ts, t0, "nabla")
        for t in _interior(ts, pts):
            c.compare(diamond_derivative(e, ts, t, alpha), diamond_derivative_of_delta_exp(p, ts, t, t0, alpha))
            c.compare(diamond_derivative(h, ts, t, alpha), diamond_derivative_of_nabla_exp(p, ts, t, t0, alpha))

    return _guard(c, run)


def check_semigroup(p, ts, t0, alpha, pts, tol):
    c = _Check("semigroup law for e_p, e^_p and combined e", tol)

    def run():
        for s in pts[::2]:
            for t in pts[1::2]:
                c.compare(delta_exp(p, ts, t, s).value * delta_exp(p, ts, s, t0).value, delta_exp(p, ts, t, t0).value)
                c.compare(nabla_exp(p, ts, t, s).value * nabla_exp(p, ts, s, t0).value, nabla_exp(p, ts, t, t0).value)
                try:
                    lhs = combined_e(alpha, p, ts, t, s) * combined_e(alpha, p, ts, s, t0)
                    rhs = combined_e(alpha, p, ts, t, t0)
                except ValueError:
                    continue
                c.compare(lhs, rhs)

    return _guard(c, run)


def check_reductions(p, ts, t0, pts, tol):
    c = _Check("E_{1,p} = e_p, E_{0,p} = e^_p, E_{alpha,0} = 1", tol)
    ahead = [t for t in pts if t >= ts.point(t0)]

    def run():
        one = diamond_exponential(1.0, p, ts, t0, ahead)
        zero = diamond_exponential(0.0, p, ts, t0, ahead)
        for t, v in one:
            c.compare(v, delta_exp(p, ts, t, t0).value)
        for t, v in zero:
            c.compare(v, nabla_exp(p, ts, t, t0).value)
        for alpha in (0.25, 0.5, 0.75):
            try:
                flat = diamond_exponential(alpha, 0.0, ts, t0, ahead)
            except TSCalcError:
                continue
            for _, v in flat:
                c.compare(v, 1.0)

    return _guard(c, run)


def check_residuals(p, ts, t0, alpha, pts, tol):
    c = _Check("residual of the diamond-alpha solution at scattered points", tol)
    if not 0.0 < alpha < 1.0:
        c.note = "alpha is 0 or 1"
        return c.result()
    t0 = ts.point(t0)
    ahead = [t for t in pts if t >= t0]
    near = []
    for t in ahead:
        near += [t, ts.sigma(t), ts.rho(t)]
    targets = sorted({t for t in near if t >= t0 or t == ts.rho(t0)})

    def run():
        bvp = DiamondBVP(ts, alpha, p, t0)
        trace = solve(bvp, targets)
        for t, r in residuals(bvp, trace):
            c.cases += 1
            c.worst = max(c.worst, abs(r) / max(1.0, abs(trace.value_at(t))))

    return _guard(c, run)


def check_second_order(p, ts, t0, alpha, pts, tol):
    c = _Check("second-order delta form agrees, 1 - mu p~ + mu^2 q~ = 1 - 1/alpha", tol)
    t0 = ts.point(t0)
    if not 0.0 < alpha < 1.0 or ts.rho(t0) == t0:
        c.note = "needs 0 < alpha < 1 and a left-scattered t0"
        return c.result()

    def run():
        bvp = DiamondBVP(ts, alpha, p, t0)
        so = to_second_order_delta(bvp)
        chain = [t0]
        while len(chain) < 10 and ts.sigma(chain[-1]) != chain[-1] and ts.sigma(ts.sigma(chain[-1])) != ts.sigma(chain[-1]):
            chain.append(ts.sigma(chain[-1]))
        a = solve(bvp, chain)
        b = so.solve(chain)
        for (_, u), (_, v) in zip(a, b):
            c.compare(u, v)
        for s in [so.s0] + chain[:-1]:
            c.compare(so.regressivity_defect(s), 1.0 - 1.0 / alpha)

    return _guard(c, run)


def run_invariants(
    ts: TimeScale, p: FunctionLike, alpha: float, t0: PointLike, tol: float = DEFAULT_VERIFY_TOL
) -> list[CheckResult]:
    """Run every identity check; results come in a fixed order."""
    p = as_function(p)
    t0 = ts.point(t0)
    pts = sample_points(ts, t0)
    return [
        check_duality(ts, pts, tol),
        check_conversion(p, ts, t0, pts, tol),
        check_rho_shift(p, ts, t0, pts, tol),
        check_diamond_of_exp(p, ts, t0, alpha, pts, tol),
        check_semigroup(p, ts, t0, alpha, pts, tol),
        check_reductions(p, ts, t0, pts, tol),
        check_residuals(p, ts, t0, alpha, pts, tol),
        check_second_order(p, ts, t0, alpha, pts, tol),
    ]
