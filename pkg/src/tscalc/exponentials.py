"""Regressivity, cylinder transforms and exponential functions on time scales.

Everything is kept real: the exponentials are signed products of the
factors ``1 + μp`` (resp. ``1/(1 - νp)``) times ``exp`` of the dense-part
integral, which agrees with the cylinder definition wherever the latter is
real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .calculus import FunctionLike, TSFunction, as_function, check_alpha
from .errors import RegressivityError
from .quadrature import DEFAULT_TOL, adaptive_simpson
from .timescale import PointLike, TimeScale


def cylinder(z: float, h: float) -> float:
    """``(1/h) log(1 + z h)``, or ``z`` when ``h == 0``."""
    if h < 0:
        raise ValueError("graininess must be non-negative")
    if h == 0:
        return float(z)
    if 1.0 + z * h <= 0:
        raise ValueError(f"1 + z*h = {1.0 + z * h} <= 0: outside the real branch")
    return math.log1p(z * h) / h


def nu_cylinder(z: float, h: float) -> float:
    """``-(1/h) log(1 - z h)``, or ``z`` when ``h == 0``."""
    if h < 0:
        raise ValueError("graininess must be non-negative")
    if h == 0:
        return float(z)
    if 1.0 - z * h <= 0:
        raise ValueError(f"1 - z*h = {1.0 - z * h} <= 0: outside the real branch")
    return -math.log1p(-z * h) / h


@dataclass(frozen=True)
class ExpValue:
    value: float
    sign_flips: int = 0

    def __float__(self):
        return self.value

    @property
    def reciprocal(self) -> ExpValue:
        return ExpValue(1.0 / self.value, self.sign_flips)


@dataclass
class RegressivityReport:
    regressive: bool
    nu_regressive: bool
    witnesses: list = field(default_factory=list)
    nu_witnesses: list = field(default_factory=list)


def _window(ts: TimeScale, window):
    lo, hi = (-50.0, 50.0) if window is None else window
    a = ts.ceil_point(max(lo, ts.min))
    b = ts.floor_point(min(hi, ts.max))
    if a is None or b is None or b < a:
        raise ValueError(f"window {window} contains no points of the time scale")
    return a, b


def check_regressivity(
    p: FunctionLike, ts: TimeScale, window: tuple[float, float] | None = None, samples: int = 33
) -> RegressivityReport:
    """Check ``1 + μp != 0`` and ``1 - νp != 0`` over a bounded window.

    Scattered points are checked exhaustively (geometric tails down to the
    truncation depth), dense spans at ``samples`` equispaced points, where
    only finiteness of ``p`` can fail. The default window is ``[-50, 50]``
    clipped to the time scale.
    """
    p = as_function(p)
    a, b = _window(ts, window)
    report = RegressivityReport(True, True)
    for side in ("delta", "nabla"):
        bad = report.witnesses if side == "delta" else report.nu_witnesses
        for piece in ts.walk(a, b, side):
            if piece[0] == "dense":
                lo, hi = piece[1], piece[2]
                for j in range(samples):
                    x = lo + (hi - lo) * j / (samples - 1)
                    if not math.isfinite(p(x)):
                        bad.append(ts.point(x))
                continue
            s, w = piece[1], piece[2]
            factor = 1.0 + w * p(s) if side == "delta" else 1.0 - w * p(s)
            if factor == 0.0 or not math.isfinite(factor):
                bad.append(s)
    report.regressive = not report.witnesses
    report.nu_regressive = not report.nu_witnesses
    return report


def _dense_factor(p: TSFunction, lo: float, hi: float, tol: float) -> float:
    return math.exp(adaptive_simpson(p, lo, hi, tol))


def _forward_delta(p, ts, a, b, tol):
    value, flips = 1.0, 0
    for piece in ts.walk(a, b, "delta"):
        if piece[0] == "dense":
            value *= _dense_factor(p, piece[1], piece[2], tol)
            continue
        s, mu = piece[1], piece[2]
        factor = 1.0 + mu * p(s)
        if factor == 0.0:
            raise RegressivityError(f"p is not regressive at {s.value}: 1 + mu*p = 0", s)
        if factor < 0:
            flips += 1
        value *= factor
    return ExpValue(value, flips)


def _forward_nabla(p, ts, a, b, tol):
    value, flips = 1.0, 0
    for piece in ts.walk(a, b, "nabla"):
        if piece[0] == "dense":
            value *= _dense_factor(p, piece[1], piece[2], tol)
            continue
        s, nu = piece[1], piece[2]
        factor = 1.0 - nu * p(s)
        if factor == 0.0:
            raise RegressivityError(f"p is not nu-regressive at {s.value}: 1 - nu*p = 0", s)
        if factor < 0:
            flips += 1
        value /= factor
    return ExpValue(value, flips)


def _oriented(forward, p, ts, t, t0, tol):
    p = as_function(p)
    t, t0 = ts.point(t), ts.point(t0)
    if t == t0:
        return ExpValue(1.0, 0)
    if t0 < t:
        return forward(p, ts, t0, t, tol)
    return forward(p, ts, t, t0, tol).reciprocal


def delta_exp(p: FunctionLike, ts: TimeScale, t: PointLike, t0: PointLike, tol: float = DEFAULT_TOL) -> ExpValue:
    """Δ-exponential ``e_p(t, t0)``, the solution of ``y^Δ = p y``, ``y(t0) = 1``."""
    return _oriented(_forward_delta, p, ts, t, t0, tol)


def nabla_exp(p: FunctionLike, ts: TimeScale, t: PointLike, t0: PointLike, tol: float = DEFAULT_TOL) -> ExpValue:
    """∇-exponential ``ê_p(t, t0)``, the solution of ``y^∇ = p y``, ``y(t0) = 1``."""
    return _oriented(_forward_nabla, p, ts, t, t0, tol)


def delta_to_nabla_param(p: FunctionLike, ts: TimeScale) -> TSFunction:
    """Coefficient ``q = p^ρ / (1 + p^ρ ν)`` with ``ê_q = e_p``."""
    p = as_function(p)

    def q(x):
        t = ts.point(x)
        pr = p(ts.rho(t))
        den = 1.0 + pr * ts.nu(t)
        if den == 0.0:
            raise RegressivityError(f"1 + p^rho*nu vanishes at {x}", t)
        return pr / den

    return TSFunction(q)


def nabla_to_delta_param(q: FunctionLike, ts: TimeScale) -> TSFunction:
    """Coefficient ``p = q^σ / (1 - q^σ μ)`` with ``e_p = ê_q``."""
    q = as_function(q)

    def p(x):
        t = ts.point(x)
        qs = q(ts.sigma(t))
        den = 1.0 - qs * ts.mu(t)
        if den == 0.0:
            raise RegressivityError(f"1 - q^sigma*mu vanishes at {x}", t)
        return qs / den

    return TSFunction(p)


def rho_shift_delta_exp(p: FunctionLike, ts: TimeScale, t: PointLike, t0: PointLike) -> float:
    """``e_p(ρ(t), t0)`` through ``e_p(t, t0) / (1 + p^ρ(t) ν(t))``."""
    p = as_function(p)
    t = ts.point(t)
    den = 1.0 + p(ts.rho(t)) * ts.nu(t)
    if den == 0.0:
        raise RegressivityError(f"1 + p^rho*nu vanishes at {t.value}", t)
    return delta_exp(p, ts, t, t0).value / den


def rho_shift_nabla_exp(p: FunctionLike, ts: TimeScale, t: PointLike, t0: PointLike) -> float:
    """``ê_p(ρ(t), t0)`` through ``(1 - p(t) ν(t)) ê_p(t, t0)``.

    The identity is read with the parenthesisation shown; the reading without
    parentheses disagrees with the product formula on ``Z``.
    """
    p = as_function(p)
    t = ts.point(t)
    return (1.0 - p(t) * ts.nu(t)) * nabla_exp(p, ts, t, t0).value


def combined_E(alpha: float, p: FunctionLike, ts: TimeScale, t: PointLike, t0: PointLike) -> float:
    """Convex combination ``α e_p + (1 - α) ê_p``."""
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return delta_exp(p, ts, t, t0).value
    if alpha == 0.0:
        return nabla_exp(p, ts, t, t0).value
    return alpha * delta_exp(p, ts, t, t0).value + (1.0 - alpha) * nabla_exp(p, ts, t, t0).value


def combined_e(alpha: float, p: FunctionLike, ts: TimeScale, t: PointLike, t0: PointLike) -> float:
    """Geometric combination ``e_p^α ê_p^(1-α)``.

    Raises:
        ValueError: if a non-trivial power of a non-positive exponential is
            required.
    """
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return delta_exp(p, ts, t, t0).value
    if alpha == 0.0:
        return nabla_exp(p, ts, t, t0).value
    e = delta_exp(p, ts, t, t0).value
    h = nabla_exp(p, ts, t, t0).value
    if e <= 0 or h <= 0:
        raise ValueError(f"combined_e undefined: e_p={e}, e_hat_p={h} must both be positive")
    return math.exp(alpha * math.log(e) + (1.0 - alpha) * math.log(h))


def diamond_derivative_of_delta_exp(
    p: FunctionLike, ts: TimeScale, t: PointLike, t0: PointLike, alpha: float
) -> float:
    """Closed-form ◇α derivative of ``e_p(·, t0)`` on a regular time scale."""
    alpha = check_alpha(alpha)
    p = as_function(p)
    t = ts.point(t)
    pr = p(ts.rho(t))
    den = 1.0 + ts.nu(t) * pr
    if den == 0.0:
        raise RegressivityError(f"1 + nu*p^rho vanishes at {t.value}", t)
    coeff = alpha * p(t) + (1.0 - alpha) * pr / den
    return coeff * delta_exp(p, ts, t, t0).value


def diamond_derivative_of_nabla_exp(
    p: FunctionLike, ts: TimeScale, t: PointLike, t0: PointLike, alpha: float
) -> float:
    """Closed-form ◇α derivative of ``ê_p(·, t0)`` on a regular time scale."""
    alpha = check_alpha(alpha)
    p = as_function(p)
    t = ts.point(t)
    ps = p(ts.sigma(t))
    den = 1.0 - ts.mu(t) * ps
    if den == 0.0:
        raise RegressivityError(f"1 - mu*p^sigma vanishes at {t.value}", t)
    coeff = (1.0 - alpha) * p(t) + alpha * ps / den
    return coeff * nabla_exp(p, ts, t, t0).value


def exp_function(p: FunctionLike, ts: TimeScale, t0: PointLike, kind: str = "delta") -> TSFunction:
    """``t -> e_p(t, t0)`` (or ``ê_p``) as a :class:`TSFunction` with classical derivative ``p e_p``."""
    p = as_function(p)
    fn = delta_exp if kind == "delta" else nabla_exp
    if kind not in ("delta", "nabla"):
        raise ValueError("kind must be 'delta' or 'nabla'")

    def value(x):
        return fn(p, ts, x, t0).value

    return TSFunction(value, lambda x: p(x) * value(x))


__all__ = [
    "ExpValue",
    "RegressivityReport",
    "check_regressivity",
    "combined_E",
    "combined_e",
    "cylinder",
    "delta_exp",
    "delta_to_nabla_param",
    "diamond_derivative_of_delta_exp",
    "diamond_derivative_of_nabla_exp",
    "exp_function",
    "nabla_exp",
    "nabla_to_delta_param",
    "nu_cylinder",
    "rho_shift_delta_exp",
    "rho_shift_nabla_exp",
]
