"""Delta, nabla and diamond-alpha derivatives and integrals."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from numbers import Real
from typing import Union

from .errors import DerivativeError
from .quadrature import DEFAULT_TOL, adaptive_simpson
from .timescale import Point, PointLike, TimeScale

_CONTINUITY = ("rd-continuous", "ld-continuous", "both")


@dataclass(frozen=True)
class TSFunction:
    """A real function on a time scale.

    ``value`` takes the real coordinate of a point. ``derivative`` is the
    classical derivative used at dense points; without it a finite difference
    is taken.
    """

    value: Callable[[float], float]
    derivative: Callable[[float], float] | None = None
    continuity: str = "both"

    def __post_init__(self):
        if self.continuity not in _CONTINUITY:
            raise ValueError(f"continuity must be one of {_CONTINUITY}")

    def __call__(self, t: PointLike) -> float:
        x = t.value if isinstance(t, Point) else t
        return float(self.value(x))

    @classmethod
    def constant(cls, c: float) -> TSFunction:
        c = float(c)
        return cls(lambda t: c, lambda t: 0.0)

    def __add__(self, other):
        other = as_function(other)
        return _combine(self, other, 1.0, 1.0)

    def __rmul__(self, k):
        k = float(k)
        d = None if self.derivative is None else (lambda t: k * self.derivative(t))
        return TSFunction(lambda t: k * self.value(t), d, self.continuity)

    def __sub__(self, other):
        return _combine(self, as_function(other), 1.0, -1.0)


def _combine(f, g, a, b):
    d = None
    if f.derivative is not None and g.derivative is not None:
        d = lambda t: a * f.derivative(t) + b * g.derivative(t)  # noqa: E731
    return TSFunction(lambda t: a * f.value(t) + b * g.value(t), d)


FunctionLike = Union[TSFunction, Callable[[float], float], float, int]


def as_function(f: FunctionLike) -> TSFunction:
    if isinstance(f, TSFunction):
        return f
    if isinstance(f, Real):
        return TSFunction.constant(float(f))
    if callable(f):
        return TSFunction(f)
    raise TypeError(f"cannot use {type(f).__name__} as a time-scale function")


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha


def fd_step(t: float) -> float:
    return max(1e-6, 1e-8 * abs(t))


def _dense_derivative(f: TSFunction, ts: TimeScale, t: Point, needed: str) -> float:
    if f.derivative is not None:
        return float(f.derivative(t.value))
    h = fd_step(t.value)
    right = ts.dense_neighbour(t, "right", h)
    left = ts.dense_neighbour(t, "left", h)
    if needed == "right" and right is None:
        raise DerivativeError(f"no dense right neighbourhood at {t.value}")
    if needed == "left" and left is None:
        raise DerivativeError(f"no dense left neighbourhood at {t.value}")
    if right is not None and left is not None:
        return (f(right) - f(left)) / (right - left)
    if right is not None:
        return (f(right) - f(t)) / (right - t.value)
    return (f(t) - f(left)) / (t.value - left)


def delta_derivative(f: FunctionLike, ts: TimeScale, t: PointLike) -> float:
    """Δ-derivative of ``f`` at ``t``.

    Difference quotient toward σ(t) at right-scattered points, classical
    derivative (supplied or finite difference) at right-dense ones.
    """
    f = as_function(f)
    t = ts.point(t)
    s = ts.sigma(t)
    if s != t:
        return (f(s) - f(t)) / ts.mu(t)
    if t.value == ts.max and ts.rho(t) != t:
        raise DerivativeError(f"{t.value} is a left-scattered maximum, outside T^kappa")
    return _dense_derivative(f, ts, t, "right" if t.value != ts.max else "left")


def nabla_derivative(f: FunctionLike, ts: TimeScale, t: PointLike) -> float:
    """∇-derivative of ``f`` at ``t``."""
    f = as_function(f)
    t = ts.point(t)
    r = ts.rho(t)
    if r != t:
        return (f(t) - f(r)) / ts.nu(t)
    if t.value == ts.min and ts.sigma(t) != t:
        raise DerivativeError(f"{t.value} is a right-scattered minimum, outside T_kappa")
    return _dense_derivative(f, ts, t, "left" if t.value != ts.min else "right")


def diamond_derivative(f: FunctionLike, ts: TimeScale, t: PointLike, alpha: float) -> float:
    """Diamond-α derivative as the convex combination of Δ and ∇ derivatives.

    At ``alpha`` exactly 0 or 1 the unused one-sided derivative is never
    evaluated.
    """
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return delta_derivative(f, ts, t)
    if alpha == 0.0:
        return nabla_derivative(f, ts, t)
    return alpha * delta_derivative(f, ts, t) + (1.0 - alpha) * nabla_derivative(f, ts, t)


def _integral(f, ts, a, b, side, tol):
    f = as_function(f)
    a, b = ts.point(a), ts.point(b)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    parts = []
    for piece in ts.walk(a, b, side):
        if piece[0] == "dense":
            parts.append(adaptive_simpson(f, piece[1], piece[2], tol))
        else:
            parts.append(piece[2] * f(piece[1]))
    total = math.fsum(parts)
    if not math.isfinite(total):
        raise ArithmeticError("integral is not finite")
    return sign * total


def delta_integral(f: FunctionLike, ts: TimeScale, a: PointLike, b: PointLike, tol: float = DEFAULT_TOL) -> float:
    """Δ-integral over ``[a, b)``: μ-weighted sum plus dense quadrature."""
    return _integral(f, ts, a, b, "delta", tol)


def nabla_integral(f: FunctionLike, ts: TimeScale, a: PointLike, b: PointLike, tol: float = DEFAULT_TOL) -> float:
    return _integral(f, ts, a, b, "nabla", tol)


def diamond_integral(
    f: FunctionLike, ts: TimeScale, a: PointLike, b: PointLike, alpha: float, tol: float = DEFAULT_TOL
) -> float:
    alpha = check_alpha(alpha)
    if alpha == 1.0:
        return delta_integral(f, ts, a, b, tol)
    if alpha == 0.0:
        return nabla_integral(f, ts, a, b, tol)
    return alpha * delta_integral(f, ts, a, b, tol) + (1.0 - alpha) * nabla_integral(f, ts, a, b, tol)
