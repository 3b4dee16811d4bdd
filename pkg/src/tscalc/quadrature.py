"""Adaptive Simpson quadrature for the dense parts of a time scale."""

from __future__ import annotations

import math
from collections.abc import Callable

from .errors import QuadratureError

DEFAULT_TOL = 1e-12
DEFAULT_MAX_DEPTH = 40

_EPS = 2.220446049250313e-16


def _finite(fx: float, x: float) -> float:
    if not math.isfinite(fx):
        raise QuadratureError(f"integrand is not finite at {x!r} (unbounded dense integrand?)")
    return fx


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Raises:
        QuadratureError: on a non-finite integrand value, an infinite bound, or
            when a subinterval still misses its tolerance at ``max_depth``.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    if math.isinf(a) or math.isinf(b):
        raise QuadratureError("cannot integrate over an unbounded dense span")

    def ev(x):
        try:
            fx = float(f(x))
        except (ZeroDivisionError, OverflowError) as exc:
            raise QuadratureError(f"integrand failed at {x!r}: {exc}") from None
        return _finite(fx, x)

    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(lo, hi, flo, fmid, fhi, whole, depth, eps):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = ev(lm), ev(rm)
        left = simpson(flo, flm, fmid, mid - lo)
        right = simpson(fmid, frm, fhi, hi - mid)
        delta = left + right - whole
        # floor the target at rounding level so smooth integrands terminate
        target = max(eps, 32.0 * _EPS * (abs(left) + abs(right)))
        if abs(delta) <= 15.0 * target or lm in (lo, mid) or rm in (mid, hi):
            return left + right + delta / 15.0
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not reach tolerance {tol} on [{lo}, {hi}] within depth {max_depth}"
            )
        return recurse(lo, mid, flo, flm, fmid, left, depth + 1, eps / 2.0) + recurse(
            mid, hi, fmid, frm, fhi, right, depth + 1, eps / 2.0
        )

    fa, fb = ev(a), ev(b)
    m = 0.5 * (a + b)
    fm = ev(m)
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), 0, tol)
