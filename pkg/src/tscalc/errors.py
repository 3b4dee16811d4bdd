"""Exception hierarchy and a couple of process-wide limits."""

from __future__ import annotations

import os

DEFAULT_MAX_FACTORS = 1_000_000


def max_factors() -> int:
    """Hard cap on product/series length, overridable via ``TSCALC_MAX_FACTORS``."""
    raw = os.environ.get("TSCALC_MAX_FACTORS")
    if not raw:
        return DEFAULT_MAX_FACTORS
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"TSCALC_MAX_FACTORS must be an integer, got {raw!r}") from None
    if value <= 0:
        raise ValueError("TSCALC_MAX_FACTORS must be positive")
    return value


class TSCalcError(Exception):
    """Base class for all library errors."""


class TimeScaleError(TSCalcError, ValueError):
    """Invalid time scale construction (ordering, overlap, junction rule)."""


class NotRegularError(TimeScaleError):
    pass


class PointNotInTimeScale(TSCalcError, ValueError):
    pass


class DenseSpanError(TSCalcError, ValueError):
    """A σ-chain was requested across a dense stretch of the time scale."""


class DerivativeError(TSCalcError, ValueError):
    pass


class QuadratureError(TSCalcError, ArithmeticError):
    pass


class RegressivityError(TSCalcError, ArithmeticError):
    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class TruncationError(TSCalcError, RuntimeError):
    """A product or series needed more factors than the configured cap."""


class DivergenceError(TSCalcError, ArithmeticError):
    """An infinite transition-matrix product does not converge."""

    def __init__(self, message: str, *, depth: int = 0, limit_b: float | None = None):
        super().__init__(message)
        self.depth = depth
        self.limit_b = limit_b


class BVPError(TSCalcError, ValueError):
    """Ill-posed boundary value problem or unsupported request."""


class BackwardEvaluationError(BVPError):
    """Target lies before t0; only the forward construction is provided."""
