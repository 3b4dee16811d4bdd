"""Text formats for the command line: time-scale clauses, target lists, job files."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import NotRegularError, TimeScaleError
from .expr import ExprSyntaxError, parse_expr
from .timescale import GeometricGrid, Point, RealInterval, TimeScale, UniformGrid

COMMANDS = ("partition", "eval-exp", "solve", "verify", "regress-check")


class SpecSyntaxError(ValueError):
    """Malformed clause, number, key or target list."""


_CLAUSE = re.compile(r"^\s*([a-z]+)\s*\((.*)\)\s*$")


def parse_number(text: str) -> float:
    """Float literal, also ``inf``/``-inf``/``+inf``."""
    s = text.strip()
    try:
        value = float(s)
    except ValueError:
        raise SpecSyntaxError(f"not a number: {text.strip()!r}") from None
    if math.isnan(value):
        raise SpecSyntaxError("nan is not allowed")
    return value


def _finite(text: str, what: str) -> float:
    value = parse_number(text)
    if math.isinf(value):
        raise SpecSyntaxError(f"{what} must be finite")
    return value


def _split_args(body: str) -> tuple[list[str], dict[str, str]]:
    pos, kw = [], {}
    if not body.strip():
        return pos, kw
    for raw in body.split(","):
        item = raw.strip()
        if "=" in item:
            key, _, value = item.partition("=")
            kw[key.strip()] = value.strip()
        else:
            if kw:
                raise SpecSyntaxError("positional argument after keyword argument")
            pos.append(item)
    return pos, kw


def _bind(name, pos, kw, params, required):
    if len(pos) > len(params):
        raise SpecSyntaxError(f"{name}() takes at most {len(params)} arguments")
    out = dict(zip(params, pos))
    for key, value in kw.items():
        if key not in params:
            raise SpecSyntaxError(f"{name}() has no parameter {key!r}")
        if key in out:
            raise SpecSyntaxError(f"{name}() got {key!r} twice")
        out[key] = value
    missing = [p for p in params[:required] if p not in out]
    if missing:
        raise SpecSyntaxError(f"{name}() is missing {', '.join(missing)}")
    return out


def _side(text: str) -> int:
    s = text.strip()
    if s in ("+", "+1", "1", "right"):
        return 1
    if s in ("-", "-1", "left"):
        return -1
    raise SpecSyntaxError(f"side must be '+' or '-', got {s!r}")


def _grid(args) -> UniformGrid:
    c = _finite(args["c"], "grid step")
    lo, hi = parse_number(args["from"]), parse_number(args["to"])
    if lo == math.inf or hi == -math.inf or lo > hi:
        raise TimeScaleError(f"grid range [{lo}, {hi}] is empty")
    if math.isinf(lo) and math.isinf(hi):
        return UniformGrid(c)
    origin = hi if math.isinf(lo) else lo
    lo_k = -math.inf if math.isinf(lo) else 0
    if math.isinf(hi):
        hi_k = math.inf
    else:
        n = (hi - origin) / c
        hi_k = round(n)
        if abs(n - hi_k) > 1e-9 * max(1.0, abs(n)):
            raise TimeScaleError(f"grid({c},{lo},{hi}): range is not a whole number of steps")
    return UniformGrid(c, lo_k, hi_k, origin)


def _qgrid(args) -> GeometricGrid:
    kmax = args.get("kmax")
    k_max = math.inf
    if kmax is not None:
        try:
            k_max = int(kmax)
        except ValueError:
            raise SpecSyntaxError(f"kmax must be an integer, got {kmax!r}") from None
    center = _finite(args.get("center", "0"), "center")
    return GeometricGrid(_finite(args["q"], "q"), _side(args.get("side", "+")), k_max, center)


def parse_timescale(text: str) -> TimeScale:
    """Build a time scale from ``;``-separated clauses.

    Clauses: ``interval(a,b)``, ``grid(c,from,to)``, ``qgrid(q,side)`` with
    optional ``kmax=``/``center=``, and ``qsym(q)``. Arguments may be given
    by keyword.

    Raises:
        SpecSyntaxError: malformed clause text.
        TimeScaleError: bad parameters, overlapping segments, or a union that
            is not regular (for instance a gap between two intervals).
    """
    segments = []
    clauses = [c for c in text.split(";")]
    if not any(c.strip() for c in clauses):
        raise SpecSyntaxError("empty time-scale description")
    for clause in clauses:
        if not clause.strip():
            raise SpecSyntaxError("empty clause between ';'")
        m = _CLAUSE.match(clause)
        if m is None:
            raise SpecSyntaxError(f"cannot parse clause {clause.strip()!r}")
        name, (pos, kw) = m.group(1), _split_args(m.group(2))
        if name == "interval":
            a = _bind(name, pos, kw, ("a", "b"), 2)
            lo, hi = parse_number(a["a"]), parse_number(a["b"])
            if lo > hi:
                raise TimeScaleError(f"interval({lo},{hi}) is empty")
            segments.append(RealInterval(lo, hi))
        elif name == "grid":
            segments.append(_grid(_bind(name, pos, kw, ("c", "from", "to"), 3)))
        elif name == "qgrid":
            segments.append(_qgrid(_bind(name, pos, kw, ("q", "side", "kmax", "center"), 1)))
        elif name == "qsym":
            q = _finite(_bind(name, pos, kw, ("q",), 1)["q"], "q")
            segments += [GeometricGrid(q, -1), GeometricGrid(q, 1)]
        else:
            raise SpecSyntaxError(f"unknown clause {name!r}; expected interval, grid, qgrid or qsym")
    ts = TimeScale(segments)
    report = ts.is_regular()
    if not report:
        gap = any(not ts.is_junction(i) for i in range(len(segments) - 1))
        why = "gap between segments makes the time scale non-regular; " if gap else ""
        raise NotRegularError(f"{why}not regular at {report.point!r}: {report.reason}")
    return ts


def parse_targets(text: str, ts: TimeScale) -> list[Point]:
    """Targets as ``a..b`` (every point, finite scattered span), ``a..b:h`` or ``x,y,...``.

    Results are sorted ascending without duplicates.
    """
    s = text.strip()
    if not s:
        raise SpecSyntaxError("empty target list")
    if ".." in s:
        span, _, step = s.partition(":")
        lo_s, _, hi_s = span.partition("..")
        lo, hi = _finite(lo_s, "target bound"), _finite(hi_s, "target bound")
        if lo > hi:
            raise SpecSyntaxError(f"target range {lo}..{hi} is empty")
        if step:
            h = _finite(step, "target step")
            if h <= 0:
                raise SpecSyntaxError("target step must be positive")
            n = math.floor((hi - lo) / h + 1e-9)
            values = [lo + k * h for k in range(n + 1)]
            pts = [ts.point(v) for v in values]
        else:
            pts = ts.points_between(lo, hi)
    else:
        pts = [ts.point(_finite(v, "target")) for v in s.split(",")]
    return sorted(set(pts))


@dataclass(frozen=True)
class JobSpec:
    """Everything one command invocation needs, as text."""

    cmd: str | None = None
    ts: str | None = None
    alpha: float | None = None
    p: str | None = None
    f: str | None = None
    t0: float | None = None
    y0: float | None = None
    yrho: float | None = None
    targets: str | None = None
    tol: float | None = None
    out: str | None = None

    def merged(self, override: JobSpec) -> JobSpec:
        """Values of ``override`` win wherever they are set."""
        changes = {f.name: getattr(override, f.name) for f in fields(self)}
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def validate(self) -> None:
        if self.cmd is None:
            raise SpecSyntaxError("no command given (cmd)")
        if self.cmd not in COMMANDS:
            raise SpecSyntaxError(f"unknown command {self.cmd!r}; expected one of {', '.join(COMMANDS)}")
        if self.ts is None:
            raise SpecSyntaxError("no time scale given (ts)")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")
        for name in ("p", "f"):
            text = getattr(self, name)
            if text is not None:
                try:
                    parse_expr(text)
                except ExprSyntaxError as exc:
                    raise SpecSyntaxError(f"{name}: {exc}") from None


_FLOAT_KEYS = ("alpha", "t0", "y0", "yrho", "tol")
_KEYS = {f.name for f in fields(JobSpec)}


def parse_job_text(text: str) -> JobSpec:
    """``key=value`` lines; ``#`` starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecSyntaxError(f"line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if key not in _KEYS:
            raise SpecSyntaxError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise SpecSyntaxError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _finite(value, key) if key in _FLOAT_KEYS else value
    return JobSpec(**values)


def load_job_file(path: str | Path) -> JobSpec:
    return parse_job_text(Path(path).read_text(encoding="utf-8"))
