"""``tscalc`` command-line interface.

Exit codes: 0 success, 1 a ``verify`` identity failed, 2 parse error,
3 validation error, 4 divergent transition product.
"""

from __future__ import annotations

import argparse
import io
import sys
from collections.abc import Sequence

from .calculus import TSFunction
from .errors import DivergenceError, TSCalcError
from .expr import ExprDomainError, ExprSyntaxError, compile_expr
from .exponentials import check_regressivity, combined_E, combined_e, delta_exp, nabla_exp
from .jobspec import COMMANDS, JobSpec, SpecSyntaxError, load_job_file, parse_targets, parse_timescale
from .solver import DiamondBVP, residuals, solve
from .verify import run_invariants

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_DIVERGENCE = 4

DEFAULT_ALPHA = 0.5


def fmt(x: float) -> str:
    """Shortest text that reads back as the same float."""
    return repr(float(x))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tscalc", description="Calculus and diamond-alpha equations on time scales.")
    ap.add_argument("--cmd", choices=COMMANDS, help="command to run")
    ap.add_argument("--spec", help="job file of key=value lines; flags override its values")
    ap.add_argument("--ts", help="time scale, e.g. 'interval(-1,0); qgrid(2,+)'")
    ap.add_argument("--alpha", type=float, help=f"diamond parameter in [0, 1] (default {DEFAULT_ALPHA})")
    ap.add_argument("--p", help="coefficient p(t) (default 0)")
    ap.add_argument("--f", help="forcing term f(t) for solve")
    ap.add_argument("--t0", type=float, help="initial point (default 0)")
    ap.add_argument("--y0", type=float, help="y(t0) (default 1)")
    ap.add_argument("--yrho", type=float, help="y(rho(t0)) (default y0)")
    ap.add_argument("--targets", help="'a..b', 'a..b:step' or 'x,y,...'")
    ap.add_argument("--tol", type=float, help="tolerance for verify or the accumulation product")
    ap.add_argument("--out", help="write output here instead of standard output")
    return ap


def _job(args: argparse.Namespace) -> JobSpec:
    base = load_job_file(args.spec) if args.spec else JobSpec()
    flags = JobSpec(**{k: getattr(args, k) for k in JobSpec.__dataclass_fields__})
    job = base.merged(flags)
    job.validate()
    return job


def _fn(text: str | None, default: float | None) -> TSFunction | None:
    if text is None:
        return None if default is None else TSFunction.constant(default)
    return TSFunction(compile_expr(text))


def _need_targets(job: JobSpec, ts):
    if job.targets is None:
        raise SpecSyntaxError(f"{job.cmd} needs targets")
    return parse_targets(job.targets, ts)


def cmd_partition(job: JobSpec, ts, out: io.TextIOBase) -> int:
    part = ts.atomic_partition()
    out.write("kind,index,value\n")
    for i, atom in enumerate(part.atoms):
        out.write(f'atom,{i},"{atom.describe()}"\n')
    for i, s in enumerate(part.switching_points):
        out.write(f"switching_point,{i},{fmt(s.value)}\n")
    return EXIT_OK


def cmd_eval_exp(job: JobSpec, ts, out) -> int:
    p = _fn(job.p, 0.0)
    alpha = DEFAULT_ALPHA if job.alpha is None else job.alpha
    t0 = ts.point(0.0 if job.t0 is None else job.t0)
    out.write("t,delta_exp,nabla_exp,combined_E,combined_e\n")
    for t in _need_targets(job, ts):
        e = delta_exp(p, ts, t, t0).value
        h = nabla_exp(p, ts, t, t0).value
        big = combined_E(alpha, p, ts, t, t0)
        try:
            small = fmt(combined_e(alpha, p, ts, t, t0))
        except ValueError:
            small = ""
        out.write(f"{fmt(t.value)},{fmt(e)},{fmt(h)},{fmt(big)},{small}\n")
    return EXIT_OK


def cmd_solve(job: JobSpec, ts, out) -> int:
    bvp = DiamondBVP(
        ts,
        DEFAULT_ALPHA if job.alpha is None else job.alpha,
        _fn(job.p, 0.0),
        0.0 if job.t0 is None else job.t0,
        1.0 if job.y0 is None else job.y0,
        _fn(job.f, None),
        job.yrho,
    )
    targets = _need_targets(job, ts)
    # neighbours are solved too so each scattered target gets a residual
    rho_t0 = ts.rho(bvp.t0)
    extra = {n for t in targets for n in (ts.sigma(t), ts.rho(t))}
    extra = {n for n in extra if n >= bvp.t0 or (bvp.two_point and n == rho_t0)}
    kwargs = {} if job.tol is None else {"tol": job.tol}
    trace = solve(bvp, set(targets) | extra, **kwargs)
    res = dict(residuals(bvp, trace)) if 0.0 < bvp.alpha < 1.0 else {}
    out.write("t,value,residual\n")
    for t in targets:
        r = fmt(res[t]) if t in res else ""
        out.write(f"{fmt(t.value)},{fmt(trace.value_at(t))},{r}\n")
    return EXIT_OK


def cmd_verify(job: JobSpec, ts, out) -> int:
    kwargs = {} if job.tol is None else {"tol": job.tol}
    results = run_invariants(
        ts,
        _fn(job.p, 0.0),
        DEFAULT_ALPHA if job.alpha is None else job.alpha,
        0.0 if job.t0 is None else job.t0,
        **kwargs,
    )
    for r in results:
        out.write(r.line() + "\n")
    ok = all(r.ok for r in results)
    out.write(f"{'ALL PASS' if ok else 'FAILED'}\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_regress_check(job: JobSpec, ts, out) -> int:
    window = None
    if job.targets is not None:
        pts = parse_targets(job.targets, ts)
        window = (pts[0].value, pts[-1].value)
    report = check_regressivity(_fn(job.p, 0.0), ts, window)
    out.write(f"regressive,{str(report.regressive).lower()}\n")
    out.write(f"nu_regressive,{str(report.nu_regressive).lower()}\n")
    for t in report.witnesses:
        out.write(f"witness,{fmt(t.value)}\n")
    for t in report.nu_witnesses:
        out.write(f"nu_witness,{fmt(t.value)}\n")
    return EXIT_OK


_HANDLERS = {
    "partition": cmd_partition,
    "eval-exp": cmd_eval_exp,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "regress-check": cmd_regress_check,
}


def run(job: JobSpec, out) -> int:
    """Run a validated job, writing its table or report to ``out``."""
    ts = parse_timescale(job.ts)
    return _HANDLERS[job.cmd](job, ts, out)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        job = _job(args)
        code = run(job, buf)
    except (SpecSyntaxError, ExprSyntaxError) as exc:
        print(f"tscalc: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DivergenceError as exc:
        print(f"tscalc: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (TSCalcError, ExprDomainError, ValueError, ArithmeticError, OSError) as exc:
        print(f"tscalc: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    text = buf.getvalue()
    if job.out:
        with open(job.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
