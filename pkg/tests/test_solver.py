import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tscalc.calculus import TSFunction
from tscalc.errors import BackwardEvaluationError, BVPError, DenseSpanError, DivergenceError
from tscalc.exponentials import delta_exp, nabla_exp
from tscalc.solver import (
    DiamondBVP,
    StateRow,
    apply_L,
    diamond_exponential,
    propagate_dense,
    propagate_forward,
    propagate_from_accumulation,
    residuals,
    sandwich,
    solve,
    solve_nonhomogeneous,
    to_second_order_delta,
    transition_matrix,
    transition_product,
)
from tscalc.timescale import TimeScale

from .conftest import rel

SQ5 = math.sqrt(5.0)


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def fib_closed(t):
    return (((1 + SQ5) / 2) ** (t + 1) - ((1 - SQ5) / 2) ** (t + 1)) / SQ5


def cz_closed_form(c, p, alpha, t0, t):
    """Two-term fundamental-system formula on cZ for alpha = 1/2, anchored at s0 = t0 - c."""
    assert alpha == 0.5
    root = math.sqrt(1 + p * p * c * c)
    c1 = 0.5 - (p * c - 1) / (2 * root)
    s0 = t0 - c
    n = round((t - s0) / c)
    g1, g2 = p * c + root, p * c - root  # 1 + c * lambda for each root
    return c1 * g1**n + (1 - c1) * g2**n


class TestOperator:
    def test_constants_annihilated(self, Z):
        assert apply_L(0.0, Z, 0.5, 1.0, 3) == 0.0

    def test_fibonacci(self, Z):
        y = TSFunction(lambda t: fib_closed(t))
        for t in range(1, 10):
            assert abs(apply_L(0.5, Z, 0.5, y, t)) < 1e-9 * fib_closed(t)

    def test_alternating_solution(self, Z):
        y = TSFunction(lambda t: (-1.0) ** round(t))
        for t in range(-3, 4):
            assert apply_L(0.0, Z, 0.5, y, t) == 0.0

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 0.95))
    def test_linearity(self, a, b, alpha):
        ts = TimeScale.q_symmetric(2.0)
        f, g = TSFunction(lambda t: t * t), TSFunction(math.cos)
        for t in (-2.0, 0.5, 4.0):
            lhs = apply_L(0.1, ts, alpha, a * f + b * g, t)
            rhs = a * apply_L(0.1, ts, alpha, f, t) + b * apply_L(0.1, ts, alpha, g, t)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestTransitionMatrix:
    def test_fibonacci_matrix(self, Z):
        m = transition_matrix(Z, 0.5, 0.5, 3)
        assert (m.a, m.b) == (1.0, 1.0)

    def test_swap(self, Z):
        m = transition_matrix(Z, 0.0, 0.5, 3)
        assert (m.a, m.b) == (0.0, 1.0)

    def test_geometric_b(self, q2):
        for t in (0.25, 1.0, 8.0):
            assert transition_matrix(q2, 0.3, 0.8, t).b == pytest.approx(0.5, rel=1e-15)

    def test_uniform_b(self):
        ts = TimeScale.uniform(0.5)
        assert transition_matrix(ts, 1.0, 0.2, 1.0).b == pytest.approx(4.0, rel=1e-15)

    def test_rejects_endpoint_alpha(self, Z):
        with pytest.raises(BVPError):
            transition_matrix(Z, 0.5, 1.0, 0)

    def test_rejects_dense_point(self, mixed):
        with pytest.raises(DenseSpanError):
            transition_matrix(mixed, 0.5, 0.5, -0.5)

    def test_fibonacci_powers(self, Z):
        for n in range(1, 41):
            s = transition_product(Z, 0.5, 0.5, 1, 1 + n)
            assert s == ((fib(n + 1), fib(n)), (fib(n), fib(n - 1)))
            assert sandwich(s) == fib(n + 2)


class TestPropagation:
    def test_fibonacci_five_steps(self, Z):
        row = propagate_forward(Z, 0.5, 0.5, StateRow(1.0, 1.0), 1, 6)
        assert row == StateRow(13.0, 8.0)

    def test_single_step(self, Z):
        assert propagate_forward(Z, 0.5, 0.5, StateRow(1.0, 1.0), 1, 2) == StateRow(2.0, 1.0)

    def test_constant(self, Z):
        assert propagate_forward(Z, 0.0, 0.5, StateRow(1.0, 1.0), 0, 50) == StateRow(1.0, 1.0)

    def test_dense(self):
        ts = TimeScale.reals(0.0, 2.0)
        row = propagate_dense(ts, 0.7, StateRow(1.0, 1.0), 0.0, 1.0)
        assert row.y == pytest.approx(math.exp(0.7), rel=1e-13) and row.y == row.y_prev
        assert propagate_dense(ts, 0.0, StateRow(2.0, 2.0), 0.0, 1.0) == StateRow(2.0, 2.0)
        row = propagate_dense(ts, lambda t: t, StateRow(1.0, 1.0), 0.0, 2.0)
        assert row.y == pytest.approx(math.e**2, rel=1e-13)

    def test_dense_rejects_scattered(self, mixed):
        with pytest.raises(DenseSpanError):
            propagate_dense(mixed, 0.1, StateRow(1.0, 1.0), -1.0, 1.0)

    def test_accumulation_converges(self, q2):
        res = propagate_from_accumulation(q2, 0.1, 0.9, StateRow(1.0, 1.0), 0.0, 1.0)
        assert res.converged and res.limit_b == pytest.approx(2 / 9)

    def test_accumulation_diverges(self, q2):
        res = propagate_from_accumulation(q2, 0.1, 0.5, StateRow(1.0, 1.0), 0.0, 1.0)
        assert not res.converged and res.row is None
        assert res.limit_b == pytest.approx(2.0)

    def test_accumulation_constant(self, q2):
        res = propagate_from_accumulation(q2, 0.0, 0.8, StateRow(1.0, 1.0), 0.0, 4.0)
        assert res.row.y == pytest.approx(1.0, rel=1e-13)

    def test_factor_cap(self, q2, monkeypatch):
        monkeypatch.setenv("TSCALC_MAX_FACTORS", "5")
        res = propagate_from_accumulation(q2, 0.1, 0.9, StateRow(1.0, 1.0), 0.0, 1.0)
        assert not res.converged and res.depth == 5


class TestSolve:
    def test_fibonacci(self, Z):
        trace = solve(DiamondBVP(Z, 0.5, 0.5, 1), range(0, 7))
        assert trace.values == [1, 1, 2, 3, 5, 8, 13]

    @pytest.mark.parametrize("ts_name", ["Z", "q2", "mixed"])
    def test_reductions(self, ts_name, request):
        ts = request.getfixturevalue(ts_name)
        t0 = {"Z": 0, "q2": 0.25, "mixed": -1.0}[ts_name]
        pts = [t0, *{"Z": [1, 2, 5], "q2": [0.5, 2.0, 8.0], "mixed": [-0.5, 0.0, 0.5, 4.0]}[ts_name]]
        one = diamond_exponential(1.0, 0.2, ts, t0, pts)
        zero = diamond_exponential(0.0, 0.2, ts, t0, pts)
        for t, v in one:
            assert rel(v, delta_exp(0.2, ts, t, t0).value) < 1e-12
        for t, v in zero:
            assert rel(v, nabla_exp(0.2, ts, t, t0).value) < 1e-12

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    def test_zero_coefficient(self, Z, alpha):
        assert diamond_exponential(alpha, 0.0, Z, 0, range(0, 9)).values == [1.0] * 9

    def test_closed_form_on_cz(self):
        for c, p in ((1.0, 0.5), (0.5, 1.0), (2.0, -0.25)):
            ts = TimeScale.uniform(c)
            targets = [k * c for k in range(10)]
            trace = diamond_exponential(0.5, p, ts, 0.0, targets)
            scale = max(abs(v) for v in trace.values)
            for t, v in trace:
                # (2, -1/4) hits an exact zero, where only an absolute floor makes sense
                expected = cz_closed_form(c, p, 0.5, 0.0, t.value)
                assert abs(v - expected) <= 1e-9 * max(abs(expected), 1e-6 * scale)

    def test_mixed_scale_dense_then_accumulation(self, mixed):
        trace = solve(DiamondBVP(mixed, 0.9, 0.2, -1.0), [-0.5, 0.0, 1.0])
        assert trace.values[0] == pytest.approx(math.exp(0.1), rel=1e-13)
        assert trace.values[1] == pytest.approx(math.exp(0.2), rel=1e-13)
        assert trace.depths and trace.converged

    def test_q_symmetric_crosses_zero(self):
        ts = TimeScale.q_symmetric(2.0)
        trace = solve(DiamondBVP(ts, 0.9, 0.0, -1.0), [-0.5, 0.0, 1.0, 2.0])
        assert trace.values == pytest.approx([1.0] * 4, rel=1e-13)

    def test_divergence(self, q2):
        with pytest.raises(DivergenceError, match=r"q/\(q\+1\)"):
            solve(DiamondBVP(q2, 0.5, 0.5, 0.0), [1.0])

    def test_backward_rejected(self, Z):
        with pytest.raises(BackwardEvaluationError):
            solve(DiamondBVP(Z, 0.5, 0.5, 1), [-1])

    def test_rho_t0_allowed(self, Z):
        assert solve(DiamondBVP(Z, 0.5, 0.5, 1, y_rho=3.0), [0]).values == [3.0]

    def test_non_regular(self):
        from tscalc.timescale import RealInterval

        ts = TimeScale([RealInterval(0.0, 1.0), RealInterval(2.0, 3.0)])
        with pytest.raises(BVPError):
            DiamondBVP(ts, 0.5, 0.1, 0.0)

    def test_left_dense_t0_rejects_distinct_y_rho(self, mixed):
        with pytest.raises(BVPError):
            DiamondBVP(mixed, 0.5, 0.1, -0.5, y_rho=2.0)

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
    def test_nonuniqueness(self, c, alpha):
        ts = TimeScale.uniform(c)
        ratio = (alpha - 1) / alpha
        y2 = TSFunction(lambda t: ratio ** round(t / c))
        for t in (c, 2 * c, 5 * c):
            assert abs(apply_L(0.0, ts, alpha, y2, t)) < 1e-10 * max(1.0, abs(y2(t)))
        assert delta_exp(-1 / (alpha * c), ts, -c, 0.0).value == pytest.approx(alpha / (alpha - 1), rel=1e-12)
        assert solve(DiamondBVP(ts, alpha, 0.0, 0.0), [-c, 0.0, c, 2 * c]).values == [1.0] * 4

    def test_residual_invariant(self):
        ts = TimeScale.q_symmetric(2.0)
        bvp = DiamondBVP(ts, 0.85, lambda t: 0.1 * math.cos(t), -4.0)
        pts = ts.points_between(-8.0, -0.25) + ts.points_between(0.25, 16.0) + [ts.point(0.0)]
        trace = solve(bvp, pts)
        checked = residuals(bvp, trace)
        assert len(checked) > 8
        for t, r in checked:
            assert abs(r) < 1e-8 * max(1.0, abs(trace.value_at(t)))


class TestSecondOrder:
    def test_constant_coefficients(self):
        bvp = DiamondBVP(TimeScale.uniform(0.5), 0.4, 0.3, 0.0)
        so = to_second_order_delta(bvp)
        assert so.p_tilde(1.0) == pytest.approx((1 - 0.3 * 0.5) / (0.4 * 0.5))
        assert so.q_tilde(1.0) == pytest.approx(-0.3 / (0.4 * 0.5))

    def test_fibonacci(self, Z):
        so = to_second_order_delta(DiamondBVP(Z, 0.5, 0.5, 1))
        assert (so.p_tilde(3), so.q_tilde(3)) == (1.0, -1.0)
        assert so.solve(range(0, 11)).values == [fib(n + 1) for n in range(11)]

    def test_rejects_endpoint_alpha(self, Z):
        with pytest.raises(BVPError):
            to_second_order_delta(DiamondBVP(Z, 1.0, 0.5, 1))

    @given(st.floats(0.05, 0.95), st.floats(-0.3, 0.3), st.sampled_from([0.5, 1.0, 2.0]))
    def test_regressivity_identity(self, alpha, p, c):
        so = to_second_order_delta(DiamondBVP(TimeScale.uniform(c), alpha, p, 0.0))
        assert so.regressivity_defect(c) == pytest.approx(1 - 1 / alpha, rel=1e-14, abs=1e-14)

    @given(st.floats(0.3, 0.95), st.floats(-0.1, 0.1))
    def test_agrees_on_geometric_grid(self, alpha, p):
        ts = TimeScale.geometric(2.0)
        bvp = DiamondBVP(ts, alpha, p, 1.0, y_rho=0.8)
        pts = [2.0**k for k in range(-1, 10)]
        a = solve(bvp, pts).values
        b = to_second_order_delta(bvp).solve(pts).values
        for u, v in zip(a, b):
            assert rel(u, v) < 1e-10 or abs(u - v) < 1e-12


class TestForcing:
    def test_zero_forcing_matches_solve(self, Z):
        with_f = solve_nonhomogeneous(DiamondBVP(Z, 0.3, 0.2, 0, f=0.0), range(0, 8)).values
        assert with_f == solve(DiamondBVP(Z, 0.3, 0.2, 0), range(0, 8)).values

    def test_unit_forcing_residual(self, Z):
        bvp = DiamondBVP(Z, 0.5, 0.0, 0, y0=0.0, f=1.0, y_rho=0.0)
        trace = solve_nonhomogeneous(bvp, range(-1, 12))
        for t, r in residuals(bvp, trace):
            assert r == pytest.approx(0.0, abs=1e-12)

    def test_superposition(self, Z):
        f = lambda t: math.sin(t)  # noqa: E731
        forced = solve(DiamondBVP(Z, 0.6, 0.1, 0, y0=0.0, f=f, y_rho=0.0), range(-1, 10)).values
        free = solve(DiamondBVP(Z, 0.6, 0.1, 0, y0=2.0, y_rho=-1.0), range(-1, 10)).values
        both = solve(DiamondBVP(Z, 0.6, 0.1, 0, y0=2.0, f=f, y_rho=-1.0), range(-1, 10)).values
        for u, v, w in zip(forced, free, both):
            assert u + v == pytest.approx(w, rel=1e-12, abs=1e-12)

    def test_first_order_forced(self, Z):
        delta = solve(DiamondBVP(Z, 1.0, 0.5, 0, f=1.0), range(0, 5)).values
        y = 1.0
        for t in range(0, 5):
            assert delta[t] == y
            y = 1.5 * y + 1.0
        nabla = solve(DiamondBVP(Z, 0.0, 0.5, 0, f=1.0), range(0, 5)).values
        y = 1.0
        for t in range(0, 5):
            assert nabla[t] == pytest.approx(y)
            y = (y + 1.0) / 0.5

    def test_dense_forcing_rejected(self, mixed):
        with pytest.raises(BVPError):
            solve_nonhomogeneous(DiamondBVP(mixed, 0.9, 0.1, -1.0, f=1.0), [0.5])
