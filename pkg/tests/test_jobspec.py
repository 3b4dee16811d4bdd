import math

import pytest

from tscalc.errors import NotRegularError, PointNotInTimeScale, TimeScaleError
from tscalc.jobspec import JobSpec, SpecSyntaxError, parse_job_text, parse_targets, parse_timescale
from tscalc.timescale import TimeScale


class TestTimescaleClauses:
    def test_integers(self):
        assert parse_timescale("grid(1,-inf,inf)") == TimeScale.integers()

    def test_mixed(self):
        ts = parse_timescale("interval(-1,0); qgrid(2,+)")
        assert ts.is_regular() and len(ts.atomic_partition().atoms) == 2

    def test_keywords(self):
        assert parse_timescale("interval(-1,0); qgrid(q=2,side=+)") == parse_timescale("interval(-1,0);qgrid(2,+)")

    def test_qsym(self):
        assert parse_timescale("qsym(3)") == TimeScale.q_symmetric(3.0)

    def test_scattered_junction_merges_atoms(self):
        ts = parse_timescale("interval(-1,0); qgrid(2,+,kmax=1); grid(2,2,inf)")
        part = ts.atomic_partition()
        assert [a.describe() for a in part.atoms] == ["interval(-1.0,0.0)", "qgrid(2.0,+,kmax=1); grid(2.0,2.0,inf)"]
        assert [s.value for s in part.switching_points] == [0.0]

    def test_interval_then_uniform_grid_is_not_regular(self):
        with pytest.raises(NotRegularError):
            parse_timescale("interval(-1,0); grid(0.5,0,2)")

    def test_describe_reparses(self):
        ts = parse_timescale("grid(8,-inf,-7); qgrid(2,-,kmax=3,center=1); interval(1,2)")
        assert parse_timescale(ts.describe()) == ts

    def test_gap(self):
        with pytest.raises(NotRegularError, match="gap"):
            parse_timescale("interval(0,1); interval(2,3)")

    @pytest.mark.parametrize(
        "text, error",
        [
            ("interval(0,1", SpecSyntaxError),
            ("blob(1)", SpecSyntaxError),
            ("grid(1,0)", SpecSyntaxError),
            ("qgrid(2,up)", SpecSyntaxError),
            ("", SpecSyntaxError),
            ("interval(0,1);", SpecSyntaxError),
            ("interval(0,x)", SpecSyntaxError),
            ("qgrid(0.5,+)", TimeScaleError),
            ("grid(0.3,0,1)", TimeScaleError),
            ("interval(0,2); interval(1,3)", TimeScaleError),
            ("interval(0,1); interval(1,2)", TimeScaleError),
        ],
    )
    def test_errors(self, text, error):
        with pytest.raises(error):
            parse_timescale(text)


class TestTargets:
    def test_range(self, Z):
        assert [p.value for p in parse_targets("0..6", Z)] == [0, 1, 2, 3, 4, 5, 6]

    def test_step(self, mixed):
        assert [p.value for p in parse_targets("-1..0:0.25", mixed)] == [-1, -0.75, -0.5, -0.25, 0]

    def test_list_sorted_unique(self, Z):
        assert [p.value for p in parse_targets("3, 1,2,1", Z)] == [1, 2, 3]

    def test_not_in_scale(self, Z):
        with pytest.raises(PointNotInTimeScale):
            parse_targets("0.5", Z)

    def test_bad(self, Z):
        with pytest.raises(SpecSyntaxError):
            parse_targets("3..1", Z)
        with pytest.raises(SpecSyntaxError):
            parse_targets("0..inf", Z)


class TestJobText:
    def test_parse_and_merge(self):
        job = parse_job_text("cmd = solve\nts = grid(1,-inf,inf)  # Z\nalpha=0.5\n\n")
        assert job == JobSpec(cmd="solve", ts="grid(1,-inf,inf)", alpha=0.5)
        merged = job.merged(JobSpec(alpha=0.25, p="t"))
        assert (merged.alpha, merged.p, merged.cmd) == (0.25, "t", "solve")

    @pytest.mark.parametrize("text", ["nonsense", "colour=red", "alpha=0.5\nalpha=0.2", "alpha=abc"])
    def test_errors(self, text):
        with pytest.raises(SpecSyntaxError):
            parse_job_text(text)

    def test_validate(self):
        with pytest.raises(SpecSyntaxError):
            JobSpec(ts="grid(1,-inf,inf)").validate()
        with pytest.raises(SpecSyntaxError):
            JobSpec(cmd="solve", ts="grid(1,-inf,inf)", p="1+").validate()
        with pytest.raises(ValueError):
            JobSpec(cmd="solve", ts="grid(1,-inf,inf)", alpha=1.5).validate()
        JobSpec(cmd="solve", ts="grid(1,-inf,inf)", alpha=math.nextafter(1.0, 0)).validate()
