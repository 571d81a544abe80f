import math

import numpy as np
import pytest

from lits.circular import (
    TWO_PI,
    AngularInterval,
    IntervalKind,
    StepFnS1,
    indicator_of_union,
    sum_of_indicators,
    wrap_angle,
)
from lits.errors import ParameterError

from conftest import brute_count, random_intervals

PI = math.pi


def iv(a, b):
    return AngularInterval.proper(a, b)


class TestWrapAngle:
    def test_normalizes_into_range(self):
        assert wrap_angle(TWO_PI) == 0.0
        assert wrap_angle(-PI) == pytest.approx(PI)
        assert wrap_angle(5 * TWO_PI + 1.0) == pytest.approx(1.0)

    def test_idempotent(self, rng):
        for t in rng.uniform(-100, 100, 1000):
            once = wrap_angle(t)
            assert wrap_angle(once) == once
            assert 0.0 <= once < TWO_PI


class TestIndicatorOfUnion:
    def test_empty_union_is_zero(self):
        f = indicator_of_union([])
        assert f.is_constant and f.evaluate(1.23) == 0

    def test_single_arc(self):
        f = indicator_of_union([iv(-PI / 3, PI / 3)])
        assert f.evaluate(0.0) == 1
        assert f.evaluate(PI) == 0
        assert f.evaluate(wrap_angle(-PI / 3 + 1e-6)) == 1

    def test_overlapping_arcs_merge(self):
        # union of (0, pi) and (pi/2, 3pi/2) covers (0, 3pi/2)
        f = indicator_of_union([iv(0, PI), iv(PI / 2, 3 * PI / 2)])
        grid = np.linspace(0, TWO_PI, 10_000, endpoint=False) + 1e-5
        want = np.array([1 if 0 < t < 3 * PI / 2 else 0 for t in grid])
        assert np.array_equal(f.evaluate_many(grid), want)

    def test_values_are_binary(self, rng):
        for _ in range(50):
            f = indicator_of_union(random_intervals(rng))
            assert f.max_value() <= 1 and f.min_value() >= 0


class TestSumOfIndicators:
    def test_doubled_arc(self):
        f = sum_of_indicators([iv(0, PI), iv(0, PI)])
        assert f.evaluate(1.0) == 2
        assert f.evaluate(4.0) == 0

    def test_partial_overlap_staircase(self):
        f = sum_of_indicators([iv(0, PI), iv(PI / 2, 3 * PI / 2)])
        assert f.evaluate(PI / 4) == 1
        assert f.evaluate(2.0) == 2          # inside (pi/2, pi)
        assert f.evaluate(3.5) == 1          # inside (pi, 3pi/2)
        assert f.evaluate(5.0) == 0

    def test_empty(self):
        assert sum_of_indicators([]) == StepFnS1.constant(0)

    def test_pointwise_against_brute_force(self, rng):
        # the union/sum builders against direct interval membership
        for _ in range(1000):
            ivs = random_intervals(rng)
            f = sum_of_indicators(ivs)
            ts = rng.uniform(0, TWO_PI, 10)
            if not f.is_constant:
                d = np.abs(ts[:, None] - f.breakpoints[None, :])
                ts = ts[np.minimum(d, TWO_PI - d).min(axis=1) > 1e-7]
            for t in ts:
                assert f.evaluate(t) == brute_count(ivs, t)

    def test_big_pointwise_oracle(self, rng):
        # one large sweep: 10^4 angles against vectorized membership
        ivs = random_intervals(rng, max_count=32)
        while not ivs:
            ivs = random_intervals(rng, max_count=32)
        f = sum_of_indicators(ivs)
        ts = rng.uniform(0, TWO_PI, 10_000)
        if not f.is_constant:
            d = np.abs(ts[:, None] - f.breakpoints[None, :])
            ts = ts[np.minimum(d, TWO_PI - d).min(axis=1) > 1e-7]
        got = f.evaluate_many(ts)
        want = np.array([brute_count(ivs, t) for t in ts])
        assert np.array_equal(got, want)

    def test_indicator_is_clipped_sum(self, rng):
        for _ in range(100):
            ivs = random_intervals(rng)
            s = sum_of_indicators(ivs)
            u = indicator_of_union(ivs)
            ts = rng.uniform(0, TWO_PI, 64)
            got = u.evaluate_many(ts)
            want = np.minimum(1, s.evaluate_many(ts))
            # disagreement can only sit within eps of a breakpoint
            ok = got == want
            if not ok.all():
                bps = s.breakpoints if not s.is_constant else np.array([])
                d = np.abs(ts[~ok][:, None] - bps[None, :])
                assert np.minimum(d, TWO_PI - d).min() < 1e-6

    def test_full_and_singleton_kinds(self):
        full = AngularInterval.full()
        fmp = AngularInterval.full_minus_point(1.0)
        single = AngularInterval.singleton(2.0)
        f = sum_of_indicators([full, fmp, single, iv(0, 1)])
        # full and full-minus-point contribute constants, singleton nothing
        assert f.evaluate(0.5) == 3
        assert f.evaluate(2.0) == 2


class TestCanonicalForm:
    def test_constant_shape(self):
        f = StepFnS1.constant(3)
        assert f.breakpoints.size == 0 and f.values.tolist() == [3]

    def test_adjacent_values_differ_enforced(self):
        with pytest.raises(ParameterError):
            StepFnS1([0.0, 1.0], [2, 2])

    def test_recanonicalization_is_identity(self, rng):
        for _ in range(100):
            f = sum_of_indicators(random_intervals(rng))
            again = StepFnS1(f.breakpoints, f.values)
            assert again == f

    def test_negative_values_rejected(self):
        with pytest.raises(ParameterError):
            StepFnS1([0.0, 1.0], [1, -1])


class TestEvaluate:
    def test_constant(self):
        assert StepFnS1.constant(3).evaluate(2.7) == 3

    def test_indicator_examples(self):
        f = indicator_of_union([iv(0, PI)])
        assert f.evaluate(PI / 2) == 1
        assert f.evaluate(3 * PI / 2) == 0

    def test_half_open_at_breakpoint(self):
        f = StepFnS1([0.0, PI], [1, 0])
        assert f.evaluate(0.0) == 1    # value of the arc starting at the breakpoint
        assert f.evaluate(PI) == 0


class TestSublevelIntervals:
    def test_zero_set_of_indicator(self):
        f = indicator_of_union([iv(0, PI)])
        (zero,) = f.sublevel_intervals(1)
        assert zero.start == pytest.approx(PI)
        assert zero.end == pytest.approx(0.0)
        assert zero.length == pytest.approx(PI)

    def test_constant_zero(self):
        assert StepFnS1.constant(0).sublevel_intervals(1) == [AngularInterval.full()]
        assert StepFnS1.constant(5).sublevel_intervals(1) == []

    def test_complement_is_superlevel(self, rng):
        for _ in range(50):
            f = sum_of_indicators(random_intervals(rng))
            thr = int(rng.integers(1, 4))
            below = f.sublevel_intervals(thr)
            above = f.superlevel_intervals(thr)
            total = sum(ivl.length for ivl in below) + sum(ivl.length for ivl in above)
            assert total == pytest.approx(TWO_PI)
            for t in rng.uniform(0, TWO_PI, 32):
                hit_below = any(ivl.contains(t) for ivl in below)
                hit_above = any(ivl.contains(t) for ivl in above)
                assert hit_below or hit_above or any(
                    abs(wrap_angle(t - b)) < 1e-12 for b in
                    (f.breakpoints if not f.is_constant else []))

    def test_threshold_absorbs_noise_bumps_into_one_valley(self):
        # tall hill, a valley holding a low outlier bump: a 15%-of-max
        # threshold leaves a single below-threshold interval
        f = StepFnS1([0.0, 1.0, 2.5, 3.0, 3.5, 4.5], [12, 20, 0, 2, 0, 15])
        i0 = max(1, round(0.15 * f.max_value()))
        below = f.sublevel_intervals(i0)
        assert len(below) == 1
        assert below[0].start == pytest.approx(2.5)
        assert below[0].center == pytest.approx(3.5)


class TestTotalVariation:
    def test_constant_is_zero(self):
        assert StepFnS1.constant(7).total_variation() == 0.0

    def test_indicator_is_two(self):
        assert indicator_of_union([iv(0, PI)]).total_variation() == 2.0

    def test_staircase(self):
        # jumps 0->1->2->1->0 enumerate to 4
        f = sum_of_indicators([iv(0, PI), iv(PI / 2, 3 * PI / 2)])
        assert f.total_variation() == 4.0

    def test_bounded_by_twice_arc_count(self, rng):
        for _ in range(100):
            ivs = random_intervals(rng)
            tv = sum_of_indicators(ivs).total_variation()
            assert tv <= 2 * len(ivs) + 1e-12


class TestShift:
    def test_zero_shift_is_identity(self, rng):
        f = sum_of_indicators(random_intervals(rng))
        assert f.shift(0.0) == f

    def test_indicator_shift(self):
        f = indicator_of_union([iv(0, PI)]).shift(PI / 2)
        assert f == indicator_of_union([iv(PI / 2, 3 * PI / 2)])

    def test_group_action(self, rng):
        for _ in range(50):
            f = sum_of_indicators(random_intervals(rng))
            a, b = rng.uniform(0, TWO_PI, 2)
            lhs = f.shift(a + b)
            rhs = f.shift(a).shift(b)
            assert lhs.approx_equal(rhs, 1e-9)
            inv = f.shift(a).shift(TWO_PI - a)
            assert inv.approx_equal(f, 1e-9)

    def test_shift_moves_evaluation(self, rng):
        f = sum_of_indicators(random_intervals(rng))
        beta = 1.234
        g = f.shift(beta)
        for t in rng.uniform(0, TWO_PI, 200):
            if not f.is_constant:
                d = np.abs(wrap_angle(t - beta) - f.breakpoints)
                if np.minimum(d, TWO_PI - d).min() < 1e-9:
                    continue
            assert g.evaluate(t) == f.evaluate(t - beta)


class TestSampleAndSmooth:
    def test_constant(self):
        out = StepFnS1.constant(3).sample_and_smooth(360, 9)
        assert np.allclose(out, 3.0) and out.size == 360

    def test_four_samples_window_one(self):
        f = indicator_of_union([iv(0, PI)])
        assert f.sample_and_smooth(4, 1).tolist() == [1.0, 1.0, 0.0, 0.0]

    def test_mean_preserved(self, rng):
        f = sum_of_indicators(random_intervals(rng))
        raw = f.sample_and_smooth(256, 1)
        smooth = f.sample_and_smooth(256, 15)
        assert np.mean(smooth) == pytest.approx(np.mean(raw))

    def test_parameter_errors(self):
        f = StepFnS1.constant(1)
        with pytest.raises(ParameterError):
            f.sample_and_smooth(10, 4)
        with pytest.raises(ParameterError):
            f.sample_and_smooth(10, 11)


class TestSerialization:
    def test_round_trip(self, rng):
        for _ in range(20):
            f = sum_of_indicators(random_intervals(rng))
            assert StepFnS1.from_json(f.to_json()) == f

    def test_schema(self):
        obj = indicator_of_union([iv(0, PI)]).to_json()
        assert set(obj) == {"breakpoints", "values"}


class TestAngularInterval:
    def test_contains_semantics(self):
        p = iv(1.0, 2.0)
        assert p.contains(1.5) and not p.contains(1.0) and not p.contains(2.0)
        assert AngularInterval.full().contains(0.0)
        assert not AngularInterval.empty().contains(0.0)
        s = AngularInterval.singleton(1.0)
        assert s.contains(1.0) and not s.contains(1.1)
        m = AngularInterval.full_minus_point(1.0)
        assert not m.contains(1.0) and m.contains(1.1)

    def test_wrapping_interval(self):
        p = iv(5.0, 1.0)
        assert p.contains(0.0) and p.contains(6.0) and not p.contains(3.0)
        assert p.length == pytest.approx(TWO_PI - 4.0)

    def test_kinds(self):
        assert iv(0, 1).kind is IntervalKind.PROPER
        assert AngularInterval.full().length == TWO_PI
