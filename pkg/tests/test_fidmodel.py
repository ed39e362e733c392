import math

import pytest
from hypothesis import given, settings, strategies as st

from chiplet_fabric import fidmodel as fm
from chiplet_fabric import topology as topo

MUMBAI = fm.ScalingParams(0.991, 27, 0.0002, 0.91)


class TestMonolithic:
    def test_equal_size(self):
        assert fm.f_cx_mono(27, MUMBAI) == 0.991

    def test_65_qubits(self):
        assert fm.f_cx_mono(65, MUMBAI) == pytest.approx(0.9834, abs=1e-12)

    def test_zero_delta(self):
        p = fm.ScalingParams(0.991, 27, 0.0, 0.91)
        assert all(fm.f_cx_mono(n, p) == 0.991 for n in (27, 500, 10_000))

    def test_out_of_range(self):
        with pytest.raises(fm.ModelRangeError):
            fm.f_cx_mono(10_000, MUMBAI)
        with pytest.raises(fm.ModelRangeError):
            fm.f_cx_mono(10, MUMBAI)

    def test_infidelity_rate(self):
        assert fm.infidelity_rate() == pytest.approx(2.368421e-4, rel=1e-6)


class TestRatios:
    def test_link(self):
        r = fm.non_depolarizing_ratios(0.991, 0.91)
        assert r.r_link == pytest.approx(0.18) and r.R_link == pytest.approx(0.82)

    def test_cx(self):
        r = fm.non_depolarizing_ratios(0.991, 0.91)
        assert r.r_cx == pytest.approx(0.012) and r.R_cx == pytest.approx(0.988)
        assert r.R_swap == pytest.approx(0.964430272, abs=1e-9)

    def test_perfect(self):
        r = fm.non_depolarizing_ratios(1.0, 1.0)
        assert (r.r_cx, r.R_cx, r.r_link, r.R_link) == (0, 1, 0, 1)

    def test_too_low(self):
        with pytest.raises(fm.ModelRangeError):
            fm.non_depolarizing_ratios(0.991, 0.4)
        with pytest.raises(fm.ModelRangeError):
            fm.non_depolarizing_ratios(0.2, 0.91)


class TestPathFidelity:
    def test_empty(self):
        assert fm.path_process_fidelity(0, 0, 0.991, 0.91) == 1.0

    def test_single_link(self):
        assert fm.path_process_fidelity(0, 1, 0.991, 0.91) == 0.91

    def test_single_swap(self):
        assert fm.path_process_fidelity(1, 0, 0.991, 0.91) == pytest.approx(0.98222, abs=1e-5)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 300), st.integers(0, 40), st.floats(0.9, 1.0), st.floats(0.6, 1.0))
    def test_range_and_monotone(self, ts, tl, f_cx, f_link):
        f = fm.path_process_fidelity(ts, tl, f_cx, f_link)
        assert 0.5 <= f <= 1.0
        assert fm.path_process_fidelity(ts + 1, tl, f_cx, f_link) <= f
        assert fm.path_process_fidelity(ts, tl + 1, f_cx, f_link) <= f

    def test_negative_counts(self):
        with pytest.raises(fm.ModelRangeError):
            fm.path_process_fidelity(-1, 0, 0.99, 0.9)


class TestSweep:
    def test_single_chip_equal(self):
        rows = fm.sweep("falcon", [27], MUMBAI, [0.0, 0.0002])
        assert rows[0].t_link == 0
        assert all(v == pytest.approx(rows[0].f_chiplet) for v in rows[0].f_mono_by_delta.values())

    def test_zero_delta_mono_wins(self):
        rows = fm.sweep("falcon", fm.family_sizes("falcon", 1500), MUMBAI, [0.0])
        assert all(r.f_mono_by_delta[0.0] >= r.f_chiplet for r in rows)

    @pytest.mark.xfail(strict=True, reason="the monolithic comparator pays a SWAP for every hop "
                       "the chiplet path crosses on a perfect link; see decisions ledger")
    def test_perfect_link_zero_delta_equal(self):
        p = fm.ScalingParams(0.991, 27, 0.0, 1.0)
        rows = fm.sweep("chiplet_grid", [100, 400], p, [0.0])
        assert all(r.f_mono_by_delta[0.0] == pytest.approx(r.f_chiplet) for r in rows)

    def test_perfect_link_zero_delta_chiplet_not_worse(self):
        p = fm.ScalingParams(0.991, 27, 0.0, 1.0)
        rows = fm.sweep("chiplet_grid", [25, 100, 400], p, [0.0])
        for r in rows:
            mono = r.f_mono_by_delta[0.0]
            if r.t_link == 0:
                assert mono == pytest.approx(r.f_chiplet)
            else:
                assert r.f_chiplet > mono
                assert r.f_chiplet == pytest.approx(fm.path_process_fidelity(r.t_swap, 0, 0.991, 1))

    def test_crossover_with_high_link(self):
        p = fm.ScalingParams(0.991, 27, 0.0002, 0.96)
        rows = fm.sweep("falcon", fm.family_sizes("falcon", 1500), p, [0.0002])
        n_star = fm.crossover(rows, 0.0002)
        assert n_star == 108
        assert all(r.f_chiplet > r.f_mono_by_delta[0.0002] for r in rows if r.n_total >= n_star)

    def test_row_values(self):
        row = fm.sweep("falcon", [108], MUMBAI, [0.0002])[0]
        assert (row.n_total, row.t_swap, row.t_link) == (108, 28, 2)
        assert row.f_chiplet == pytest.approx(fm.path_process_fidelity(28, 2, 0.991, 0.91))
        mono = fm.fidelity_from_ratio((1 - 4 / 3 * (1 - fm.f_cx_mono(108, MUMBAI))) ** 90)
        assert row.f_mono_by_delta[0.0002] == pytest.approx(mono)

    def test_strict_range(self):
        p = fm.ScalingParams(0.991, 27, 0.0005, 0.91)
        with pytest.raises(fm.ModelRangeError):
            fm.sweep("falcon", [2187], p, [0.0005])
        row = fm.sweep("falcon", [2187], p, [0.0005], strict=False)[0]
        assert math.isnan(row.f_mono_by_delta[0.0005])

    def test_family_sizes(self):
        assert fm.family_sizes("falcon", 500) == [27, 108, 243, 432]
        assert 54 in fm.family_sizes("falcon", 500, square_only=False)
        assert fm.family_sizes("grid_tree", 400) == [25, 75, 175, 375]


class TestRequiredLink:
    def test_equal_cx(self):
        f = fm.required_link_fidelity(10, 1, 0.99, 0.99)
        R_cx = 1 - 4 / 3 * 0.01
        assert f == pytest.approx((1 + R_cx ** 3) / 2)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 300), st.integers(1, 30), st.floats(0.95, 1.0), st.floats(0, 0.03))
    def test_substitution(self, ts, tl, f_chip, gap):
        f_mono = f_chip - gap
        f_star = fm.required_link_fidelity(ts, tl, f_chip, f_mono)
        chip = fm.path_process_fidelity(ts, tl, f_chip, f_star)
        mono = fm.fidelity_from_ratio((1 - 4 / 3 * (1 - f_mono)) ** (3 * (ts + tl)))
        assert chip == pytest.approx(mono, abs=1e-12)

    def test_infeasible(self):
        with pytest.raises(fm.ModelRangeError):
            fm.required_link_fidelity(10, 1, 0.99, 0.999)

    def test_needs_link(self):
        with pytest.raises(fm.ModelRangeError):
            fm.required_link_fidelity(10, 0, 0.99, 0.99)

    def test_falcon_sweep_decreasing(self):
        p = fm.ScalingParams(fm.F_CX_HYBRID_THRESHOLD, 27, 0.0002, 0.91)
        rows = fm.required_link_sweep("falcon", fm.family_sizes("falcon", 2000), p, [0.0002])
        values = [r[0.0002] for r in rows]
        assert values[0] == pytest.approx(0.68271097, abs=1e-8)
        assert all(b <= a for a, b in zip(values, values[1:]))


class TestRescaling:
    def test_identity_scale(self):
        out = fm.rescaling_invariance_check(20, 3, 0.988, 0.0002, 0.82, 500, 27, 1.0)
        assert out["ratio"] == out["ratio_scaled"]

    @pytest.mark.parametrize("a", [1.001, 0.9, 1.3])
    def test_scaled(self, a):
        out = fm.rescaling_invariance_check(40, 5, 0.99, 0.0001, 0.9, 800, 27, a)
        assert out["ratio_scaled"] == pytest.approx(out["ratio"], rel=1e-12)


class TestYieldLatency:
    def test_yield(self):
        assert fm.defect_yield(50, 0.01) == pytest.approx(0.605006, abs=1e-6)
        assert fm.defect_yield(1000, 0.01) == pytest.approx(4.317e-5, rel=1e-3)

    def test_attempts(self):
        a = fm.expected_attempts(20, 50, 0.01)
        assert a == pytest.approx(33.0575, abs=1e-4) and math.ceil(a) == 34

    def test_bad_probability(self):
        with pytest.raises(fm.ModelRangeError):
            fm.defect_yield(10, 1.0)

    @pytest.mark.parametrize("ts,tl,ns", [(0, 0, 0), (1, 1, 1400), (10, 2, 12400)])
    def test_latency(self, ts, tl, ns):
        assert fm.path_latency(ts, tl) == ns

    def test_latency_stall(self):
        assert fm.path_latency(2, 3, link_reuse_stall_ns=1000) == 2400 + 600 + 2000


class TestBoundaries:
    def test_fully_depolarizing_link(self):
        assert fm.non_depolarizing_ratios(0.991, 0.5).R_link == 0.0
        assert fm.path_process_fidelity(3, 1, 0.991, 0.5) == 0.5

    def test_required_link_at_floor_is_usable(self):
        f_star = fm.required_link_fidelity(283, 1, 0.953125, 0.953125 - 0.029296875)
        assert f_star >= 0.5
        assert fm.path_process_fidelity(283, 1, 0.953125, f_star) == pytest.approx(0.5)
