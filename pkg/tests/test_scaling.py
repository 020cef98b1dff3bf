import math

import numpy as np
import pytest
from conftest import planted_dataset
from hypothesis import given, strategies as st

from measonly.ensembles import SiteProbs, delta_q
from measonly.scaling import (
    CollapseError,
    CollapseOptions,
    PhaseBoundary,
    ProbPath,
    collapse,
    collapse_objective,
    collapsed_coordinates,
    crossing_points,
    delta_qc_eq6,
    delta_qc_eq12,
    fit_linear,
    qc_from_eq6,
    qc_from_eq12,
    r_from_delta_eq6,
)
from measonly.scaling import _groups


class TestEq6:
    def test_r3_symmetric(self):
        cp = qc_from_eq6(3)
        assert cp.delta_qc == pytest.approx(math.sqrt(2 / 3 - 1.16 / 3))
        assert cp.delta_qc == pytest.approx(0.52915, abs=1e-5)
        assert cp.q0 == pytest.approx(0.117308, abs=1e-6)
        assert delta_q(cp.probs) == pytest.approx(cp.delta_qc)

    def test_large_r_tends_to_corner(self):
        assert delta_qc_eq6(10**9) == pytest.approx(math.sqrt(2 / 3), abs=1e-6)

    @pytest.mark.parametrize("r", [1, 1.7])
    def test_no_transition_below_threshold(self, r):
        assert delta_qc_eq6(r) is None
        assert not qc_from_eq6(1).exists

    def test_r2_has_transition_on_formula(self):
        # 2/3 - 1.16/2 > 0, so r = 2 lies just above the existence threshold
        assert qc_from_eq6(2).delta_qc == pytest.approx(math.sqrt(2 / 3 - 0.58))

    @given(st.floats(1.75, 1e4))
    def test_round_trip(self, r):
        assert r_from_delta_eq6(delta_qc_eq6(r)) == pytest.approx(r, rel=1e-9)

    def test_monotone(self):
        d = [delta_qc_eq6(r) for r in range(2, 40)]
        assert all(b > a for a, b in zip(d, d[1:]))


class TestEq12:
    def test_odd_31(self):
        cp = qc_from_eq12(31, "odd")
        # 0.203 - 1.924 / 31**2.219 = 0.203 - 0.000944
        assert cp.delta_qc == pytest.approx(0.20206, abs=1e-5)
        assert cp.q0 == pytest.approx(0.25084, abs=1e-5)
        assert abs(cp.q0 - 0.2522) / 0.2522 < 0.01

    def test_odd_3(self):
        assert delta_qc_eq12(3) == pytest.approx(0.035, abs=5e-4)
        assert qc_from_eq12(3).q0 == pytest.approx(0.319, abs=1e-3)

    def test_even_4(self):
        assert delta_qc_eq12(4, "even") == pytest.approx(0.224 - 1.375 / 4 ** 1.615, rel=1e-12)
        assert delta_qc_eq12(4) == pytest.approx(0.07745, abs=1e-5)

    def test_clamped_at_zero(self):
        assert delta_qc_eq12(2) == 0.0
        assert not qc_from_eq12(2).exists

    def test_parity_mismatch(self):
        with pytest.raises(ValueError):
            delta_qc_eq12(4, "odd")

    def test_needs_r_at_least_two(self):
        with pytest.raises(ValueError):
            qc_from_eq12(1)

    def test_monotone_per_parity(self):
        for start in (3, 2):
            d = [delta_qc_eq12(r) for r in range(start, 41, 2)]
            assert all(b >= a for a, b in zip(d, d[1:]))


class TestPaths:
    @pytest.mark.parametrize("path", [ProbPath(), ProbPath("margin"), ProbPath("anchor", 0.2),
                                      ProbPath("anchor", 0.5), ProbPath("anchor", 0.9)])
    @pytest.mark.parametrize("dq", [0.05, 0.3, 0.4])
    def test_distance_is_preserved(self, path, dq):
        p = path.probs(dq)
        if p is not None:
            assert delta_q(p) == pytest.approx(dq, abs=1e-12)

    def test_margin_below_edge_distance(self):
        # the p_z = 0 edge is at least sqrt(6)/6 from the center
        assert ProbPath("margin").probs(0.3) is None

    def test_anchor_beyond_end(self):
        assert ProbPath("anchor", 0.5).probs(0.5) is None

    def test_bad_path(self):
        with pytest.raises(ValueError):
            ProbPath("diagonal")
        with pytest.raises(ValueError):
            ProbPath("anchor", 1.5)

    def test_boundary_round_trip(self):
        b = PhaseBoundary("eq6", ProbPath("anchor", 0.05))
        for r in range(3, 9):
            assert delta_q(b.critical_probs(r)) == pytest.approx(delta_qc_eq6(r))
        # a ray ending near the middle of the edge is too short for the r = 5 boundary
        assert PhaseBoundary("eq6", ProbPath("anchor", 0.3)).critical_probs(5) is None


class TestFitLinear:
    def test_exact_line(self):
        fit = fit_linear([(x, 2 * x + 1) for x in range(5)])
        assert fit.slope == pytest.approx(2) and fit.intercept == pytest.approx(1)
        assert abs(fit.r_squared - 1.0) < 1e-12

    def test_degenerate(self):
        with pytest.raises(ValueError):
            fit_linear([(1, 2), (1, 3)])
        with pytest.raises(ValueError):
            fit_linear([(1, 2)])

    def test_matches_numpy(self):
        rng = np.random.default_rng(0)
        x = np.arange(10.0)
        y = 0.3 * x - 2 + rng.normal(0, 0.5, 10)
        fit = fit_linear(list(zip(x, y)))
        slope, intercept = np.polyfit(x, y, 1)
        assert fit.slope == pytest.approx(slope) and fit.intercept == pytest.approx(intercept)
        assert fit.r_squared == pytest.approx(np.corrcoef(x, y)[0, 1] ** 2)


class TestCollapse:
    def test_recovers_unshifted(self):
        q, s, y = planted_dataset(seed=1)
        fit = collapse(q, s, y)
        assert abs(fit.q_c - 0.25) <= 0.005
        assert abs(fit.nu - 1.3) <= 0.07
        assert fit.objective >= 0 and fit.nu > 0

    def test_recovers_shift(self):
        q, s, y = planted_dataset(shift=0.5, sizes=(8, 16, 32, 64), seed=2)
        fit = collapse(q, s, y)
        assert fit.objective < fit.preliminary["objective"]
        assert abs(fit.shift_A - 0.5) <= 0.15
        assert abs(fit.q_c - 0.25) <= 0.005

    def test_noise_free_is_exact(self):
        q, s, y = planted_dataset(noise=0.0, seed=0)
        fit = collapse(q, s, y)
        assert fit.q_c == pytest.approx(0.25, abs=1e-3)
        assert fit.nu == pytest.approx(1.3, abs=1e-2)

    def test_single_size_rejected(self):
        q, s, y = planted_dataset(sizes=(32,))
        with pytest.raises(ValueError):
            collapse(q, s, y)

    def test_too_few_points(self):
        q, s, y = planted_dataset(q=np.linspace(0.1, 0.4, 4))
        with pytest.raises(ValueError):
            collapse(q, s, y)

    def test_objective_invariances(self):
        q, s, y = planted_dataset(seed=3)
        params = (0.26, 1.2, 0.1)
        base = collapse_objective(params, _groups(q, s, y, True))
        relabeled = collapse_objective(params, _groups(q, s * 1.0, y, True)[::-1])
        scaled = collapse_objective(params, _groups(q, s, 7.5 * y, True))
        assert relabeled == pytest.approx(base, rel=1e-12)
        assert scaled == pytest.approx(base, rel=1e-12)

    def test_disjoint_curves_rejected(self):
        q, s, y = planted_dataset()
        strict = CollapseOptions(min_overlap=1.01)
        assert collapse_objective((0.25, 1.3), _groups(q, s, y, False), strict) == np.inf
        with pytest.raises(CollapseError):
            collapse(q, s, y, opts=strict)

    def test_collapsed_coordinates(self):
        q, s, y = planted_dataset(noise=0.0)
        fit = collapse(q, s, y)
        rows = collapsed_coordinates(fit, q, s, y)
        assert len(rows) == q.size
        for size, qq, x, yy in rows[:5]:
            assert x == pytest.approx((qq - fit.q_c_of(size)) * size ** (1 / fit.nu))


class TestCrossings:
    def test_two_lines(self):
        q = np.linspace(0, 1, 11)
        pts = crossing_points(np.r_[q, q], np.r_[np.full(11, 8), np.full(11, 16)], np.r_[q, 1.5 * q - 0.25])
        assert len(pts) == 1 and pts[0]["q"] == pytest.approx(0.5)

    def test_planted_crossing(self):
        q, s, y = planted_dataset(noise=0.0)
        pts = crossing_points(q, s, y)
        assert len(pts) == 3
        assert all(p["q"] == pytest.approx(0.25, abs=1e-3) for p in pts)
