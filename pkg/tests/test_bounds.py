import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lowrank_perturb.bounds import (
    bound_report,
    eym_bound,
    gap_profile,
    halving_distance_bottom,
    halving_distance_top,
    main2_1_bound,
    main2_bound,
    rectangle_boundary_max,
    thm1_bound,
    thm2_bound,
    thm3_bound,
    weyl_check,
)
from lowrank_perturb.errors import ArgumentError, NotPSDError, ZeroGapError
from lowrank_perturb.matcore import EntireFn, eig_sym, rank_p_approx, spectral_norm
from lowrank_perturb.noise import NoiseSpec, sample_wigner
from lowrank_perturb.synthetic import censuslike_spectrum, matrix_with_spectrum


def profile_with(**kw):
    """GapProfile from a real one with selected fields overridden."""
    base = gap_profile(eig_sym(np.diag([4.0, 1.0])), np.zeros((2, 2)), 1)
    return base.__class__(**{**base.__dict__, **kw})


def brute_r(lam, k):
    # smallest r in 1..n with lam_{r+1} <= lam_k / 2, lam_{n+1} = -inf
    ext = list(lam) + [-math.inf]
    return next(r for r in range(1, len(lam) + 1) if ext[r] <= lam[k - 1] / 2)


class TestProfile:
    def test_halving_distance_example(self):
        S = eig_sym(np.diag([10.0, 6, 5, 4, 2]))
        prof = gap_profile(S, np.zeros((5, 5)), 3)
        assert prof.r == 4 and prof.r1 == 4

    @settings(max_examples=60)
    @given(st.lists(st.floats(0.01, 100), min_size=2, max_size=12, unique=True), st.data())
    def test_r_matches_definition(self, vals, data):
        lam = np.sort(np.array(vals))[::-1]
        k = data.draw(st.integers(1, len(lam)))
        r = halving_distance_top(lam, k)
        assert r == brute_r(lam, k)
        assert r == len(lam) or lam[r] <= lam[k - 1] / 2
        assert r == 1 or lam[r - 1] > lam[k - 1] / 2

    def test_r2_definition(self):
        lam = np.array([3.0, 1.0, -2.0])
        # b = lam_3 = -2: smallest r2 with 1 <= lam_{4-r2} + 2
        assert halving_distance_bottom(lam, 2, 1) == 2

    def test_zero_noise(self):
        S = eig_sym(np.diag([3.0, 1.0, -2.0]))
        prof = gap_profile(S, np.zeros((3, 3)), 2)
        assert prof.x == 0 and prof.x_bar == 0
        assert prof.gap_ok_sym and prof.sv_gap_ok and not prof.psd
        assert prof.k == 1 and prof.delta_k == 2.0 and prof.delta_bottom == 3.0

    def test_interaction_oracle(self):
        a = matrix_with_spectrum([9.0, 7, 3, 1, 0.5])
        E = sample_wigner(5, NoiseSpec(seed=3, scale=0.1))
        S = eig_sym(a)
        prof = gap_profile(S, E, 2)
        U = S.eigenvectors
        expect = max(abs(U[:, i] @ E @ U[:, j]) for i in range(prof.r) for j in range(prof.r))
        assert prof.x == pytest.approx(expect, rel=1e-12)

    def test_psd_bottom_absent(self):
        prof = gap_profile(eig_sym(np.diag([3.0, 2, 1])), np.zeros((3, 3)), 2)
        assert prof.k == 2 and prof.r2 is None and prof.x2 is None

    def test_k_zero_flagged(self):
        prof = gap_profile(eig_sym(np.diag([1.0, -3, -2])), np.zeros((3, 3)), 2)
        assert prof.k_zero and prof.delta_k is None

    def test_p_equals_n(self):
        with pytest.raises(ArgumentError, match=r"\(p\+1\)"):
            gap_profile(eig_sym(np.eye(2)), np.zeros((2, 2)), 2)

    def test_census_gap_condition(self):
        S = eig_sym(np.diag(censuslike_spectrum()))
        assert S.gap(10) == pytest.approx(1433.99)
        assert 8 * math.sqrt(69) == pytest.approx(66.45, abs=0.01)
        assert 8 * math.sqrt(S.n) < S.gap(10)


class TestFormulas:
    def test_eym(self):
        S = eig_sym(np.diag([4.0, 1.0, 0.5]))
        assert eym_bound(S, 0.5, 1) == 3.0
        assert eym_bound(S, 0.0, 1) == 2.0

    def test_thm1_arithmetic(self):
        S = eig_sym(np.diag([20.0, 10.0, 2.0]))
        assert thm1_bound(S, 2.0, 2) == 17.5
        assert thm1_bound(S, 0.0, 2) == 0.0

    def test_thm1_errors(self):
        with pytest.raises(NotPSDError):
            thm1_bound(eig_sym(np.diag([2.0, -1.0])), 1.0, 1)
        with pytest.raises(ZeroGapError, match="delta_p"):
            thm1_bound(eig_sym(np.diag([2.0, 1.0, 1.0])), 1.0, 2)

    def test_thm2_example(self):
        prof = profile_with(r=1, x=1.0, lambda_p=2.0, delta_p=2.0, sigma_1=2.0)
        got = thm2_bound(prof, eig_sym(np.diag([4.0, 1.0])), 1.0)
        assert got == pytest.approx(12 * (2 * math.log(10) + 1))
        assert got == pytest.approx(67.26, abs=0.005)

    def test_thm2_no_interaction(self):
        prof = profile_with(x=0.0)
        S = eig_sym(np.diag([4.0, 1.0]))
        assert thm2_bound(prof, S, 0.5) == pytest.approx(12 * 0.5 * math.log(10 * 4 / 3))

    def test_main2_example(self):
        prof = profile_with(k=1, p=2, lambda_k=1.0, delta_k=1.0, lambda_bottom=-1.0,
                            delta_bottom=1.0, sigma_1=1.0)
        assert main2_bound(prof, None, 1.0) == pytest.approx(6 * (2 * math.log(6) + 2))
        assert main2_bound(prof, None, 1.0) == pytest.approx(33.50, abs=0.005)

    def test_main2_psd_reduces(self):
        S = eig_sym(np.diag([5.0, 3.0, 1.0]))
        prof = gap_profile(S, np.zeros((3, 3)), 2)
        e = 0.25
        expect = 6 * e * (math.log(6 * 5 / 2) + 3 / 2)
        assert main2_bound(prof, S, e) == pytest.approx(expect)
        # identity against thm1's form: ratio == 6 (1 + log(6 s1/d) d/lam)
        ratio = main2_bound(prof, S, e) / (e * 3 / 2)
        assert ratio == pytest.approx(6 * (1 + math.log(6 * 5 / 2) * 2 / 3))

    def test_main2_1_example(self):
        prof = profile_with(r=1, x_bar=1.0, lambda_k=1.0, delta_k=1.0, sigma_1=1.0)
        got = main2_1_bound(prof, None, 1.0)
        assert got == pytest.approx(24 * math.log(6) + 30)
        assert got == pytest.approx(73.00, abs=0.005)

    def test_main2_1_no_interaction(self):
        prof = profile_with(x_bar=0.0, k=1, p=2, lambda_k=1.0, delta_k=1.0,
                            lambda_bottom=-1.0, delta_bottom=2.0, sigma_1=1.0)
        assert main2_1_bound(prof, None, 0.5) == pytest.approx(6 * (math.log(6) + math.log(3)))

    def test_scale_covariance(self):
        S = eig_sym(np.diag([5.0, 3.0, 1.0]))
        S3 = eig_sym(np.diag([15.0, 9.0, 3.0]))
        assert thm1_bound(S3, 3 * 0.2, 2) == pytest.approx(3 * thm1_bound(S, 0.2, 2))

    @given(st.floats(0, 10), st.floats(0, 10))
    def test_monotone_in_noise(self, e1, e2):
        lo, hi = sorted((e1, e2))
        S = eig_sym(np.diag([5.0, 3.0, 1.0, -0.5]))
        prof = gap_profile(S, np.zeros((4, 4)), 2)
        for fn in (main2_bound, main2_1_bound):
            assert fn(prof, S, lo) <= fn(prof, S, hi)
        assert eym_bound(S, lo, 2) <= eym_bound(S, hi, 2)
        P = eig_sym(np.diag([5.0, 3.0, 1.0, 0.0]))
        pprof = gap_profile(P, np.zeros((4, 4)), 2)
        assert thm1_bound(P, lo, 2) <= thm1_bound(P, hi, 2)
        assert thm2_bound(pprof, P, lo) <= thm2_bound(pprof, P, hi)


class TestThm3:
    def test_corner_max_of_z(self):
        S = eig_sym(np.diag([3.0, 1.0]))
        m = rectangle_boundary_max(EntireFn.power(1), 2.0, 6.0, 6.0)
        assert m == pytest.approx(6 * math.sqrt(2), rel=1e-12)
        assert thm3_bound(S, 0.1, 1, EntireFn.power(1)) == pytest.approx(4 * 6 * math.sqrt(2) * 0.1 / 2)

    def test_constant(self):
        S = eig_sym(np.diag([3.0, 1.0]))
        assert thm3_bound(S, 0.3, 1, EntireFn.power(0)) == pytest.approx(4 * 0.3 / 2)

    def test_cube_bounded(self):
        S = eig_sym(np.diag([3.0, 2.0, 0.5]))
        b = thm3_bound(S, 0.1, 2, EntireFn.power(3))
        assert b <= 256 * 3.0 ** 3 * 0.1 / 1.5

    def test_exp_max_on_right_wall(self):
        # |exp(z)| = exp(Re z) peaks on the right wall
        m = rectangle_boundary_max(EntireFn.exp(), 1.0, 4.0, 4.0)
        assert m == pytest.approx(math.exp(4.0), rel=1e-12)


class TestWeyl:
    def test_zero_noise(self):
        S = eig_sym(np.diag([3.0, 1.0]))
        assert weyl_check(S, S, 0.0, slack=0.0)

    def test_shift(self):
        S = eig_sym(np.diag([3.0, 1.0, -1.0]))
        St = eig_sym(np.diag([3.0, 1.0, -1.0]) + 0.3 * np.eye(3))
        np.testing.assert_allclose(St.eigenvalues - S.eigenvalues, 0.3, atol=1e-15)
        assert weyl_check(S, St, 0.3)
        assert not weyl_check(S, St, 0.2)

    @pytest.mark.parametrize("seed", range(5))
    def test_random(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((8, 8))
        a = a + a.T
        E = sample_wigner(8, NoiseSpec(seed=seed, scale=0.3))
        assert weyl_check(eig_sym(a), eig_sym(a + E), spectral_norm(E))

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            weyl_check(eig_sym(np.eye(2)), eig_sym(np.eye(3)), 0.0)


class TestReport:
    def test_mu_identity(self):
        A = np.diag([5.0, 3.0, 1.0])
        mu = 0.2
        rep = bound_report(eig_sym(A), mu * np.eye(3), 2, eig_sym(A + mu * np.eye(3)))
        assert rep.actual_error == pytest.approx(mu, abs=1e-12)
        assert rep.actual_error <= rep.eym
        assert rep.actual_error <= rep.thm1

    def test_indefinite_report_has_no_psd_bounds(self):
        A = np.diag([3.0, 1.0, -2.0])
        E = sample_wigner(3, NoiseSpec(seed=1, scale=0.01))
        rep = bound_report(eig_sym(A), E, 2, eig_sym(A + E))
        assert rep.thm1 is None and rep.thm2 is None
        assert rep.gap_ok_sym
        assert rep.actual_error <= rep.main2 and rep.actual_error <= rep.main2_1

    @pytest.mark.parametrize("seed", range(10))
    def test_psd_20x20_thm1_dominates(self, seed):
        rng = np.random.default_rng(seed)
        lam = np.concatenate([rng.uniform(5, 10, 4), rng.uniform(0, 1, 16)])
        A = matrix_with_spectrum(lam, seed=seed)
        S = eig_sym(A)
        W = sample_wigner(20, NoiseSpec(seed=seed))
        E = W * (0.99 * S.gap(4) / (4 * spectral_norm(W)))
        rep = bound_report(S, E, 4, eig_sym(A + E))
        assert rep.gap_ok_psd
        assert rep.actual_error <= rep.thm1 and rep.actual_error <= rep.thm2
        assert rep.actual_error == pytest.approx(
            spectral_norm(rank_p_approx(eig_sym(A + E), 4) - rank_p_approx(S, 4)))

    def test_bounds_nonnegative_and_flags_consistent(self):
        A = matrix_with_spectrum([6.0, 4.0, 1.0, -0.5])
        E = sample_wigner(4, NoiseSpec(seed=2, scale=0.05))
        rep = bound_report(eig_sym(A), E, 2)
        d = rep.to_dict()
        assert all(d[k] >= 0 for k in ("eym", "main2", "main2_1"))
        prof = rep.profile
        assert d["gap_ok_sym"] == (4 * prof.e_norm <= min(prof.delta_k, prof.delta_p))
