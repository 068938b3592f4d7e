import math

import numpy as np
import pytest
import scipy.linalg
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from lowrank_perturb.errors import ArgumentError, EigenConvergenceError, MultipletSplitError
from lowrank_perturb.matcore import (
    EntireFn,
    eig_sym,
    f_p_approx,
    frobenius_norm,
    jacobi_eigh,
    parse_fn,
    rank_p_approx,
    spectral_norm,
    split_index_k,
    sym_matrix,
)


def random_sym(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    return (a + a.T) / 2


def svd_truncation(a, p):
    # oracle: truncated SVD is the best rank-p approximation
    u, s, vt = np.linalg.svd(a)
    return (u[:, :p] * s[:p]) @ vt[:p]


sym_matrices = st.integers(2, 9).flatmap(
    lambda n: st.integers(0, 2 ** 32 - 1).map(lambda s: random_sym(n, s))
)


class TestSymMatrix:
    def test_mirrors_upper_triangle(self):
        m = sym_matrix([[1, 2], [99, 3]])
        assert m.tolist() == [[1, 2], [2, 3]]

    def test_rejects_non_square(self):
        with pytest.raises(ArgumentError):
            sym_matrix([[1, 2, 3]])


class TestEigSym:
    def test_identity(self):
        S = eig_sym(np.eye(3))
        assert S.eigenvalues.tolist() == [1.0, 1.0, 1.0]

    def test_diagonal(self):
        S = eig_sym(np.diag([5.0, 2.0, -3.0]))
        np.testing.assert_allclose(S.eigenvalues, [5, 2, -3])
        np.testing.assert_allclose(np.abs(S.eigenvectors), np.eye(3), atol=1e-14)

    def test_random_residual(self):
        a = random_sym(8, 7)
        S = eig_sym(a)
        assert np.linalg.norm(a @ S.eigenvectors - S.eigenvectors * S.eigenvalues) <= 1e-8

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_scipy(self, seed):
        a = random_sym(10, seed)
        np.testing.assert_allclose(eig_sym(a).eigenvalues, scipy.linalg.eigvalsh(a)[::-1],
                                   atol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_jacobi_route_agrees(self, seed):
        a = random_sym(9, 100 + seed)
        S1, S2 = eig_sym(a), eig_sym(a, method="jacobi")
        np.testing.assert_allclose(S1.eigenvalues, S2.eigenvalues, atol=1e-11)
        # sign convention makes the vectors themselves comparable
        np.testing.assert_allclose(S1.eigenvectors, S2.eigenvectors, atol=1e-8)

    def test_jacobi_cap_raises(self):
        with pytest.raises(EigenConvergenceError) as exc:
            jacobi_eigh(random_sym(6, 1), max_sweeps=1)
        assert exc.value.n == 6
        assert "6" in str(exc.value)

    def test_sign_convention(self):
        S = eig_sym(random_sym(7, 3))
        for col in S.eigenvectors.T:
            assert col[np.argmax(np.abs(col))] > 0

    def test_unknown_method(self):
        with pytest.raises(ArgumentError):
            eig_sym(np.eye(2), method="qr")

    def test_read_only(self):
        S = eig_sym(np.eye(2))
        with pytest.raises(ValueError):
            S.eigenvalues[0] = 3.0

    def test_accessors(self):
        S = eig_sym(np.diag([3.0, 1.0, -2.0]))
        assert S.lam(1) == 3.0 and S.gap(1) == 2.0
        assert S.sv(2) == 2.0 and S.sv(4) == 0.0
        assert not S.is_psd()
        with pytest.raises(ArgumentError):
            S.gap(3)


class TestRankP:
    def test_psd_diagonal(self):
        np.testing.assert_allclose(rank_p_approx(eig_sym(np.diag([3.0, 2, 1])), 2),
                                   np.diag([3.0, 2, 0]), atol=1e-15)

    def test_indefinite_matches_svd(self):
        a = np.diag([3.0, 1.0, -2.0])
        got = rank_p_approx(eig_sym(a), 2)
        np.testing.assert_allclose(got, np.diag([3.0, 0, -2]), atol=1e-15)
        np.testing.assert_allclose(got, svd_truncation(a, 2), atol=1e-14)

    def test_full_rank_reconstructs(self):
        a = random_sym(6, 11)
        np.testing.assert_allclose(rank_p_approx(eig_sym(a), 6), a, atol=1e-10)

    def test_out_of_range(self):
        with pytest.raises(ArgumentError):
            rank_p_approx(eig_sym(np.eye(2)), 3)

    def test_multiplet_split_raises(self):
        with pytest.raises(MultipletSplitError):
            rank_p_approx(eig_sym(np.diag([2.0, 1.0, 1.0])), 2)

    def test_tie_goes_to_positive(self):
        # |2| == |-2|: the positive eigenvalue is selected first
        got = rank_p_approx(eig_sym(np.diag([2.0, 0.5, -2.0])), 1)
        np.testing.assert_allclose(got, np.diag([2.0, 0, 0]), atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(sym_matrices, st.data())
    def test_matches_svd_oracle(self, a, data):
        p = data.draw(st.integers(1, a.shape[0]))
        S = eig_sym(a)
        sv = S.singular_values
        if p < S.n and sv[p - 1] - sv[p] < 1e-6:
            return
        np.testing.assert_allclose(rank_p_approx(S, p), svd_truncation(a, p), atol=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(sym_matrices, st.data())
    def test_eckart_young_residual(self, a, data):
        p = data.draw(st.integers(1, a.shape[0] - 1))
        S = eig_sym(a)
        sv = S.singular_values
        if sv[p - 1] - sv[p] < 1e-6:
            return
        assert math.isclose(spectral_norm(a - rank_p_approx(S, p)), S.sv(p + 1),
                            rel_tol=1e-8, abs_tol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(sym_matrices, st.data())
    def test_idempotent_under_redecomposition(self, a, data):
        p = data.draw(st.integers(1, a.shape[0]))
        S = eig_sym(a)
        sv = S.singular_values
        if p < S.n and sv[p - 1] - sv[p] < 1e-6:
            return
        ap = rank_p_approx(S, p)
        np.testing.assert_allclose(rank_p_approx(eig_sym(ap), p), ap, atol=1e-8)

    @settings(max_examples=30, deadline=None)
    @given(sym_matrices)
    def test_frobenius_identity(self, a):
        S = eig_sym(a)
        assert math.isclose(np.sum(S.eigenvalues ** 2), frobenius_norm(a) ** 2, rel_tol=1e-8)


class TestSplitIndex:
    def test_indefinite(self):
        assert split_index_k(eig_sym(np.diag([3.0, 1, -2])), 2) == 1

    def test_psd(self):
        assert split_index_k(eig_sym(np.diag([3.0, 2, 1])), 2) == 2

    def test_all_negative_selection_gives_zero(self):
        assert split_index_k(eig_sym(np.diag([1.0, -3, -2])), 2) == 0


class TestFunctions:
    def test_identity_fn_is_rank_p(self):
        S = eig_sym(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(f_p_approx(S, EntireFn.power(1), 1), np.diag([3.0, 0]))

    def test_cube(self):
        S = eig_sym(np.diag([2.0, 1.0]))
        np.testing.assert_allclose(f_p_approx(S, EntireFn.power(3), 1), np.diag([8.0, 0]))

    def test_exp_full(self):
        S = eig_sym(np.diag([1.0, 0.0]))
        np.testing.assert_allclose(f_p_approx(S, EntireFn.exp(), 2), np.diag([math.e, 1.0]))

    @pytest.mark.parametrize("seed", range(3))
    def test_exp_against_expm(self, seed):
        a = random_sym(6, 40 + seed)
        S = eig_sym(a)
        P = S.eigenvectors[:, :3] @ S.eigenvectors[:, :3].T
        np.testing.assert_allclose(f_p_approx(S, EntireFn.exp(), 3),
                                   P @ scipy.linalg.expm(a) @ P, atol=1e-10)

    def test_psd_identity_equals_rank_p(self):
        q = scipy.stats.ortho_group.rvs(5, random_state=1)
        a = (q * [5.0, 4, 3, 2, 1]) @ q.T
        S = eig_sym(a)
        np.testing.assert_array_equal(f_p_approx(S, EntireFn.power(1), 2), rank_p_approx(S, 2))

    @pytest.mark.parametrize("text,z,expected", [
        ("1", 3.0, 1.0), ("z", 3.0, 3.0), ("z^3", 2.0, 8.0), ("z**2", 3.0, 9.0),
        ("exp", 0.0, 1.0), ("cos", 0.0, 1.0), ("sin", 0.0, 0.0), ("poly:1,0,2", 2.0, 9.0),
    ])
    def test_parse(self, text, z, expected):
        assert parse_fn(text)(np.array([z]))[0] == pytest.approx(expected)

    def test_parse_rejects_non_entire(self):
        with pytest.raises(ArgumentError):
            parse_fn("z^0.5")


class TestNorms:
    def test_diagonal(self):
        m = np.diag([3.0, -4.0])
        assert spectral_norm(m) == 4.0 and frobenius_norm(m) == 5.0

    def test_zero(self):
        assert spectral_norm(np.zeros((3, 3))) == 0.0 and frobenius_norm(np.zeros((3, 3))) == 0.0

    def test_equivalence(self):
        m = random_sym(6, 5)
        s, f = spectral_norm(m), frobenius_norm(m)
        assert s <= f <= math.sqrt(6) * s
        assert s == pytest.approx(np.linalg.norm(m, 2), rel=1e-12)

