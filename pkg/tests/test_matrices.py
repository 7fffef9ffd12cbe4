import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import moderate_a, ordered_angles
from logspiral import matrices as mat
from logspiral.errors import DegenerateSystem, DomainError, SingularParameter
from logspiral.model import Angles, SpiralConfig, hyperbolics, reference_angles, scalar_pack


class TestBuild:
    def test_single_branch_is_cosh(self):
        A_mat = mat.build_A(2.0, Angles([]))
        assert A_mat.shape == (1, 1)
        assert A_mat[0, 0] == pytest.approx(hyperbolics(2.0)[0])

    @given(moderate_a, ordered_angles())
    def test_two_routes_agree(self, a, th):
        direct = mat.build_A(a, th)
        scalars = mat.build_A_from_scalars(a, th)
        assert np.abs(direct - scalars).max() <= 1e-11 * np.abs(direct).max()

    def test_structure_two_branches(self):
        a, th = 3.0, Angles([1.1])
        sp = scalar_pack(a, th)
        A_mat = mat.build_A(a, th)
        assert A_mat[0, 1] == pytest.approx(sp.r / sp.r_k[1])
        assert A_mat[1, 0] == pytest.approx(sp.r_k[1] / sp.r)
        assert A_mat[0, 0] == pytest.approx(A_mat[1, 1])

    def test_elimination_matrix(self):
        E = mat.elimination_matrix(3)
        assert np.array_equal(E, np.array([[1, 0, 0], [-1, 1, 0], [-1, 0, 1]], dtype=complex))

    def test_reduced_needs_two_branches(self):
        with pytest.raises(DomainError):
            mat.build_B_and_b(1.0, Angles([]))

    def test_Bl_index_range(self):
        system = mat.build_B_and_b(2.0, Angles([1.0, 2.0]))
        with pytest.raises(DomainError):
            mat.build_Bl(system, 0)
        with pytest.raises(DomainError):
            mat.build_Bl(system, 3)
        Bl = mat.build_Bl(system, 2)
        assert np.array_equal(Bl[:, 1], -system.b_vec)
        assert np.array_equal(Bl[:, 0], system.B_mat[:, 0])

    def test_cap(self):
        with pytest.raises(DomainError):
            mat.build_A(2.0, Angles(np.linspace(0.01, 6.0, 70)))


class TestDeterminantOracle:
    def test_diagonal(self):
        assert mat.det_bruteforce(np.diag([2, 3j])) == 6j

    def test_empty(self):
        assert mat.det_bruteforce(np.zeros((0, 0))) == 1

    def test_permutation_sign(self):
        P = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
        assert mat.det_bruteforce(P) == 1
        assert mat.det_bruteforce(P[[1, 0, 2]]) == -1

    def test_singular(self):
        assert mat.det_bruteforce(np.ones((3, 3)), mode="elimination") == 0
        assert abs(mat.det_bruteforce(np.ones((3, 3)))) == 0

    def test_bad_input(self):
        with pytest.raises(DomainError):
            mat.det_bruteforce(np.ones((2, 3)))
        with pytest.raises(DomainError):
            mat.det_bruteforce(np.eye(2), mode="qr")
        with pytest.raises(DomainError):
            mat.det_bruteforce(np.eye(13), mode="cofactor")

    @given(st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_modes_agree_with_numpy(self, n, seed):
        rng = np.random.default_rng(seed)
        mx = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        ref = np.linalg.det(mx)
        for mode in ("cofactor", "elimination"):
            assert mat.det_bruteforce(mx, mode=mode) == pytest.approx(ref, rel=1e-9, abs=1e-12)

    @given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_multiplicative(self, n, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        Y = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        lhs = mat.det_bruteforce(X @ Y)
        assert lhs == pytest.approx(mat.det_bruteforce(X) * mat.det_bruteforce(Y), rel=1e-9)


class TestClosedForms:
    @given(moderate_a, ordered_angles(max_M=8))
    @settings(max_examples=60, deadline=None)
    def test_det_B(self, a, th):
        oracle = mat.det_bruteforce(mat.build_B_and_b(a, th).B_mat)
        assert abs(mat.detB_closed(a, th) - oracle) <= 1e-9 * abs(oracle)

    @given(moderate_a, ordered_angles(max_M=8))
    @settings(max_examples=60, deadline=None)
    def test_det_Bl(self, a, th):
        system = mat.build_B_and_b(a, th)
        for l in range(1, th.M):
            oracle = mat.det_bruteforce(mat.build_Bl(system, l))
            assert abs(mat.detBl_closed(a, th, l) - oracle) <= 1e-9 * abs(oracle)

    def test_two_branch_K_H_by_hand(self):
        # M=2: the reduced system is 1x1, so both determinants are single entries
        a, th = 4.0, Angles([2.0])
        A_mat = mat.build_A(a, th)
        _, s = hyperbolics(a)
        detB = A_mat[1, 1] - A_mat[0, 1]
        detB1 = -(A_mat[1, 0] - A_mat[0, 0])
        assert mat.detB_closed(a, th) == pytest.approx(detB, rel=1e-13)
        assert mat.detBl_closed(a, th, 1) == pytest.approx(detB1, rel=1e-13)
        assert mat.K_closed(a, th) == pytest.approx(detB, rel=1e-13)
        assert s != 0

    def test_H_index_range(self):
        with pytest.raises(DomainError):
            mat.H_closed(2.0, Angles([1.0, 2.0]), 3)

    @given(moderate_a, ordered_angles(max_M=6))
    @settings(max_examples=40, deadline=None)
    def test_cramer_solves_reduced_system(self, a, th):
        system = mat.build_B_and_b(a, th)
        try:
            gp = mat.solve_gprime(a, th, require_admissible=False)
        except DegenerateSystem:
            return
        res = system.B_mat @ gp + system.b_vec
        assert np.abs(res).max() <= 1e-9 * max(1.0, np.abs(system.B_mat).max() * np.abs(gp).max())

    @pytest.mark.parametrize("M", [3, 5, 7, 9])
    @pytest.mark.parametrize("a", [5.0, 50.0, 500.0])
    def test_alexander_weights_equal(self, M, a):
        gp = mat.solve_gprime(a, reference_angles(SpiralConfig(M, 2)))
        np.testing.assert_allclose(gp, np.ones(M - 1), rtol=0, atol=1e-12)

    def test_inadmissible_rejected(self):
        # M=4, theta = (pi/2, pi, 3pi/2) has a vanishing limiting K
        th = reference_angles(SpiralConfig(4, 1))
        with pytest.raises(DegenerateSystem):
            mat.solve_gprime(1e3, th)


class TestLU:
    @given(moderate_a, ordered_angles(min_M=1, max_M=8))
    @settings(max_examples=60, deadline=None)
    def test_product_reconstructs(self, a, th):
        A_mat = mat.build_A(a, th)
        lu = mat.lu_factor_A(a, th)
        assert np.abs(lu.L @ lu.U - A_mat).max() <= 1e-12 * np.abs(A_mat).max()
        assert np.allclose(np.diag(lu.L), 1)
        assert np.all(np.triu(lu.L, 1) == 0)
        assert np.all(np.tril(lu.U, -1) == 0)

    @given(moderate_a, ordered_angles(min_M=1, max_M=8))
    @settings(max_examples=60, deadline=None)
    def test_det_closed(self, a, th):
        oracle = mat.det_bruteforce(mat.build_A(a, th))
        assert abs(mat.detA_closed(a, th) - oracle) <= 1e-9 * abs(oracle)

    def test_singular_parameter(self):
        # r tends to 1 as a grows, so a loose tol trips the guard
        with pytest.raises(SingularParameter):
            mat.lu_factor_A(1e9, Angles([1.0]), tol=1e-3)
        with pytest.raises(SingularParameter):
            mat.detA_closed(1e9, Angles([1.0]), tol=1e-3)
