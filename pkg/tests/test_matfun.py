"""Matrix functions: sampling, Jacobi SVD, exterior powers, rank analysis."""

import numpy as np
import pytest

from cocycles.matfun import (
    GridMatrixFunction,
    MatrixFunction,
    exterior_power,
    hstack,
    jacobi_svd,
    max_rank,
    poly_det,
    svd_at,
    vstack,
)
from cocycles.trigpoly import TrigPoly


def nilpotent_3x3():
    z = TrigPoly.zero()
    one = TrigPoly.constant(1.0)
    return MatrixFunction(
        [
            [z, TrigPoly.cosine(), TrigPoly.sine()],
            [z, z, one],
            [z, z, z],
        ]
    )


def rand_matrix(rng, d, degree=2, scale=1.0):
    return MatrixFunction(
        [
            [
                TrigPoly.from_dict(
                    {
                        k: scale * (rng.standard_normal() + 1j * rng.standard_normal())
                        for k in range(-degree, degree + 1)
                    }
                )
                for _ in range(d)
            ]
            for _ in range(d)
        ]
    )


class TestMatrixFunction:
    def test_eval_nilpotent_fixture_at_zero(self):
        a = nilpotent_3x3().eval_mat(0.0)
        expect = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=complex)
        assert np.abs(a - expect).max() < 1e-14

    def test_sample_grid_matches_eval(self):
        rng = np.random.default_rng(0)
        f = rand_matrix(rng, 3)
        M = 32
        grid = f.sample_grid(M)
        xs = np.arange(M) / M
        direct = np.stack([f.eval_mat(x) for x in xs])
        assert np.abs(grid - direct).max() < 1e-12

    def test_sample_grid_shift_matches_translate(self):
        rng = np.random.default_rng(1)
        f = rand_matrix(rng, 2)
        alpha = 0.6180339887498949
        lhs = f.sample_grid(16, shift=alpha)
        rhs = f.translate(alpha).sample_grid(16)
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_matmul_pointwise_oracle(self):
        rng = np.random.default_rng(2)
        f = rand_matrix(rng, 3)
        g = rand_matrix(rng, 3)
        x = 0.37
        assert np.abs((f @ g).eval_mat(x) - f.eval_mat(x) @ g.eval_mat(x)).max() < 1e-10

    def test_adjoint_oracle(self):
        rng = np.random.default_rng(3)
        f = rand_matrix(rng, 3)
        x = 0.81
        assert np.abs(f.adjoint().eval_mat(x) - f.eval_mat(x).conj().T).max() < 1e-12

    def test_block_and_stack(self):
        rng = np.random.default_rng(4)
        f = rand_matrix(rng, 3)
        top = f.block(0, 1, 0, 3)
        bottom = f.block(1, 3, 0, 3)
        again = vstack([top, bottom])
        x = 0.2
        assert np.abs(again.eval_mat(x) - f.eval_mat(x)).max() < 1e-14
        left = f.block(0, 3, 0, 2)
        right = f.block(0, 3, 2, 3)
        assert np.abs(hstack([left, right]).eval_mat(x) - f.eval_mat(x)).max() < 1e-14

    def test_json_round_trip(self):
        rng = np.random.default_rng(5)
        f = rand_matrix(rng, 2)
        back = MatrixFunction.from_json_dict(f.to_json_dict())
        x = 0.456
        assert np.abs(back.eval_mat(x) - f.eval_mat(x)).max() < 1e-14


class TestJacobiSVD:
    def test_matches_lapack_on_random(self):
        rng = np.random.default_rng(6)
        for shape in [(4, 4), (5, 3), (3, 5)]:
            a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            s, u, vh = jacobi_svd(a)
            s_ref = np.linalg.svd(a, compute_uv=False)
            assert np.abs(s - s_ref).max() < 1e-12
            k = min(shape)
            recon = (u[:, :k] * s[:k]) @ vh[:k, :]
            assert np.abs(recon - a).max() < 1e-12
            assert np.abs(u.conj().T @ u - np.eye(shape[0])).max() < 1e-12
            assert np.abs(vh @ vh.conj().T - np.eye(shape[1])).max() < 1e-12

    def test_rank_deficient(self):
        rng = np.random.default_rng(7)
        b = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
        c = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        a = b @ c
        s, u, vh = jacobi_svd(a)
        assert s[2] < 1e-12 * s[0]
        assert np.abs((u[:, :4] * s) @ vh - a).max() < 1e-11
        assert np.abs(u.conj().T @ u - np.eye(4)).max() < 1e-12

    def test_zero_matrix(self):
        s, u, vh = jacobi_svd(np.zeros((3, 3), dtype=complex))
        assert np.all(s == 0)
        assert np.abs(u.conj().T @ u - np.eye(3)).max() < 1e-14

    def test_svd_at_constant_diag(self):
        f = MatrixFunction.constant(np.diag([3.0, 2.0, 0.0]))
        s, u, vh = svd_at(f, 0.123)
        assert np.abs(s - np.array([3.0, 2.0, 0.0])).max() < 1e-13

    def test_svd_at_rank_one_column(self):
        z = TrigPoly.zero()
        f = MatrixFunction([[z, TrigPoly.cosine()], [z, TrigPoly.sine()]])
        for x in [0.0, 0.2, 0.77]:
            s, _, _ = svd_at(f, x)
            assert abs(s[0] - 1.0) < 1e-13
            assert s[1] < 1e-14


class TestExteriorPower:
    def test_top_power_is_determinant(self):
        rng = np.random.default_rng(8)
        f = rand_matrix(rng, 3)
        top = exterior_power(f, 3)
        x = 0.29
        assert top.shape == (1, 1)
        assert abs(top.eval_mat(x)[0, 0] - np.linalg.det(f.eval_mat(x))) < 1e-9

    def test_first_power_is_identity_map(self):
        rng = np.random.default_rng(9)
        f = rand_matrix(rng, 3)
        e1 = exterior_power(f, 1)
        x = 0.64
        assert np.abs(e1.eval_mat(x) - f.eval_mat(x)).max() < 1e-14

    def test_multiplicativity(self):
        # ext_k(F G) = ext_k(F) ext_k(G), the workhorse identity behind
        # converting top-k exponent sums into top exponents
        rng = np.random.default_rng(10)
        f = rand_matrix(rng, 4, degree=1)
        g = rand_matrix(rng, 4, degree=1)
        lhs = exterior_power(f @ g, 2)
        rhs = exterior_power(f, 2) @ exterior_power(g, 2)
        x = 0.415
        scale = max(lhs.max_coeff(), 1.0)
        assert np.abs(lhs.eval_mat(x) - rhs.eval_mat(x)).max() < 1e-11 * scale

    def test_singular_value_product_identity(self):
        rng = np.random.default_rng(11)
        f = rand_matrix(rng, 4, degree=1)
        x = 0.3
        s = np.linalg.svd(f.eval_mat(x), compute_uv=False)
        for k in range(1, 5):
            ek = exterior_power(f, k)
            s_top = np.linalg.svd(ek.eval_mat(x), compute_uv=False)[0]
            assert abs(s_top - np.prod(s[:k])) < 1e-9 * max(1.0, np.prod(s[:k]))

    def test_poly_det_matches_numeric(self):
        rng = np.random.default_rng(12)
        f = rand_matrix(rng, 4, degree=1)
        x = 0.77
        assert abs(poly_det(f).eval(x) - np.linalg.det(f.eval_mat(x))) < 1e-9


class TestMaxRank:
    def test_constant_diagonal(self):
        f = MatrixFunction.constant(np.diag([3.0, 2.0, 0.0]))
        r, exc = max_rank(f, M=64)
        assert r == 2
        assert exc == []

    def test_scalar_times_nilpotent_sees_vanishing(self):
        # rank 1 off the cosine zeros; those two grid points are exceptional
        z = TrigPoly.zero()
        f = MatrixFunction([[z, TrigPoly.cosine()], [z, z]])
        r, exc = max_rank(f, M=64)
        assert r == 1
        assert set(np.round(exc, 6)) == {0.25, 0.75}

    def test_nilpotent_3x3_rank_two_with_exceptional(self):
        r, exc = max_rank(nilpotent_3x3(), M=64)
        assert r == 2
        assert set(np.round(exc, 6)) == {0.25, 0.75}

    def test_exterior_square_of_rank_two(self):
        r, _ = max_rank(exterior_power(nilpotent_3x3(), 2), M=64)
        assert r == 1

    def test_zero_matrix_rank_zero(self):
        f = MatrixFunction.zero(3)
        r, exc = max_rank(f, M=16)
        assert r == 0 and exc == []


class TestGridMatrixFunction:
    @staticmethod
    def two_freq_samples(M):
        # rank-one 2x2 function of two angles, degree 1 in each variable
        a1, a2 = 0.6180339887498949, 0.41421356237309515
        xs = np.arange(M) / M
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        phi1 = np.sin(2 * np.pi * (X + a1))
        phi2 = np.sin(2 * np.pi * (Y + a2))
        psi1 = -np.sin(2 * np.pi * Y)
        psi2 = np.sin(2 * np.pi * X)
        samples = np.empty((M, M, 2, 2), dtype=complex)
        samples[..., 0, 0] = phi1 * psi1
        samples[..., 0, 1] = phi1 * psi2
        samples[..., 1, 0] = phi2 * psi1
        samples[..., 1, 1] = phi2 * psi2
        return GridMatrixFunction(samples)

    def test_interpolant_is_exact_off_grid(self):
        g = self.two_freq_samples(16)
        a1, a2 = 0.6180339887498949, 0.41421356237309515
        pt = (0.137, 0.529)
        val = g.eval_mat(pt)
        expect = np.array(
            [
                [
                    np.sin(2 * np.pi * (pt[0] + a1)) * -np.sin(2 * np.pi * pt[1]),
                    np.sin(2 * np.pi * (pt[0] + a1)) * np.sin(2 * np.pi * pt[0]),
                ],
                [
                    np.sin(2 * np.pi * (pt[1] + a2)) * -np.sin(2 * np.pi * pt[1]),
                    np.sin(2 * np.pi * (pt[1] + a2)) * np.sin(2 * np.pi * pt[0]),
                ],
            ],
            dtype=complex,
        )
        assert np.abs(val - expect).max() < 1e-12

    def test_max_rank_is_one(self):
        g = self.two_freq_samples(16)
        r, exc = max_rank(g)
        assert r == 1
        # the function vanishes entirely where both sines do
        assert len(exc) > 0

    def test_json_round_trip(self):
        g = self.two_freq_samples(8)
        back = GridMatrixFunction.from_json_dict(g.to_json_dict())
        assert np.abs(back.samples - g.samples).max() < 1e-14

    def test_power_of_two_enforced(self):
        with pytest.raises(ValueError):
            GridMatrixFunction(np.zeros((12, 12, 2, 2)))
