import numpy as np
import pytest

from hinfkit import (
    DimensionError,
    InvalidInputError,
    PoleAtEvaluationError,
    Polynomial,
    SingularMatrixError,
    eigenvalues,
    generalized_eigenvalues,
    pseudoinverse,
    rational_eval,
    spectral_norm,
)


def sorted_complex(values):
    return sorted(values, key=lambda z: (round(z.real, 8), round(z.imag, 8)))


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(np.eye(3)) == pytest.approx(1.0, abs=1e-14)

    def test_symmetric_2x2(self):
        # eigenvalues of [[1,1],[1,3]] are 2 +- sqrt(2) by the quadratic formula
        assert spectral_norm([[1.0, 1.0], [1.0, 3.0]]) == pytest.approx(2 + np.sqrt(2), rel=1e-12)

    def test_zero(self):
        assert spectral_norm(np.zeros((2, 4))) == 0.0

    def test_rejects_nan(self):
        with pytest.raises(InvalidInputError):
            spectral_norm([[np.nan, 0.0], [0.0, 1.0]])

    def test_unitary_invariance(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            m = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
            u, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
            v, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
            assert spectral_norm(u @ m @ v) == pytest.approx(spectral_norm(m), abs=1e-10)


class TestEigenvalues:
    def test_diagonal(self):
        ev = eigenvalues(np.diag([-1.0, -3.0, -2.0]))
        assert sorted(ev.real) == pytest.approx([-3.0, -2.0, -1.0])
        assert np.abs(ev.imag).max() == 0.0

    def test_triangular(self):
        ev = eigenvalues([[-2.0, 2.0], [0.0, -1.0]])
        assert sorted(ev.real) == pytest.approx([-2.0, -1.0])

    def test_companion_quadratic(self):
        # companion matrix of s^2 + s + 1; roots (-1 +- i sqrt(3)) / 2
        comp = np.array([[0.0, -1.0], [1.0, -1.0]])
        ev = sorted_complex(eigenvalues(comp))
        expected = sorted_complex([(-1 - 1j * np.sqrt(3)) / 2, (-1 + 1j * np.sqrt(3)) / 2])
        np.testing.assert_allclose(ev, expected, atol=1e-12)

    def test_non_square_rejected(self):
        with pytest.raises(DimensionError):
            eigenvalues(np.ones((2, 3)))

    def test_similarity_invariance_under_permutation(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            m = rng.standard_normal((6, 6))
            P = np.eye(6)[rng.permutation(6)]
            ours = sorted_complex(eigenvalues(m))
            theirs = sorted_complex(eigenvalues(P @ m @ P.T))
            np.testing.assert_allclose(ours, theirs, atol=1e-8)


class TestGeneralizedEigenvalues:
    def test_diagonal_pair(self):
        ev = generalized_eigenvalues(np.diag([-2.0, -4.0]), np.diag([2.0, 2.0]))
        assert sorted(ev.real) == pytest.approx([-2.0, -1.0])

    def test_identity_reduces_to_ordinary(self):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((5, 5))
        ours = sorted_complex(generalized_eigenvalues(m, np.eye(5)))
        plain = sorted_complex(eigenvalues(m))
        np.testing.assert_allclose(ours, plain, atol=1e-10)

    def test_closed_loop_pencil(self):
        # A + B B^T A^{-T} for the asymmetric chain at a = 1 is triangular
        ev = generalized_eigenvalues([[-2.0, 1.0], [0.0, -1.0]], np.eye(2))
        assert sorted(ev.real) == pytest.approx([-2.0, -1.0])

    def test_singular_pencil_reports_rcond(self):
        with pytest.raises(SingularMatrixError) as err:
            generalized_eigenvalues(np.eye(2), np.diag([1.0, 0.0]))
        assert err.value.rcond == 0.0

    def test_ill_conditioned_pencil_takes_qz_route(self):
        # cond(e) = 1e9 exceeds the reduction threshold but e is invertible
        ev = generalized_eigenvalues(np.diag([-1.0, -2.0]), np.diag([1.0, 1e-9]))
        assert sorted(ev.real) == pytest.approx([-2e9, -1.0], rel=1e-9)


class TestPseudoinverse:
    def test_invertible_square(self):
        m = np.array([[2.0, 1.0], [0.0, 3.0]])
        np.testing.assert_allclose(pseudoinverse(m), np.linalg.inv(m), atol=1e-12)

    def test_row_vector(self):
        np.testing.assert_allclose(pseudoinverse([[1.0, -1.0]]), [[0.5], [-0.5]], atol=1e-14)

    def test_zero_matrix(self):
        out = pseudoinverse(np.zeros((2, 5)))
        assert out.shape == (5, 2)
        assert np.all(out == 0)

    def test_moore_penrose_identities(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            m = rng.standard_normal((5, 8)) + 1j * rng.standard_normal((5, 8))
            p = pseudoinverse(m)
            np.testing.assert_allclose(m @ p @ m, m, atol=1e-10)
            np.testing.assert_allclose(p @ m @ p, p, atol=1e-10)
            np.testing.assert_allclose((m @ p).conj().T, m @ p, atol=1e-10)
            np.testing.assert_allclose((p @ m).conj().T, p @ m, atol=1e-10)

    def test_full_row_rank_closed_form(self):
        # for full row rank m: m^+ = m^* (m m^*)^{-1}
        rng = np.random.default_rng(23)
        for _ in range(10):
            m = rng.standard_normal((3, 7)) + 1j * rng.standard_normal((3, 7))
            closed = m.conj().T @ np.linalg.inv(m @ m.conj().T)
            np.testing.assert_allclose(pseudoinverse(m), closed, atol=1e-10)


class TestRationalEval:
    def test_polynomial_value(self):
        assert rational_eval([4.0, 4.0, 1.0], [1.0], 0.0) == pytest.approx(4.0)

    def test_linear_at_j(self):
        assert rational_eval([1.0, 1.0], [1.0], 1j) == pytest.approx(1 + 1j)

    def test_reciprocal(self):
        assert rational_eval([1.0], [0.0, 1.0], 2j) == pytest.approx(-0.5j)

    def test_pole_detected(self):
        with pytest.raises(PoleAtEvaluationError):
            rational_eval([1.0], [0.0, 1.0], 0.0)


class TestPolynomial:
    def test_trailing_zeros_trimmed(self):
        p = Polynomial([1.0, 2.0, 0.0, 0.0])
        assert p.degree == 1

    def test_zero_polynomial(self):
        p = Polynomial([0.0, 0.0])
        assert p.is_zero() and p.degree == 0

    def test_arithmetic(self):
        p = Polynomial([1.0, 1.0])  # 1 + s
        q = Polynomial([2.0, 1.0])  # 2 + s
        assert (p * q).coefficients.tolist() == [2.0, 3.0, 1.0]
        assert (p + q).coefficients.tolist() == [3.0, 2.0]
        assert (q - p).coefficients.tolist() == [1.0]
