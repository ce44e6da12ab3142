"""Hamiltonian-pair container, propagators, and serialization."""

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from biqsp import matops
from biqsp.errors import ValidationError


def _rng(seed=0):
    return np.random.default_rng(seed)


def random_hermitian(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2


class TestEigendecompose:
    def test_reconstruction(self):
        H = random_hermitian(_rng(1), 6)
        lam, U = matops.hermitian_eigendecompose(H)
        assert np.allclose((U * lam) @ U.conj().T, H, atol=1e-11)
        assert np.allclose(U.conj().T @ U, np.eye(6), atol=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            matops.hermitian_eigendecompose(np.array([[0.0, 1.0],
                                                      [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ValidationError):
            matops.hermitian_eigendecompose(np.zeros((2, 3)))


class TestMatrixExponential:
    def test_matches_scipy(self):
        rng = _rng(2)
        A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        assert np.allclose(matops.matrix_exponential(A),
                           scipy.linalg.expm(A), atol=1e-11)


class TestHamiltonianPair:
    def test_norms_are_spectral(self):
        rng = _rng(3)
        H_R = random_hermitian(rng, 4)
        B = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        H_I = B @ B.conj().T  # PSD
        pair = matops.HamiltonianPair(H_R=H_R, H_I=H_I)
        assert pair.alpha_R == pytest.approx(np.linalg.norm(H_R, 2))
        assert pair.beta_I == pytest.approx(np.linalg.norm(H_I, 2))

    def test_rejects_non_psd_dissipator(self):
        with pytest.raises(ValidationError):
            matops.HamiltonianPair(H_R=np.eye(2),
                                   H_I=np.diag([1.0, -0.1]))

    def test_lindblad_benchmark_values(self):
        pair = matops.lindblad_benchmark_pair()
        assert pair.dim == 4
        assert pair.alpha_R == pytest.approx(np.sqrt(2.0), abs=1e-10)
        assert pair.beta_I == pytest.approx(0.3, abs=1e-12)

    def test_random_pair_hits_requested_norms(self):
        pair = matops.random_pair(_rng(4), 8, alpha=2.5, beta=0.7)
        assert pair.alpha_R == pytest.approx(2.5, rel=1e-10)
        assert pair.beta_I == pytest.approx(0.7, rel=1e-10)


class TestPropagators:
    def test_exact_propagator_is_expm(self):
        pair = matops.lindblad_benchmark_pair()
        T = 0.8
        expected = scipy.linalg.expm(-1j * T * (pair.H_R + 1j * pair.H_I))
        assert np.allclose(matops.exact_propagator(pair, T), expected,
                           atol=1e-11)

    def test_interaction_frame_factorization(self):
        # e^{-i H_eff T} = e^{-i H_R T} V(T) with V the frame propagator
        pair = matops.lindblad_benchmark_pair()
        T = 1.0
        V = matops.interaction_propagator(pair, T, steps=8192)
        lhs = matops.exact_propagator(pair, T)
        rhs = pair.frame_unitary(T) @ V
        assert np.linalg.norm(lhs - rhs, 2) < 1e-6

    def test_frame_hamiltonian_is_hermitian_conjugation(self):
        pair = matops.lindblad_benchmark_pair()
        t = 0.37
        Ht = pair.interaction_frame(t)
        U = scipy.linalg.expm(1j * t * pair.H_R)
        assert np.allclose(Ht, U @ pair.H_I @ U.conj().T, atol=1e-11)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10 ** 6), T=st.floats(0.05, 2.0))
    def test_propagator_norm_bounded_by_amplification(self, seed, T):
        # e^{-i(H_R + i H_I)T} grows at most like e^{beta_I T} and the
        # e^{-beta_I T}-normalized propagator is a contraction
        pair = matops.random_pair(np.random.default_rng(seed), 4,
                                  alpha=1.0, beta=0.5)
        nrm = np.linalg.norm(matops.exact_propagator(pair, T), 2)
        assert nrm <= np.exp(pair.beta_I * T) * (1 + 1e-10)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        pair = matops.random_pair(_rng(5), 3, alpha=1.2, beta=0.4)
        path = tmp_path / "pair.json"
        matops.save_pair(pair, path)
        back = matops.load_pair(path)
        assert np.allclose(back.H_R, pair.H_R)
        assert np.allclose(back.H_I, pair.H_I)
        assert back.label == pair.label
