"""Dense complex linear algebra and exact propagator oracles.

Everything downstream (method simulators, error-budget checks, acceptance
tests) compares against the propagators computed here. H_eff = H_R + i*H_I
with H_R Hermitian and H_I Hermitian PSD; the non-unitary propagator is
e^{-i H_eff T} and factorizes as e^{-i H_R T} V(T) with V solving
dV/dt = Htilde(t) V, Htilde(t) = e^{i H_R t} H_I e^{-i H_R t}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from biqsp.errors import ValidationError

_HERM_TOL = 1e-12


def _as_square(A):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"expected square matrix, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValidationError("non-finite matrix entries")
    return A


def hermitian_eigendecompose(H):
    """Eigendecomposition H = U diag(lam) U-dagger for Hermitian H.

    Returns (eigenvalues ascending, eigenvector matrix U)."""
    H = _as_square(H)
    scale = max(np.linalg.norm(H, 2), 1e-300)
    asym = np.max(np.abs(H - H.conj().T))
    if asym > _HERM_TOL * scale:
        raise ValidationError(
            f"matrix not Hermitian: max asymmetry {asym:.3e}")
    lam, U = np.linalg.eigh(H)
    return lam, U


def matrix_exponential(A):
    """e^A by scaling-and-squaring (Pade); Hermitian fast path via
    eigendecomposition."""
    A = _as_square(A)
    scale = max(float(np.max(np.abs(A))), 1e-300)
    if np.max(np.abs(A - A.conj().T)) <= 1e-13 * scale:
        lam, U = np.linalg.eigh(A)
        return (U * np.exp(lam)) @ U.conj().T
    return scipy.linalg.expm(A)


@dataclass(frozen=True)
class HamiltonianPair:
    """Hermitian H_R plus PSD H_I with recomputed operator norms."""

    H_R: np.ndarray = field(repr=False)
    H_I: np.ndarray = field(repr=False)
    alpha_R: float = 0.0
    beta_I: float = 0.0
    label: str = ""

    def __post_init__(self):
        HR = _as_square(self.H_R)
        HI = _as_square(self.H_I)
        if HR.shape != HI.shape:
            raise ValidationError("H_R and H_I dimension mismatch")
        for name, H in (("H_R", HR), ("H_I", HI)):
            scale = max(float(np.max(np.abs(H))), 1e-300)
            asym = np.max(np.abs(H - H.conj().T))
            if asym > _HERM_TOL * scale:
                raise ValidationError(
                    f"{name} not Hermitian: max asymmetry {asym:.3e}")
        lamI = np.linalg.eigvalsh((HI + HI.conj().T) / 2)
        nrmI = max(float(np.max(np.abs(lamI))), 1e-300)
        if lamI[0] < -_HERM_TOL * nrmI:
            raise ValidationError(
                f"H_I not PSD: min eigenvalue {lamI[0]:.3e}")
        lamR = np.linalg.eigvalsh((HR + HR.conj().T) / 2)
        # norms recomputed from eigenvalues; caller-supplied values are hints
        object.__setattr__(self, "H_R", HR)
        object.__setattr__(self, "H_I", HI)
        object.__setattr__(self, "alpha_R", float(np.max(np.abs(lamR))))
        object.__setattr__(self, "beta_I", float(np.max(np.abs(lamI))))

    @property
    def dim(self):
        return self.H_R.shape[0]

    def H_eff(self):
        return self.H_R + 1j * self.H_I

    def interaction_frame(self, t):
        """Htilde(t) = e^{i H_R t} H_I e^{-i H_R t} via exact
        eigendecomposition of H_R."""
        lam, U = np.linalg.eigh(self.H_R)
        phase = np.exp(1j * lam * t)
        return (U * phase) @ (U.conj().T @ self.H_I @ U) @ \
            (U.conj().T * phase.conj()[:, np.newaxis])

    def frame_unitary(self, t):
        """e^{-i H_R t} (the free Hermitian evolution)."""
        lam, U = np.linalg.eigh(self.H_R)
        return (U * np.exp(-1j * lam * t)) @ U.conj().T


def exact_propagator(pair: HamiltonianPair, T: float):
    """e^{-i(H_R + i H_I)T}; norm bounded by e^{beta_I T}."""
    if T < 0:
        raise ValidationError("T must be nonnegative")
    return matrix_exponential(-1j * T * pair.H_eff())


def interaction_propagator(pair: HamiltonianPair, T: float,
                           steps: int = 4096):
    """V(T) from dV/dt = Htilde(t) V, V(0) = I, by classical 4th-order
    Runge-Kutta with uniform step."""
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    n = pair.dim
    V = np.eye(n, dtype=complex)
    h = T / steps
    lam, U = np.linalg.eigh(pair.H_R)
    K = U.conj().T @ pair.H_I @ U

    def Ht(t):
        phase = np.exp(1j * lam * t)
        return (U * phase) @ K @ (U.conj().T * phase.conj()[:, np.newaxis])

    for k in range(steps):
        t = k * h
        A1 = Ht(t)
        A2 = Ht(t + h / 2)
        A4 = Ht(t + h)
        k1 = A1 @ V
        k2 = A2 @ (V + h / 2 * k1)
        k3 = A2 @ (V + h / 2 * k2)
        k4 = A4 @ (V + h * k3)
        V = V + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return V


def operator_norms(pair: HamiltonianPair):
    """(alpha_R, beta_I, numerical_abscissa); the abscissa of -iH_eff equals
    the top eigenvalue of H_I, which is beta_I for PSD H_I."""
    abscissa = float(np.linalg.eigvalsh(pair.H_I)[-1])
    return pair.alpha_R, pair.beta_I, abscissa


# -- JSON I/O ---------------------------------------------------------

def _matrix_to_json(A):
    return np.stack([A.real, A.imag], axis=-1).tolist()


def _matrix_from_json(rows):
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValidationError("matrix entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def pair_to_json_dict(pair: HamiltonianPair) -> dict:
    d = {"H_R": _matrix_to_json(pair.H_R), "H_I": _matrix_to_json(pair.H_I)}
    if pair.label:
        d["label"] = pair.label
    return d


def pair_from_json_dict(d: dict) -> HamiltonianPair:
    return HamiltonianPair(_matrix_from_json(d["H_R"]),
                           _matrix_from_json(d["H_I"]),
                           label=d.get("label", ""))


def save_pair(pair: HamiltonianPair, path) -> None:
    with open(path, "w") as fh:
        json.dump(pair_to_json_dict(pair), fh)


def load_pair(path) -> HamiltonianPair:
    with open(path) as fh:
        return pair_from_json_dict(json.load(fh))


# -- benchmark system -------------------------------------------------

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


def lindblad_benchmark_pair(J: float = 1.0, h: float = 0.5,
                            gamma: float = 0.3) -> HamiltonianPair:
    """Two-qubit transverse-field Ising H_R with amplitude-damping
    dissipators: H_R = J Z.Z + h(X.I + I.X), H_I = (gamma/2) sum L_k'L_k
    with L_k = sigma_minus on qubit k."""
    HR = J * np.kron(_Z, _Z) + h * (np.kron(_X, _I2) + np.kron(_I2, _X))
    sm = np.array([[0, 1], [0, 0]], dtype=complex)  # sigma_minus = |0><1|
    num = sm.conj().T @ sm
    HI = (gamma / 2) * (np.kron(num, _I2) + np.kron(_I2, num))
    return HamiltonianPair(HR, HI, label="lindblad-2q")


def random_pair(rng: np.random.Generator, dim: int,
                alpha: float = 1.0, beta: float = 0.5) -> HamiltonianPair:
    """Random Hermitian H_R (norm ~ alpha) and PSD H_I (norm ~ beta)."""
    A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    HR = (A + A.conj().T) / 2
    HR *= alpha / max(np.linalg.norm(HR, 2), 1e-300)
    B = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    HI = B @ B.conj().T
    HI *= beta / max(np.linalg.norm(HI, 2), 1e-300)
    return HamiltonianPair(HR, HI)
