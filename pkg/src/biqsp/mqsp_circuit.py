"""Bivariate QSP circuit model.

A circuit is G = R_0 * prod_{j=1..d} A_{s(j)} R_j where R_k is the ancilla
rotation [[e^{i phi}cos theta, -sin theta], [sin theta, e^{-i phi}cos theta]]
and A_s is the signal operator, represented on the joint eigengrid as
diag(z_s, 1) with z_1 = e^{i theta_1}, z_2 = e^{i theta_2}. The (0,0) block P
and (1,0) block Q are analytic bivariate polynomials on windows
[0, dR] x [0, dI] satisfying |P|^2 + |Q|^2 = 1 pointwise on the bitorus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from biqsp import bilaurent as bl
from biqsp import matops
from biqsp.errors import ValidationError


@dataclass(frozen=True)
class Schedule:
    """Query ordering: a sequence over {R, I} (frame vs dissipative)."""

    entries: tuple[str, ...]

    def __post_init__(self):
        ent = tuple(self.entries)
        if any(e not in ("R", "I") for e in ent):
            raise ValidationError(f"schedule entries must be R or I: {ent}")
        object.__setattr__(self, "entries", ent)

    @property
    def dR(self):
        return sum(1 for e in self.entries if e == "R")

    @property
    def dI(self):
        return sum(1 for e in self.entries if e == "I")

    def __len__(self):
        return len(self.entries)

    def as_string(self):
        return "".join(self.entries)

    @staticmethod
    def from_string(s: str) -> "Schedule":
        return Schedule(tuple(s))


@dataclass(frozen=True)
class CircuitSpec:
    """Schedule plus angle sequence (theta_k, phi_k), k = 0..d."""

    schedule: Schedule
    angles: np.ndarray = field(repr=False)  # shape (d+1, 2)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.angles, dtype=float))
        if a.shape != (len(self.schedule) + 1, 2):
            raise ValidationError(
                f"angle count {a.shape} must be (schedule length + 1, 2) = "
                f"({len(self.schedule) + 1}, 2)")
        object.__setattr__(self, "angles", a)

    @property
    def depth(self):
        return len(self.schedule)


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    e = np.exp(1j * phi)
    return np.array([[e * c, -s], [s, np.conj(e) * c]], dtype=complex)


def evaluate_circuit_grid(spec: CircuitSpec, N1: int, N2: int):
    """(P_grid, Q_grid) on the N1 x N2 bitorus grid.

    Vectorized 2x2 chain product: M <- M @ diag(z_s, 1) @ R_j per step."""
    z1 = np.exp(2j * np.pi * np.arange(N1) / N1)[:, None]
    z2 = np.exp(2j * np.pi * np.arange(N2) / N2)[None, :]
    M = np.broadcast_to(rotation_matrix(*spec.angles[0]),
                        (N1, N2, 2, 2)).copy()
    for j, s in enumerate(spec.schedule.entries, start=1):
        z = z1 if s == "R" else z2
        M[..., :, 0] *= z[..., None]
        R = rotation_matrix(*spec.angles[j])
        M = M @ R
    return (bl.TorusGrid(N1, N2, M[..., 0, 0]),
            bl.TorusGrid(N1, N2, M[..., 1, 0]))


def circuit_polynomials(spec: CircuitSpec):
    """(P, Q) as analytic polynomials on windows [0, dR] x [0, dI]."""
    dR, dI = spec.schedule.dR, spec.schedule.dI
    N1, N2 = 2 * dR + 3, 2 * dI + 3
    Pg, Qg = evaluate_circuit_grid(spec, N1, N2)
    P = bl.coefficients_from_grid(Pg, (0, dR), (0, dI))
    Q = bl.coefficients_from_grid(Qg, (0, dR), (0, dI))
    return P, Q


def unitarity_defect(spec: CircuitSpec, N1: int = 32, N2: int = 32) -> float:
    Pg, Qg = evaluate_circuit_grid(spec, N1, N2)
    return float(np.max(np.abs(np.abs(Pg.values) ** 2
                               + np.abs(Qg.values) ** 2 - 1.0)))


def success_probability(spec: CircuitSpec, pair: matops.HamiltonianPair,
                        T: float, psi0: np.ndarray, delta: float,
                        steps: int = 4096) -> float:
    """Ancilla postselection probability in the eigengrid model:
    (1-delta)^2 * ||V(T) psi0||^2 * e^{-2 beta_I T}."""
    psi0 = np.asarray(psi0, dtype=complex)
    nrm = np.linalg.norm(psi0)
    if abs(nrm - 1.0) > 1e-10:
        raise ValidationError("psi0 must be normalized")
    V = matops.interaction_propagator(pair, T, steps)
    surv = float(np.linalg.norm(V @ psi0) ** 2)
    return (1.0 - delta) ** 2 * surv * np.exp(-2.0 * pair.beta_I * T)


def build_walk_operator(H: np.ndarray, alpha: float) -> np.ndarray:
    """Qubitized walk operator W = (2 Pi - I) U for the one-ancilla block
    encoding U = [[A, sqrt(I - A^2)], [sqrt(I - A^2), -A]], A = H/alpha.

    Powers satisfy <0|W^n|0> = T_n(A) (Chebyshev)."""
    H = np.asarray(H, dtype=complex)
    lam, U = matops.hermitian_eigendecompose(H)
    if np.max(np.abs(lam)) > alpha * (1 + 1e-12):
        raise ValidationError(
            f"||H|| = {np.max(np.abs(lam)):.6g} exceeds alpha = {alpha}")
    A = H / alpha
    lamA = lam / alpha
    sq = (U * np.sqrt(np.clip(1.0 - lamA ** 2, 0.0, None))) @ U.conj().T
    n = H.shape[0]
    W = np.zeros((2 * n, 2 * n), dtype=complex)
    W[:n, :n] = A
    W[:n, n:] = sq
    W[n:, :n] = -sq
    W[n:, n:] = A
    return W


# -- serialization ----------------------------------------------------

def spec_to_json_dict(spec: CircuitSpec) -> dict:
    return {
        "schedule": spec.schedule.as_string(),
        "angles": [[float(t), float(p)] for t, p in spec.angles],
    }


def spec_from_json_dict(d: dict) -> CircuitSpec:
    return CircuitSpec(Schedule.from_string(d["schedule"]),
                       np.asarray(d["angles"], dtype=float))


def save_spec(spec: CircuitSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec_to_json_dict(spec), fh)


def load_spec(path) -> CircuitSpec:
    with open(path) as fh:
        return spec_from_json_dict(json.load(fh))


def random_spec(rng: np.random.Generator, schedule: Schedule,
                theta_range=(0.1, 1.4)) -> CircuitSpec:
    d = len(schedule)
    theta = rng.uniform(*theta_range, size=d + 1)
    phi = rng.uniform(-np.pi, np.pi, size=d + 1)
    return CircuitSpec(schedule, np.stack([theta, phi], axis=1))
