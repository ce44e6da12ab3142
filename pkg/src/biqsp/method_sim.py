"""Dense-matrix simulation of the propagation methods.

Everything here runs against small dense matrices so that each method's
error can be measured exactly: Lorentzian integral segments, the
truncated-Taylor (Dyson LCU) product, the bare midpoint product, the
telescoping identity behind repeated postselection, and the postselection
ceiling P <= e^{-2 beta_I T} ||e^{-i H_eff T} psi0||^2. Interaction-frame
conjugations e^{+/- i H_R t} are computed exactly by eigendecomposition so
that only the phenomenon under test contributes to the measured error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from biqsp import matops, specfun
from biqsp.errors import ValidationError

# calibration constants for the O(.) bounds, fitted once on a sweep of
# random 4x4 pairs and frozen (see the acceptance checks)
C_MAG = 1.0
C_2 = 1.0


@dataclass(frozen=True)
class MethodResult:
    approx_propagator: np.ndarray = field(repr=False)
    exact_reference: np.ndarray = field(repr=False)
    error_norm: float
    bound_predicted: float
    params_used: dict
    bound_applies: bool = True  # False when constants are fitted, not proven


def _midpoints(T: float, r: int):
    dt = T / r
    return dt, [(j + 0.5) * dt for j in range(r)]


def lorentzian_weights(gamma: float, s_max: float, Mpts: int):
    """Midpoint nodes s_k and weights ds * L_gamma(s_k) on
    [-s_max, s_max]."""
    if Mpts < 2:
        raise ValidationError("need Mpts >= 2")
    ds = 2.0 * s_max / Mpts
    s = -s_max + (np.arange(Mpts) + 0.5) * ds
    w = ds * gamma / (np.pi * (s ** 2 + gamma ** 2))
    return s, w


def lorentzian_segment(pair: matops.HamiltonianPair, tau_j: float,
                       dt: float, gamma: float, s_max: float,
                       Mpts: int) -> np.ndarray:
    """Midpoint discretization of the Lorentzian integral representation
    e^{-gamma A} = int L_gamma(s) e^{-i A s} ds with the spectral shift
    A = beta_I I - H(tilde)(tau_j) >= 0; with gamma = dt this
    approximates e^{-beta_I dt} e^{H(tilde)(tau_j) dt}."""
    Ht = pair.interaction_frame(tau_j)
    A = pair.beta_I * np.eye(pair.dim) - Ht
    lam, U = matops.hermitian_eigendecompose(A)
    s, w = lorentzian_weights(gamma, s_max, Mpts)
    # sum_k w_k e^{-i lam s_k} per eigenvalue, then rotate back
    phase = np.exp(-1j * np.outer(lam, s)) @ w
    return (U * phase) @ U.conj().T


def segment_error_bound(pair: matops.HamiltonianPair, dt: float,
                        gamma: float, s_max: float, Mpts: int) -> float:
    """tail + quadrature bound for one segment (operator norm)."""
    tail = specfun.lorentzian_tail_exact(gamma, s_max)
    # the curvature constant uses ||A|| <= beta_I for the shifted
    # generator A = beta_I I - H(tilde)
    quad = specfun.lorentzian_quadrature_bound(gamma, s_max, Mpts,
                                               pair.beta_I)
    return tail + quad


def lorentzian_method(pair: matops.HamiltonianPair, T: float, r: int,
                      disc) -> MethodResult:
    """Product of Lorentzian segments at midpoint times, in the frame
    e^{-i H_R T}, compared against e^{-beta_I T} times the exact
    propagator."""
    if r < 1:
        raise ValidationError("need r >= 1")
    s_max, Mpts = disc
    dt, taus = _midpoints(T, r)
    gamma = dt
    V = np.eye(pair.dim, dtype=complex)
    for tau in taus:  # later times act on the left
        V = lorentzian_segment(pair, tau, dt, gamma, s_max, Mpts) @ V
        nrm = np.linalg.norm(V, 2)
        if nrm > (1.0 + 1e-8):
            raise ValidationError(
                f"partial product norm {nrm:.6g} violates the "
                f"contraction property")
    approx = pair.frame_unitary(T) @ V
    exact = math.exp(-pair.beta_I * T) * matops.exact_propagator(pair, T)
    err = float(np.linalg.norm(approx - exact, 2))
    seg = segment_error_bound(pair, dt, gamma, s_max, Mpts)
    quad_mid = C_MAG * pair.alpha_R * pair.beta_I ** 2 * T ** 3 / r ** 2
    bound = r * seg + quad_mid
    return MethodResult(
        approx_propagator=approx, exact_reference=exact,
        error_norm=err, bound_predicted=float(bound),
        params_used={"r": r, "s_max": s_max, "Mpts": Mpts,
                     "gamma": gamma, "C_Mag": C_MAG},
        bound_applies=True)


def midpoint_propagator(pair: matops.HamiltonianPair, T: float,
                        r: int) -> np.ndarray:
    """prod_{j=r..1} expm(H(tilde)(tau_j) Delta) with tau_j the segment
    midpoints."""
    if r < 1:
        raise ValidationError("need r >= 1")
    dt, taus = _midpoints(T, r)
    V = np.eye(pair.dim, dtype=complex)
    for tau in taus:
        Ht = pair.interaction_frame(tau)
        lam, U = matops.hermitian_eigendecompose(Ht)
        V = (U * np.exp(lam * dt)) @ U.conj().T @ V
    return V


def dyson_lcu_propagator(pair: matops.HamiltonianPair, T: float, r: int,
                         M: int) -> MethodResult:
    """prod_j [sum_{m<=M} (H(tilde)(tau_j) Delta)^m / m!] against the
    RK4 interaction propagator."""
    if r < 1 or M < 0:
        raise ValidationError("need r >= 1, M >= 0")
    dt, taus = _midpoints(T, r)
    V = np.eye(pair.dim, dtype=complex)
    for tau in taus:
        Ht = pair.interaction_frame(tau) * dt
        term = np.eye(pair.dim, dtype=complex)
        seg = term.copy()
        for m in range(1, M + 1):
            term = term @ Ht / m
            seg = seg + term
        V = seg @ V
    exact = matops.interaction_propagator(pair, T)
    err = float(np.linalg.norm(V - exact, 2))
    c = pair.beta_I * dt
    tay = r * math.exp(specfun.log_poisson_term(c, M + 1)
                       + pair.beta_I * T) if c > 0 else 0.0
    quad = C_MAG * pair.alpha_R * pair.beta_I ** 2 * T ** 3 / r ** 2
    return MethodResult(
        approx_propagator=V, exact_reference=exact, error_norm=err,
        bound_predicted=float(tay + quad),
        params_used={"r": r, "M": M, "C_Mag": C_MAG},
        bound_applies=True)


def telescoping_check(M: np.ndarray, psi0: np.ndarray, K: int) -> float:
    """|prod_k ||M psi_k||^2 - ||M^K psi0||^2| for the renormalized chain
    psi_{k+1} = M psi_k / ||M psi_k||; exact identity, so the defect is
    machine precision."""
    M = np.asarray(M, dtype=complex)
    if np.linalg.norm(M, 2) > 1.0 + 1e-12:
        raise ValidationError("M must be a contraction")
    psi = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValidationError("psi0 must be normalized")
    if K < 1:
        raise ValidationError("need K >= 1")
    prod = 1.0
    cur = psi
    for _ in range(K):
        nxt = M @ cur
        nrm = float(np.linalg.norm(nxt))
        if nrm < 1e-300:
            raise ValidationError("chain hit the zero vector")
        prod *= nrm ** 2
        cur = nxt / nrm
    direct = float(np.linalg.norm(
        np.linalg.matrix_power(M, K) @ psi) ** 2)
    return abs(prod - direct)


def postselection_bound(pair: matops.HamiltonianPair, T: float,
                        psi0: np.ndarray) -> float:
    """Ceiling e^{-2 beta_I T} ||e^{-i H_eff T} psi0||^2 on ancilla
    postselection success."""
    psi0 = np.asarray(psi0, dtype=complex)
    U = matops.exact_propagator(pair, T)
    return float(math.exp(-2.0 * pair.beta_I * T)
                 * np.linalg.norm(U @ psi0) ** 2)


def barrier_check(pair: matops.HamiltonianPair, T: float,
                  psi0: np.ndarray, measured_P: float) -> float:
    """margin = bound - measured_P; a negative margin beyond -1e-10
    indicates a bug and raises."""
    if not (0.0 <= measured_P <= 1.0):
        raise ValidationError("measured_P must lie in [0, 1]")
    margin = postselection_bound(pair, T, psi0) - measured_P
    if margin < -1e-10:
        raise ValidationError(
            f"postselection ceiling violated by {-margin:.3e}; this "
            f"indicates an implementation bug")
    return float(margin)
