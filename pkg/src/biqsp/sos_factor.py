"""Complementary-polynomial machinery.

Given a real, nonnegative Laurent polynomial H on the bitorus (typically
H = 1 - |P_delta|^2), produce sets {Q_l} of analytic polynomials with
sum |Q_l|^2 = H: via a positive-semidefinite Gram matrix whose anti-diagonal
sums match the Fourier coefficients of H, via a degree-bounded matrix
Fejer-Riesz factorization (Bauer block-Toeplitz Cholesky), or — for
circuit-generated pairs — via the closed-form rank-2 complement.
Also hosts the moment-matrix diagnostics for scalar factorizability.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from biqsp import bilaurent as bl
from biqsp.errors import ValidationError

RANK_TOL = 1e-9  # numerical-rank threshold relative to lambda_max


def _real_symmetric_check(H: bl.BiLaurent, tol: float = 1e-10):
    """H real on the grid iff c_{-m,-n} = conj(c_{mn}) on a symmetric
    window. Returns (d1, d2) half-degrees."""
    # embed into the symmetric hull before checking; build the padded
    # array by hand so constructor tightening cannot hide asymmetry
    d1 = max(abs(H.window1[0]), abs(H.window1[1]))
    d2 = max(abs(H.window2[0]), abs(H.window2[1]))
    M = np.zeros((2 * d1 + 1, 2 * d2 + 1), dtype=complex)
    M[H.window1[0] + d1:H.window1[1] + d1 + 1,
      H.window2[0] + d2:H.window2[1] + d2 + 1] = H.coeffs
    dev = np.max(np.abs(M - np.conj(M[::-1, ::-1])))
    scale = max(np.max(np.abs(M)), 1e-300)
    if dev > tol * scale:
        raise ValidationError(
            f"polynomial not real on the grid: symmetry defect {dev:.3e}")
    Hs = bl.BiLaurent((-d1, d1), (-d2, d2), M)
    # tightening of a symmetric array keeps the window symmetric
    return Hs, Hs.window1[1], Hs.window2[1]


def _hhat(Hs: bl.BiLaurent, k: int, l: int) -> complex:
    return Hs.coefficient(k, l)


@dataclass(frozen=True)
class MomentMatrix:
    """Two-level Toeplitz matrix M_{(m,n),(m',n')} = Hhat_{m-m', n-n'}
    over monomial exponents (m, n) in [0, d1] x [0, d2]."""

    d1: int
    d2: int
    entries: np.ndarray = field(repr=False)

    @property
    def dims(self):
        return (self.d1 + 1) * (self.d2 + 1)

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.entries)

    def numerical_rank(self, tol: float = RANK_TOL) -> int:
        lam = self.eigenvalues()
        lmax = max(float(lam[-1]), 1e-300)
        return int(np.sum(lam > tol * lmax))


@dataclass(frozen=True)
class SOSDecomposition:
    """Terms Q_l with sum |Q_l|^2 = H up to the grid residual."""

    terms: tuple[bl.BiLaurent, ...]
    residual: float
    method: str = ""

    @property
    def L(self):
        return len(self.terms)


def _grid_residual(H: bl.BiLaurent, terms, N1=None, N2=None) -> float:
    span1 = max([H.span1] + [2 * t.span1 for t in terms])
    span2 = max([H.span2] + [2 * t.span2 for t in terms])
    if N1 is None:
        N1 = max(2 * span1, 32)
    if N2 is None:
        N2 = max(2 * span2, 32)
    acc = bl.evaluate_grid(H, N1, N2).values.real.astype(float)
    for t in terms:
        acc = acc - np.abs(bl.evaluate_grid(t, N1, N2).values) ** 2
    return float(np.max(np.abs(acc)))


def moment_matrix(H: bl.BiLaurent) -> MomentMatrix:
    Hs, d1, d2 = _real_symmetric_check(H)
    n = (d1 + 1) * (d2 + 1)
    M = np.zeros((n, n), dtype=complex)
    for m in range(d1 + 1):
        for nn in range(d2 + 1):
            i = m * (d2 + 1) + nn
            for mp in range(d1 + 1):
                for np_ in range(d2 + 1):
                    j = mp * (d2 + 1) + np_
                    M[i, j] = _hhat(Hs, m - mp, nn - np_)
    return MomentMatrix(d1, d2, (M + M.conj().T) / 2)


# -- Gram-matrix SOS --------------------------------------------------

def _diff_classes(d1: int, d2: int):
    """Vectorized bookkeeping for the exponent-difference classes of the
    Gram matrix: flat index pairs, a class id per pair, and class sizes."""
    m = np.arange(d1 + 1)
    n = np.arange(d2 + 1)
    M, N = np.meshgrid(m, n, indexing="ij")
    flat_m = M.ravel()
    flat_n = N.ravel()
    nn = flat_m.size
    I, J = np.meshgrid(np.arange(nn), np.arange(nn), indexing="ij")
    dk = flat_m[I] - flat_m[J]  # in [-d1, d1]
    dl = flat_n[I] - flat_n[J]
    class_id = ((dk + d1) * (2 * d2 + 1) + (dl + d2)).ravel()
    counts = np.bincount(class_id, minlength=(2 * d1 + 1) * (2 * d2 + 1))
    keys = [(k, l) for k in range(-d1, d1 + 1) for l in range(-d2, d2 + 1)]
    return class_id, counts, keys, (I.ravel(), J.ravel())


def _project_affine(G, structure, target_vec):
    """Shift each difference class uniformly so its sum matches the
    target Fourier coefficient (least-norm affine projection)."""
    class_id, counts, _keys, (I, J) = structure
    vals = G[I, J]
    sums = np.bincount(class_id, weights=vals.real,
                       minlength=counts.size).astype(complex)
    sums += 1j * np.bincount(class_id, weights=vals.imag,
                             minlength=counts.size)
    corr = np.where(counts > 0, (target_vec - sums)
                    / np.maximum(counts, 1), 0.0)
    out = G.copy()
    np.add.at(out, (I, J), corr[class_id])
    return (out + out.conj().T) / 2


def sos_from_moment(H: bl.BiLaurent, tol: float = RANK_TOL,
                    max_iters: int = 30000) -> SOSDecomposition:
    """SOS terms from a PSD Gram matrix whose anti-diagonal sums equal the
    Fourier coefficients of H, found by alternating projections between
    the PSD cone and the affine matching constraint."""
    Hs, d1, d2 = _real_symmetric_check(H)
    gmin = float(np.min(bl.evaluate_grid(
        Hs, max(4 * Hs.span1, 32), max(4 * Hs.span2, 32)).values.real))
    if gmin < -max(tol, 1e-10) * max(Hs.max_coeff(), 1e-300):
        raise ValidationError(
            f"polynomial indefinite on the grid: min value {gmin:.3e}")
    structure = _diff_classes(d1, d2)
    target_vec = np.array([_hhat(Hs, *key) for key in structure[2]],
                          dtype=complex)
    n = (d1 + 1) * (d2 + 1)
    G = _project_affine(np.zeros((n, n), dtype=complex), structure,
                        target_vec)
    scale = max(Hs.max_coeff(), 1e-300)
    for _ in range(max_iters):
        lam, U = np.linalg.eigh(G)
        if lam[0] >= -1e-13 * max(lam[-1], scale):
            break
        Gp = (U * np.clip(lam, 0.0, None)) @ U.conj().T
        G = _project_affine(Gp, structure, target_vec)
    lam, U = np.linalg.eigh((G + G.conj().T) / 2)
    lam = np.clip(lam, 0.0, None)
    lmax = max(float(lam[-1]), 1e-300)
    terms = []
    for idx in range(n):
        if lam[idx] > tol * lmax:
            vec = np.sqrt(lam[idx]) * U[:, idx]
            coeffs = vec.reshape(d1 + 1, d2 + 1)
            terms.append(bl.BiLaurent((0, d1), (0, d2), coeffs))
    res = _grid_residual(Hs, terms)
    return SOSDecomposition(tuple(terms), res, method="gram-projection")


# -- matrix Fejer-Riesz ----------------------------------------------

def _reorganize(Hs: bl.BiLaurent, d1: int, d2: int, which_var: int):
    """Matrix coefficients C_k of the matrix-valued univariate trig
    polynomial C(theta) = sum_k C_k e^{ik theta} with
    f(theta_mat)' C(theta_uni) f(theta_mat) = H; the Toeplitz diagonals
    carry Hhat normalized by the diagonal multiplicity."""
    if which_var == 1:
        dm, du = d1, d2
        hh = lambda j, k: _hhat(Hs, j, k)
    else:
        dm, du = d2, d1
        hh = lambda j, k: _hhat(Hs, k, j)
    s = dm + 1
    C = np.zeros((2 * du + 1, s, s), dtype=complex)
    for k in range(-du, du + 1):
        for m in range(s):
            for mp in range(s):
                j = mp - m  # f' C f picks up e^{i (m'-m) theta}
                C[k + du, m, mp] = hh(j, k) / (s - abs(j))
    return C, dm, du


def _eval_matrix_poly(C, du, thetas):
    """C(theta_j) for each grid angle; C has shape (2*du+1, s, s)."""
    phases = np.exp(1j * np.outer(thetas, np.arange(-du, du + 1)))
    return np.einsum("jk,kab->jab", phases, C)


def _repair_psd(C, du, classes_targets, max_iters=200, grid=None):
    """Alternating projections: pointwise PSD on a theta-grid (then
    band-limit back to degree du) vs. the affine reconstruction
    constraint. Returns the repaired coefficients."""
    s = C.shape[1]
    N = grid or max(8 * (2 * du + 1), 32)
    thetas = 2 * np.pi * np.arange(N) / N
    targets, multip = classes_targets
    for _ in range(max_iters):
        vals = _eval_matrix_poly(C, du, thetas)
        lam = np.linalg.eigvalsh(vals)
        if lam.min() >= -1e-13 * max(lam.max(), 1e-300):
            break
        lamv, U = np.linalg.eigh(vals)
        lamv = np.clip(lamv, 0.0, None)
        vals = np.einsum("jab,jb,jcb->jac", U, lamv, U.conj())
        # band-limit: FFT over the grid, keep |k| <= du
        fhat = np.fft.fft(vals, axis=0) / N
        Cnew = np.zeros_like(C)
        for k in range(-du, du + 1):
            Cnew[k + du] = fhat[k % N]
        # re-impose the affine reconstruction constraint per diagonal
        for k in range(-du, du + 1):
            for j in range(-s + 1, s):
                idx = [(m, m + j) for m in range(max(0, -j), min(s, s - j))]
                cur = sum(Cnew[k + du][m, mp] for m, mp in idx)
                corr = (targets[(j, k)] - cur) / len(idx)
                for m, mp in idx:
                    Cnew[k + du][m, mp] += corr
        C = Cnew
    return C


def _scalar_fejer_riesz(c_arr, du):
    """Univariate spectral factor by roots: c(theta) = |g(z)|^2 with
    g analytic of degree du. c_arr holds c_{-du..du}. Robust to zeros on
    the unit circle (double roots split evenly)."""
    if du == 0:
        return np.array([[[np.sqrt(max(c_arr[0].real, 0.0))]]],
                        dtype=complex)
    # p(z) = z^du c(z): degree-2du polynomial, roots pair as (rho, 1/conj)
    p = c_arr[::-1]  # numpy poly order: highest degree first
    roots = np.roots(p)
    # circle zeros come as symmetric pairs rho(1 +/- eps): the angular part
    # is accurate, the radial split is the double-root artifact — snap it
    near = np.abs(np.abs(roots) - 1.0) < 1e-6
    roots[near] = roots[near] / np.abs(roots[near])
    order = np.argsort(np.abs(roots))
    roots = roots[order]
    inside = roots[:du]  # du smallest-modulus roots (circle pairs split)
    g = np.poly(inside)[::-1].astype(complex)  # ascending coefficients
    # normalize so mean |g|^2 matches mean c on a grid
    N = max(16 * du, 64)
    th = 2 * np.pi * np.arange(N) / N
    z = np.exp(1j * th)
    gv = sum(g[k] * z ** k for k in range(du + 1))
    cv = sum(c_arr[k + du] * z ** k for k in range(-du, du + 1)).real
    amp = np.sqrt(max(np.mean(np.clip(cv, 0, None)), 0.0)
                  / max(np.mean(np.abs(gv) ** 2), 1e-300))
    g = g * amp
    return np.array([[[gk]] for gk in g], dtype=complex)


def _bauer_factor(C, du, conv_tol=1e-12):
    """Spectral factor G(z) = sum_{k=0}^{du} G_k z^k with
    G(z)' G(z) = C(theta), via Cholesky of block-Toeplitz sections of
    increasing (capped) size; the interior rows converge to G."""
    s = C.shape[1]
    if s == 1:
        return _scalar_fejer_riesz(C[:, 0, 0], du)
    bandwidth = 2 * du + 1
    prev = None
    best = None
    for N in (max(4 * bandwidth, 16), max(8 * bandwidth, 32),
              max(16 * bandwidth, 64), max(32 * bandwidth, 128)):
        T = np.zeros((N * s, N * s), dtype=complex)
        for i in range(N):
            for k in range(-du, du + 1):
                j = i + k
                if 0 <= j < N:
                    T[i * s:(i + 1) * s, j * s:(j + 1) * s] = C[k + du]
        jitter = 0.0
        for _try in range(10):
            try:
                L = np.linalg.cholesky(T + jitter * np.eye(N * s))
                break
            except np.linalg.LinAlgError:
                jitter = max(jitter * 100, 1e-14 * np.abs(T).max())
        else:
            raise ValidationError("block-Toeplitz matrix not PSD")
        R = L.conj().T  # T = R' R, R upper triangular
        i0 = N // 2
        G = np.stack(
            [R[i0 * s:(i0 + 1) * s, (i0 + k) * s:(i0 + k + 1) * s]
             for k in range(du + 1)])
        best = G
        if prev is not None and float(np.max(np.abs(G - prev))) < conv_tol:
            return G
        prev = G
    return best


def matrix_fejer_riesz(H: bl.BiLaurent, which_var: int,
                       tol: float = RANK_TOL) -> SOSDecomposition:
    """Degree-bounded SOS with at most d_which + 1 terms via operator
    Fejer-Riesz factorization of the matrix-valued reorganization of H.

    Requires H strictly positive on the grid (use delta-regularized
    inputs)."""
    if which_var not in (1, 2):
        raise ValidationError("which_var must be 1 or 2")
    Hs, d1, d2 = _real_symmetric_check(H)
    gmin = float(np.min(bl.evaluate_grid(
        Hs, max(4 * Hs.span1, 32), max(4 * Hs.span2, 32)).values.real))
    if gmin < -1e-10 * max(Hs.max_coeff(), 1e-300):
        raise ValidationError(
            f"matrix_fejer_riesz needs a nonnegative input; min grid value "
            f"{gmin:.3e} (delta-regularize first)")
    C, dm, du = _reorganize(Hs, d1, d2, which_var)
    s = dm + 1
    targets = {}
    for k in range(-du, du + 1):
        for j in range(-s + 1, s):
            targets[(j, k)] = (_hhat(Hs, j, k) if which_var == 1
                               else _hhat(Hs, k, j))
    C = _repair_psd(C, du, (targets, None))
    G = _bauer_factor(C, du)
    terms = []
    for alpha in range(s):
        if which_var == 1:
            coeffs = np.array([[G[k][alpha, m] for k in range(du + 1)]
                               for m in range(s)])
            term = bl.BiLaurent((0, d1), (0, d2), coeffs)
        else:
            coeffs = np.array([[G[k2][alpha, m] for m in range(s)]
                               for k2 in range(du + 1)])
            term = bl.BiLaurent((0, d1), (0, d2), coeffs)
        if term.max_coeff() > np.sqrt(tol * max(Hs.max_coeff(), 1e-300)):
            terms.append(term)
    res = _grid_residual(Hs, terms)
    return SOSDecomposition(tuple(terms), res, method="matrix-fejer-riesz")


# -- rank-2 circuit complement ----------------------------------------

def rank2_complement(P_delta: bl.BiLaurent, Q_circuit: bl.BiLaurent,
                     delta: float) -> SOSDecomposition:
    """For circuit-generated (P, Q) with |P|^2 + |Q|^2 = 1 and
    P_delta = (1-delta) P, the complement of 1 - |P_delta|^2 is exactly
    the pair {sqrt(2 delta - delta^2), (1-delta) Q}."""
    if not (0 <= delta < 1):
        raise ValidationError("delta must be in [0,1)")
    scale = 1.0 - delta
    P = P_delta.scale(1.0 / scale) if scale > 0 else P_delta
    N1 = max(2 * (P.span1 + Q_circuit.span1), 32)
    N2 = max(2 * (P.span2 + Q_circuit.span2), 32)
    unit = (np.abs(bl.evaluate_grid(P, N1, N2).values) ** 2
            + np.abs(bl.evaluate_grid(Q_circuit, N1, N2).values) ** 2)
    defect = float(np.max(np.abs(unit - 1.0)))
    if defect > 1e-10:
        raise ValidationError(
            f"(P, Q) not circuit-unitary: max defect {defect:.3e}")
    terms = []
    const = np.sqrt(max(2.0 * delta - delta ** 2, 0.0))
    if const > 0:
        terms.append(bl.BiLaurent.constant(const))
    terms.append(Q_circuit.scale(1.0 - delta))
    one_minus = bl.BiLaurent.constant(1.0) - bl.abs_squared(P_delta)
    res = _grid_residual(one_minus, terms, N1, N2)
    return SOSDecomposition(tuple(terms), res, method="rank2-circuit")


# -- scalar factorizability -------------------------------------------

def _track_root_curves(coefmat, lo, hi, N):
    """Roots of the z1-slice polynomial as continuous curves over the
    theta2 circle.

    Matches the root set of each slice to a linear extrapolation of the
    previous two slices (velocity prediction), which follows each curve
    transversally through unit-circle crossings where a root meets its
    conjugate reflection."""
    prev = prev2 = None
    out = []
    for k in range(N):
        th = 2 * np.pi * k / N
        c = coefmat @ np.exp(1j * th * np.arange(lo, hi + 1))
        rts = np.roots(c[::-1])
        if prev is None:
            rts = rts[np.argsort(np.abs(rts))]
        else:
            pred = prev if prev2 is None else 2 * prev - prev2
            newr = np.empty_like(rts)
            D = np.abs(rts[None, :] - pred[:, None])
            for _ in range(len(rts)):
                i, j = np.unravel_index(np.argmin(D), D.shape)
                newr[i] = rts[j]
                D[i, :] = np.inf
                D[:, j] = np.inf
            rts = newr
        out.append(rts)
        prev2, prev = prev, rts
    return np.array(out)


def _reflection_pairs(R):
    """Group tracked curves into (rho, 1/conj(rho)) partner pairs by
    mean distance to the reflected curves."""
    refl = 1.0 / np.conj(R)
    unpaired = list(range(R.shape[1]))
    pairs = []
    while unpaired:
        i = unpaired.pop(0)
        dists = [np.mean(np.abs(R[:, j] - refl[:, i])) for j in unpaired]
        j = unpaired.pop(int(np.argmin(dists)))
        pairs.append((i, j))
    return pairs


def _curve_candidates(Hs, d1, d2, Ns, max_flip=5):
    """Candidate analytic factors of Hs = |Q|^2 from its root curves.

    A valid factor selects one member of each reflection pair of z1-root
    curves; the remaining freedom is the leading z1-coefficient lead(z2),
    recovered up to reflection flips of its own roots from its known
    modulus |lead|^2 on the circle. Both binary choices are enumerated
    (up to 2^max_flip each) and every candidate is scored by the energy
    fraction of its coefficients inside the analytic (0,d1)x(0,d2)
    window. Returns (score, coeff-array) sorted best first."""
    lo2, hi2 = Hs.window2
    du = Hs.window1[1]
    R = _track_root_curves(Hs.coeffs, lo2, hi2, Ns)
    pairs = _reflection_pairs(R)
    if len(pairs) <= max_flip:
        sels = list(itertools.product((0, 1), repeat=len(pairs)))
    else:
        sels = [tuple([0] * len(pairs))]
    ths = 2 * np.pi * np.arange(Ns) / Ns
    Nz = max(8 * (du + 1), 32)
    z = np.exp(1j * 2 * np.pi * np.arange(Nz) / Nz)
    hv = []
    for k in range(Ns):
        c = Hs.coeffs @ np.exp(1j * ths[k] * np.arange(lo2, hi2 + 1))
        hv.append(np.real(np.polyval(c[::-1], z) / z ** du))
    idxW = np.ix_(np.arange(d1 + 1) % Nz, np.arange(d2 + 1) % Ns)
    cand = []
    for sel in sels:
        monics = []
        amp2 = np.empty(Ns)
        ok = True
        for k in range(Ns):
            chosen = [R[k, p[s]] for p, s in zip(pairs, sel)]
            mp = np.poly(chosen)
            m2 = np.mean(np.abs(np.polyval(mp, z)) ** 2)
            if m2 < 1e-280:
                ok = False
                break
            monics.append(mp)
            amp2[k] = max(np.mean(np.clip(hv[k], 0, None)), 0.0) / m2
        if not ok:
            continue
        # |lead|^2 is a degree-d2 trig polynomial; factor it by root
        # flips of its Laurent representation
        F = np.fft.fft(amp2) / Ns
        cc = np.concatenate([F[Ns - d2:], F[:d2 + 1]]) if d2 > 0 \
            else F[:1]
        rts = np.roots(cc[::-1]) if len(cc) > 1 else np.array([])
        if len(rts):
            rp = []
            un = list(range(len(rts)))
            while un:
                i = un.pop(0)
                dists = [abs(rts[j] - 1 / np.conj(rts[i])) for j in un]
                j = un.pop(int(np.argmin(dists)))
                rp.append((i, j))
            if len(rp) <= max_flip:
                lsels = list(itertools.product((0, 1), repeat=len(rp)))
            else:
                lsels = [tuple([0] * len(rp))]
        else:
            rp = []
            lsels = [tuple()]
        mean_amp2 = float(np.mean(amp2))
        for lsel in lsels:
            if rp:
                lroots = [rts[p[s]] for p, s in zip(rp, lsel)]
                lead = np.polyval(np.poly(lroots), np.exp(1j * ths))
            else:
                lead = np.ones(Ns, dtype=complex)
            m2 = np.mean(np.abs(lead) ** 2)
            if m2 < 1e-280:
                continue
            lead = lead * np.sqrt(mean_amp2 / m2)
            Qg = np.empty((Nz, Ns), dtype=complex)
            for k in range(Ns):
                Qg[:, k] = np.polyval(monics[k], z) * lead[k]
            C2 = np.fft.fft2(Qg) / Qg.size
            win = float(np.sum(np.abs(C2[idxW]) ** 2)
                        / max(np.sum(np.abs(C2) ** 2), 1e-300))
            cand.append((win, C2[idxW].copy()))
    cand.sort(key=lambda t: -t[0])
    return cand


def scalar_factorization_feasible(H: bl.BiLaurent, tol: float = 1e-8,
                                  max_iters: int = 300,
                                  restarts: int = 8):
    """Decide whether H = |Q|^2 for a single analytic Q within the
    bidegree window. Returns (feasible, moment_rank).

    The decision is constructive: candidate factors are built from the
    reflection-pair structure of the z1-root curves (see
    _curve_candidates) at a ladder of slice resolutions and in both
    variable orientations, then polished by a quasi-Newton fit of the
    intensity residual. If no candidate fits, a best-of-restarts
    alternating-projection fallback (dominant moment eigenvector plus
    deterministic random draws) is tried. A sub-tolerance fit certifies
    feasibility; failure to fit is reported as infeasible, which is
    conservative — the bitorus phase-retrieval landscape is nonconvex
    and pathological inputs (e.g. many near-circle root curves) can be
    missed. The moment-matrix numerical rank is reported for diagnostics
    only (it exceeds 1 even on exactly factorizable inputs)."""
    from scipy.optimize import minimize
    Hs0, d1o, d2o = _real_symmetric_check(H)
    M = moment_matrix(Hs0)
    rank = M.numerical_rank()

    def attempt(Hs, d1, d2, seeds_coeffs, polish_budget):
        N1, N2 = max(8 * (d1 + 1), 32), max(8 * (d2 + 1), 32)
        Hg = bl.evaluate_grid(Hs, N1, N2).values.real
        scale = max(float(np.max(np.abs(Hg))), 1e-300)
        sh = (d1 + 1, d2 + 1)
        n = sh[0] * sh[1]
        idx = np.ix_(np.arange(d1 + 1) % N1, np.arange(d2 + 1) % N2)

        def cost_grad(x):
            C = (x[:n] + 1j * x[n:]).reshape(sh)
            Qg = bl.evaluate_grid(bl.BiLaurent((0, d1), (0, d2), C),
                                  N1, N2).values
            R = np.abs(Qg) ** 2 - Hg
            G = 4.0 * np.fft.ifft2(R * np.conj(Qg))[idx] / scale ** 2
            return (float(np.mean(R ** 2)) / scale ** 2,
                    np.concatenate([G.real.ravel(), -G.imag.ravel()]))

        best = np.inf
        for C0 in seeds_coeffs[:polish_budget]:
            x0 = np.concatenate([C0.real.ravel(), C0.imag.ravel()])
            r = minimize(cost_grad, x0, jac=True, method="L-BFGS-B",
                         options={"maxiter": 2000, "ftol": 1e-20,
                                  "gtol": 1e-16})
            C = (r.x[:n] + 1j * r.x[n:]).reshape(sh)
            res = _grid_residual(
                Hs, [bl.BiLaurent((0, d1), (0, d2), C)], N1, N2) / scale
            best = min(best, res)
            if best < tol / 4:
                break
        return best

    N1, N2 = max(8 * (d1o + 1), 32), max(8 * (d2o + 1), 32)
    Hg = bl.evaluate_grid(Hs0, N1, N2).values.real
    scale = max(float(np.max(np.abs(Hg))), 1e-300)
    if float(np.min(Hg)) < -1e-10 * scale:
        raise ValidationError("H must be nonnegative on the grid")

    HsT = bl.BiLaurent(Hs0.window2, Hs0.window1, Hs0.coeffs.T)
    best = np.inf
    for Ns, swap in ((256, False), (192, False), (256, True),
                     (384, False), (192, True)):
        Hs, d1, d2 = (HsT, d2o, d1o) if swap else (Hs0, d1o, d2o)
        cands = _curve_candidates(Hs, d1, d2, Ns)
        best = min(best, attempt(Hs, d1, d2,
                                 [C for _, C in cands], 10))
        if best < tol / 4:
            break

    if not best < tol:
        # fallback: alternating magnitude/analyticity projections from
        # spectral and random seeds, then the same polish
        mag = np.sqrt(np.clip(Hg, 0.0, None))
        sh = (d1o + 1, d2o + 1)
        idx = np.ix_(np.arange(d1o + 1) % N1, np.arange(d2o + 1) % N2)

        def alternate(C, iters):
            for _ in range(iters):
                Qg = bl.evaluate_grid(
                    bl.BiLaurent((0, d1o), (0, d2o), C), N1, N2).values
                phase = np.where(np.abs(Qg) > 1e-300,
                                 Qg / np.maximum(np.abs(Qg), 1e-300),
                                 1.0)
                C = (np.fft.fft2(mag * phase) / (N1 * N2))[idx]
            return C

        lam, U = np.linalg.eigh(M.entries)
        amp = np.sqrt(max(float(np.mean(Hg)), 0.0))
        seeds = [U[:, -1].reshape(sh) * amp]
        rng = np.random.default_rng(2718)
        n = sh[0] * sh[1]
        for _ in range(max(restarts - 1, 0)):
            seeds.append((rng.normal(size=sh)
                          + 1j * rng.normal(size=sh))
                         * amp / np.sqrt(2 * n))
        seeds = [alternate(C, max_iters) for C in seeds]
        best = min(best, attempt(Hs0, d1o, d2o, seeds, len(seeds)))
    return best < tol, rank
