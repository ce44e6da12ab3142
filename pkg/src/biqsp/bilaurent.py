"""Bivariate Laurent polynomials on the bitorus and the grid <-> coefficient
bridge.

A polynomial is stored as a dense complex coefficient array over an integer
index window [m_lo, m_hi] x [n_lo, n_hi]; evaluation and inversion go through
the 2D FFT. Windows are general (not forced symmetric) so the same type hosts
analytic polynomials on [0, d] and symmetric Laurent expansions on [-d, d].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve

from biqsp.errors import DegreeOverflowError, ValidationError

# coefficients below this magnitude are pruned on construction
PRUNE_TOL = 1e-14


@dataclass(frozen=True)
class TorusGrid:
    """Complex samples on the equispaced bitorus grid
    theta1 in {2*pi*j/N1}, theta2 in {2*pi*k/N2}."""

    N1: int
    N2: int
    values: np.ndarray  # shape (N1, N2)

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=complex))
        if v.shape != (self.N1, self.N2):
            raise ValidationError(
                f"grid shape {v.shape} != ({self.N1}, {self.N2})")
        object.__setattr__(self, "values", v)

    @property
    def theta1(self):
        return 2.0 * np.pi * np.arange(self.N1) / self.N1

    @property
    def theta2(self):
        return 2.0 * np.pi * np.arange(self.N2) / self.N2


def _tighten(window1, window2, coeffs):
    """Prune sub-threshold coefficients and shrink the window to the
    bounding box of what is left."""
    mask = np.abs(coeffs) > PRUNE_TOL
    if not mask.any():
        return (0, 0), (0, 0), np.zeros((1, 1), dtype=complex)
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    r0, r1 = rows[0], rows[-1]
    c0, c1 = cols[0], cols[-1]
    out = np.array(coeffs[r0:r1 + 1, c0:c1 + 1], dtype=complex)
    out[np.abs(out) <= PRUNE_TOL] = 0.0
    w1 = (window1[0] + int(r0), window1[0] + int(r1))
    w2 = (window2[0] + int(c0), window2[0] + int(c1))
    return w1, w2, out


@dataclass(frozen=True)
class BiLaurent:
    """P(z1, z2) = sum_{m,n} c_{mn} z1^m z2^n over the index window."""

    window1: tuple[int, int]
    window2: tuple[int, int]
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        w1 = (int(self.window1[0]), int(self.window1[1]))
        w2 = (int(self.window2[0]), int(self.window2[1]))
        if w1[0] > w1[1] or w2[0] > w2[1]:
            raise ValidationError(f"empty window {w1} x {w2}")
        if c.shape != (w1[1] - w1[0] + 1, w2[1] - w2[0] + 1):
            raise ValidationError(
                f"coeff shape {c.shape} does not match window {w1} x {w2}")
        if not np.isfinite(c).all():
            raise ValidationError("non-finite coefficients")
        w1, w2, c = _tighten(w1, w2, c)
        object.__setattr__(self, "window1", w1)
        object.__setattr__(self, "window2", w2)
        object.__setattr__(self, "coeffs", c)

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero():
        return BiLaurent((0, 0), (0, 0), np.zeros((1, 1)))

    @staticmethod
    def constant(c):
        return BiLaurent((0, 0), (0, 0), np.array([[c]], dtype=complex))

    @staticmethod
    def monomial(m, n, c=1.0):
        return BiLaurent((m, m), (n, n), np.array([[c]], dtype=complex))

    # -- basic structure ----------------------------------------------

    @property
    def span1(self):
        return self.window1[1] - self.window1[0] + 1

    @property
    def span2(self):
        return self.window2[1] - self.window2[0] + 1

    def coefficient(self, m, n):
        if (self.window1[0] <= m <= self.window1[1]
                and self.window2[0] <= n <= self.window2[1]):
            return complex(self.coeffs[m - self.window1[0],
                                       n - self.window2[0]])
        return 0.0 + 0.0j

    def is_zero(self):
        return not np.abs(self.coeffs).any()

    def norm2(self):
        """l2 coefficient norm = rms of |P| on any Nyquist grid (Parseval)."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def max_coeff(self):
        return float(np.max(np.abs(self.coeffs)))

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        if np.isscalar(other):
            other = BiLaurent.constant(other)
        w1 = (min(self.window1[0], other.window1[0]),
              max(self.window1[1], other.window1[1]))
        w2 = (min(self.window2[0], other.window2[0]),
              max(self.window2[1], other.window2[1]))
        c = np.zeros((w1[1] - w1[0] + 1, w2[1] - w2[0] + 1), dtype=complex)
        for p in (self, other):
            r = p.window1[0] - w1[0]
            s = p.window2[0] - w2[0]
            c[r:r + p.span1, s:s + p.span2] += p.coeffs
        return BiLaurent(w1, w2, c)

    def __sub__(self, other):
        if np.isscalar(other):
            other = BiLaurent.constant(other)
        return self + other.scale(-1.0)

    def scale(self, a):
        return BiLaurent(self.window1, self.window2, self.coeffs * a)

    def conjugate(self):
        """P*(z1, z2) with coefficients conj(c_{-m,-n}): the polynomial whose
        grid values are the complex conjugate of P's."""
        w1 = (-self.window1[1], -self.window1[0])
        w2 = (-self.window2[1], -self.window2[0])
        return BiLaurent(w1, w2, np.conj(self.coeffs[::-1, ::-1]))


def multiply(P: BiLaurent, Q: BiLaurent) -> BiLaurent:
    """Coefficient convolution; windows add."""
    c = convolve(P.coeffs, Q.coeffs, method="direct")
    w1 = (P.window1[0] + Q.window1[0], P.window1[1] + Q.window1[1])
    w2 = (P.window2[0] + Q.window2[0], P.window2[1] + Q.window2[1])
    return BiLaurent(w1, w2, c)


def abs_squared(P: BiLaurent) -> BiLaurent:
    """|P|^2 as a real-on-grid Laurent polynomial."""
    return multiply(P, P.conjugate())


def monomial_shift(P: BiLaurent, p1: int, p2: int) -> BiLaurent:
    """Multiply by z1^p1 z2^p2: pure index-window translation."""
    w1 = (P.window1[0] + p1, P.window1[1] + p1)
    w2 = (P.window2[0] + p2, P.window2[1] + p2)
    return BiLaurent(w1, w2, P.coeffs)


def evaluate_grid(P: BiLaurent, N1: int, N2: int) -> TorusGrid:
    """Sample P on the N1 x N2 bitorus grid via 2D inverse FFT.

    Requires N1 >= span1, N2 >= span2 (otherwise distinct modes alias)."""
    if N1 < P.span1 or N2 < P.span2:
        raise ValidationError(
            f"grid ({N1},{N2}) smaller than window spans "
            f"({P.span1},{P.span2}): modes would alias")
    embed = np.zeros((N1, N2), dtype=complex)
    m_idx = np.mod(np.arange(P.window1[0], P.window1[1] + 1), N1)
    n_idx = np.mod(np.arange(P.window2[0], P.window2[1] + 1), N2)
    embed[np.ix_(m_idx, n_idx)] = P.coeffs
    values = np.fft.ifft2(embed) * (N1 * N2)
    return TorusGrid(N1, N2, values)


def coefficients_from_grid(G: TorusGrid, window1, window2,
                           leak_tol: float = 1e-10) -> BiLaurent:
    """Invert evaluate_grid: recover coefficients in the given window.

    Raises DegreeOverflowError if spectral mass outside the window exceeds
    leak_tol (relative to the largest coefficient)."""
    N1, N2 = G.N1, G.N2
    if N1 < window1[1] - window1[0] + 1 or N2 < window2[1] - window2[0] + 1:
        raise ValidationError("grid smaller than requested window")
    chat = np.fft.fft2(G.values) / (N1 * N2)
    m_idx = np.mod(np.arange(window1[0], window1[1] + 1), N1)
    n_idx = np.mod(np.arange(window2[0], window2[1] + 1), N2)
    coeffs = chat[np.ix_(m_idx, n_idx)]
    outside = chat.copy()
    outside[np.ix_(m_idx, n_idx)] = 0.0
    leak = float(np.max(np.abs(outside))) if outside.size else 0.0
    scale = max(float(np.max(np.abs(chat))), 1.0)
    if leak > leak_tol * scale:
        raise DegreeOverflowError(
            f"spectral mass {leak:.3e} outside window "
            f"{tuple(window1)} x {tuple(window2)}", leaked_magnitude=leak)
    return BiLaurent(tuple(window1), tuple(window2), coeffs)


def leading_slice(P: BiLaurent, var: int) -> BiLaurent:
    """Coefficient slice at the top index of the chosen variable, as a
    univariate Laurent polynomial in the other variable."""
    if var == 1:
        row = P.coeffs[-1, :]
        return BiLaurent((0, 0), P.window2, row[np.newaxis, :])
    if var == 2:
        col = P.coeffs[:, -1]
        return BiLaurent(P.window1, (0, 0), col[:, np.newaxis])
    raise ValidationError(f"var must be 1 or 2, got {var}")


def sup_norm(P: BiLaurent, N1: int | None = None,
             N2: int | None = None) -> float:
    """max |P| on an oversampled grid (grid lower bound on the true sup).

    Defaults to 4x the window span per variable, minimum 16 points."""
    if N1 is None:
        N1 = max(4 * P.span1, 16)
    if N2 is None:
        N2 = max(4 * P.span2, 16)
    return float(np.max(np.abs(evaluate_grid(P, N1, N2).values)))


def parseval_check(P: BiLaurent, N1: int | None = None,
                   N2: int | None = None) -> float:
    """Relative gap between sum |c|^2 and the grid mean of |P|^2."""
    if N1 is None:
        N1 = max(P.span1, 4)
    if N2 is None:
        N2 = max(P.span2, 4)
    grid_mean = float(np.mean(np.abs(evaluate_grid(P, N1, N2).values) ** 2))
    coeff_sum = float(np.sum(np.abs(P.coeffs) ** 2))
    denom = max(coeff_sum, 1e-300)
    return abs(grid_mean - coeff_sum) / denom


# -- serialization ----------------------------------------------------

def to_json_dict(P: BiLaurent) -> dict:
    re_im = np.stack([P.coeffs.real, P.coeffs.imag], axis=-1)
    return {
        "window1": list(P.window1),
        "window2": list(P.window2),
        "coeffs": re_im.tolist(),
    }


def from_json_dict(d: dict) -> BiLaurent:
    arr = np.asarray(d["coeffs"], dtype=float)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValidationError("coeffs must be a 2D array of [re, im] pairs")
    return BiLaurent(tuple(d["window1"]), tuple(d["window2"]),
                     arr[..., 0] + 1j * arr[..., 1])


def save_json(P: BiLaurent, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_dict(P), fh)


def load_json(path) -> BiLaurent:
    with open(path) as fh:
        return from_json_dict(json.load(fh))
