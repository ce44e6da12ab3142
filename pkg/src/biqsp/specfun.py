"""Special functions and truncation-degree selectors.

Bessel J via Miller downward recurrence (series for small argument),
modified Bessel I via series, Lambert W via Newton, plus the selectors that
pick Jacobi-Anger degrees, Taylor orders, factorial-tail truncations, and
Chebyshev degrees for bounded exponentials. All factorials and powers are
handled in the log domain so selectors stay finite at beta*T ~ 700.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from biqsp.errors import ValidationError


@dataclass(frozen=True)
class TruncationChoice:
    """A selected truncation degree with its predicted error bound.

    degree is minimal for the named formula unless `repaired` notes that a
    closed-form value had to be bumped to pass the direct tail test."""

    degree: int
    predicted_error_bound: float
    formula_id: str
    repaired: bool = False


# -- Bessel J ---------------------------------------------------------

def _bessel_j_series(n: int, x: float) -> float:
    # sum_k (-1)^k (x/2)^{n+2k} / (k! (n+k)!)
    half = x / 2.0
    if half == 0.0:
        return 1.0 if n == 0 else 0.0
    term = half ** n / math.factorial(n)
    total = term
    k = 0
    while True:
        k += 1
        term *= -(half * half) / (k * (n + k))
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-320) or k > 400:
            return total


def _bessel_j_miller(n_max: int, x: float) -> list[float]:
    """J_0..J_n_max by downward recurrence normalized with
    J_0 + 2 sum J_{2k} = 1."""
    start = n_max + int(abs(x)) + 20
    start += int(15.0 * math.sqrt(n_max + abs(x) + 1.0))
    jp, j = 0.0, 1e-30
    out = [0.0] * (start + 1)
    out[start] = j
    for k in range(start - 1, -1, -1):
        jm = (2.0 * (k + 1) / x) * j - jp
        jp, j = j, jm
        out[k] = j
        if abs(j) > 1e250:  # rescale to avoid overflow
            out = [v / abs(j) for v in out]
            jp /= abs(j)
            j = out[k]
    norm = out[0] + 2.0 * sum(out[k] for k in range(2, start + 1, 2))
    return [v / norm for v in out[:n_max + 1]]


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for n >= 0, real x; relative accuracy ~1e-12 for |x| <= 50."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    sign = 1.0
    if x < 0:
        # J_n(-x) = (-1)^n J_n(x)
        x = -x
        sign = -1.0 if n % 2 else 1.0
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    # log-domain guard: for n far beyond the turning point the value
    # underflows; the envelope (e x / 2n)^n caps it
    if n > 2 and n > math.e * x:
        log_env = n * (math.log(math.e * x / 2.0) - math.log(n))
        if log_env < -600.0:
            return 0.0
    if x < 2.0:
        return sign * _bessel_j_series(n, x)
    return sign * _bessel_j_miller(n, x)[n]


def bessel_j_array(n_max: int, x: float) -> list[float]:
    """J_0(x) .. J_{n_max}(x)."""
    return [bessel_j(n, x) for n in range(n_max + 1)]


# -- Bessel I ---------------------------------------------------------

def bessel_i(n: int, x: float) -> float:
    """I_n(x) for n >= 0 by the ascending series
    sum_k (x/2)^{n+2k}/(k!(n+k)!), computed in log domain for large x."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    x = abs(x)  # I_n is even for integer n
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    half = x / 2.0
    log_term = n * math.log(half) - math.lgamma(n + 1)
    # sum in units of the first term to stay finite
    rel, term, k = 1.0, 1.0, 0
    while True:
        k += 1
        term *= (half * half) / (k * (n + k))
        rel += term
        if term < 1e-18 * rel or k > 5000:
            break
    log_val = log_term + math.log(rel)
    if log_val > 700.0:
        raise ValidationError("bessel_i overflow; use log-domain selectors")
    return math.exp(log_val)


def log_bessel_i(n: int, x: float) -> float:
    """log I_n(x), safe for large x."""
    x = abs(x)
    if x == 0.0:
        return 0.0 if n == 0 else -math.inf
    half = x / 2.0
    log_term = n * math.log(half) - math.lgamma(n + 1)
    # streaming log-sum-exp over the series terms; the raw terms overflow
    # a double already around x ~ 700
    lt, S, k = 0.0, 0.0, 0
    while True:
        k += 1
        lt += 2.0 * math.log(half) - math.log(k * (n + k))
        hi, lo = (S, lt) if S >= lt else (lt, S)
        S = hi + math.log1p(math.exp(lo - hi))
        if (k > half and lt < S - 45.0) or k > 200000:
            break
    return log_term + S


# -- Lambert W --------------------------------------------------------

def lambert_w(x: float) -> float:
    """Principal branch: w with w e^w = x, for x >= -1/e. Newton iteration
    from a log-seeded start."""
    if x < -1.0 / math.e - 1e-15:
        raise ValidationError(f"lambert_w domain: x = {x} < -1/e")
    if x == 0.0:
        return 0.0
    if x > math.e:
        w = math.log(x) - math.log(math.log(x))
    elif x > 0:
        w = x / (1.0 + x)
    else:
        w = max(x * math.exp(1.0), -0.999999)
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        # Halley step for robustness near the branch point
        denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0) \
            if w != -1.0 else ew * (w + 1.0)
        step = f / denom if denom != 0 else 0.0
        w -= step
        if abs(step) < 1e-15 * max(abs(w), 1e-10):
            break
    return w


# -- log-domain helpers ----------------------------------------------

def log_poisson_term(c: float, m: int) -> float:
    """log(c^m / m!)."""
    if c == 0.0:
        return 0.0 if m == 0 else -math.inf
    return m * math.log(c) - math.lgamma(m + 1)


def log_exp_tail(c: float, N: int) -> float:
    """log of sum_{n > N} c^n / n!, summed directly in log domain."""
    if c == 0.0:
        return -math.inf
    terms = []
    n = N + 1
    while True:
        lt = log_poisson_term(c, n)
        terms.append(lt)
        # terms decay once n > c; stop when negligible
        if n > c and (lt < max(terms) - 60.0 or n > N + 100000):
            break
        n += 1
    m = max(terms)
    return m + math.log(sum(math.exp(t - m) for t in terms))


# -- selectors --------------------------------------------------------

def _bessel_tail(tau: float, d: int) -> float:
    """sum_{|n| > d} |J_{|n|}(tau)| = 2 sum_{n > d} |J_n(tau)|."""
    tau = abs(tau)
    total = 0.0
    n = d + 1
    while True:
        v = abs(bessel_j(n, tau))
        total += v
        if (n > tau and v < 1e-20 * max(total, 1e-30)) or n > d + 2000:
            return 2.0 * total
        n += 1


def ja_degree(tau: float, eps: float) -> TruncationChoice:
    """Jacobi-Anger truncation degree d = ceil(e|tau|/2 + ln(1/eps));
    the Bessel tail beyond d is then at most eps."""
    if not (0 < eps < 1):
        raise ValidationError("eps must be in (0,1)")
    d0 = math.ceil(math.e * abs(tau) / 2.0 + math.log(1.0 / eps))
    d = d0
    tail = _bessel_tail(tau, d) if abs(tau) < 400 else 0.0
    while tail > eps:
        d += 1
        tail = _bessel_tail(tau, d)
    # the closed form can overshoot by a wide margin; trim down to the
    # minimal degree whose tail still passes
    while d > 0:
        t_prev = _bessel_tail(tau, d - 1)
        if t_prev > eps:
            break
        d -= 1
        tail = t_prev
    return TruncationChoice(d, tail, "jacobi-anger", d != d0)


def taylor_order(c: float, delta: float) -> TruncationChoice:
    """Smallest M with c^{M+1}/(M+1)! <= delta (log-domain search)."""
    if c <= 0:
        raise ValidationError("c must be > 0")
    if not (0 < delta < 1):
        raise ValidationError("delta must be in (0,1)")
    log_delta = math.log(delta)
    M = 0
    # small slack so exact boundary ties (e.g. 1/2! vs 0.5) are not lost
    # to lgamma-vs-log rounding
    while log_poisson_term(c, M + 1) > log_delta + 1e-12:
        M += 1
        if M > 10 ** 7:
            raise ValidationError("taylor_order did not converge")
    bound = math.exp(log_poisson_term(c, M + 1))
    return TruncationChoice(M, bound, "taylor-factorial")


def dyson_order(betaT: float, eps: float) -> TruncationChoice:
    """Factorial-tail truncation N = ceil(e*betaT / W(3e*betaT/eps)),
    cross-validated against the direct tail sum_{n>N} (betaT)^n/n! and
    self-repaired upward if the closed form falls short."""
    if betaT <= 0:
        raise ValidationError("betaT must be > 0")
    if not (0 < eps < 1):
        raise ValidationError("eps must be in (0,1)")
    arg = 3.0 * math.e * betaT / eps
    N_formula = math.ceil(math.e * betaT / lambert_w(arg))
    log_eps = math.log(eps)
    # the closed form mixes asymptotic and exact steps; repair in both
    # directions so the returned degree is minimal for the direct tail test
    N = max(N_formula, 0)
    while log_exp_tail(betaT, N) > log_eps:
        N += 1
    while N > 0 and log_exp_tail(betaT, N - 1) <= log_eps:
        N -= 1
    repaired = N != N_formula
    tail = math.exp(min(log_exp_tail(betaT, N), 700.0))
    return TruncationChoice(N, tail, "dyson-lambertw", repaired)


def _cheb_log_coeff(c: float, k: int) -> float:
    """log b_k for e^{c(x-1)} = sum b_k T_k(x): b_0 = e^{-c} I_0(c),
    b_k = 2 e^{-c} I_k(c)."""
    base = -c + log_bessel_i(k, c)
    return base if k == 0 else math.log(2.0) + base


def cheb_exp_tail(c: float, d: int) -> float:
    """sum_{k > d} b_k (nonnegative coefficients; sums to e^{c(x-1)}|_{x=1}
    minus the partial sum)."""
    logs = []
    k = d + 1
    while True:
        lv = _cheb_log_coeff(c, k)
        logs.append(lv)
        if lv < max(logs) - 60.0 or k > d + 100000:
            break
        k += 1
    m = max(logs)
    if m == -math.inf:
        return 0.0
    return math.exp(m) * sum(math.exp(v - m) for v in logs)


def min_degree_bounded_exp(c: float, eps: float) -> TruncationChoice:
    """Smallest Chebyshev degree d with tail sum_{k>d} b_k <= eps for the
    bounded exponential e^{c(x-1)} on [-1,1]. The partial sum is
    automatically bounded by 1 because the b_k are nonnegative and sum
    to 1."""
    if c <= 0:
        raise ValidationError("c must be > 0")
    if not (0 < eps < 0.5):
        raise ValidationError("eps must be in (0, 1/2)")
    d = 0
    while cheb_exp_tail(c, d) > eps:
        d += 1
        if d > 10 ** 6:
            raise ValidationError("min_degree_bounded_exp did not converge")
    return TruncationChoice(d, cheb_exp_tail(c, d), "chebyshev-exp")


def cheb_coeff(c: float, k: int) -> float:
    """b_k itself (for lower-bound cross-checks E_d >= (pi/4) b_{d+1})."""
    lv = _cheb_log_coeff(c, k)
    return math.exp(lv) if lv > -700 else 0.0


def lorentzian_discretization(gamma: float, eps_tail: float,
                              eps_disc: float, betaT: float):
    """(s_max, M) for Lorentzian kernel truncation and midpoint
    discretization: s_max = 2*gamma/(pi*eps_tail);
    M = ceil(sqrt(s_max^2 K / (3 pi gamma eps_disc))) with
    K = betaT^2 + 4 betaT/gamma + 6/gamma^2."""
    if min(gamma, eps_tail, eps_disc, betaT) <= 0:
        raise ValidationError("all arguments must be positive")
    s_max = 2.0 * gamma / (math.pi * eps_tail)
    K = betaT ** 2 + 4.0 * betaT / gamma + 6.0 / gamma ** 2
    M = math.ceil(math.sqrt(s_max ** 2 * K / (3.0 * math.pi * gamma
                                              * eps_disc)))
    return s_max, M


def lorentzian_tail_exact(gamma: float, s_max: float) -> float:
    """Exact kernel mass outside [-s_max, s_max]:
    (2/pi) arctan(gamma/s_max). Equals 1/2 at s_max = gamma."""
    return (2.0 / math.pi) * math.atan2(gamma, s_max)


def lorentzian_quadrature_bound(gamma: float, s_max: float, M: int,
                                betaT: float) -> float:
    """Rigorous midpoint-rule bound s_max^3 K / (3 pi gamma M^2) with
    K = betaT^2 + 4 betaT/gamma + 6/gamma^2 (betaT = ||A|| * time)."""
    K = betaT ** 2 + 4.0 * betaT / gamma + 6.0 / gamma ** 2
    return s_max ** 3 * K / (3.0 * math.pi * gamma * M ** 2)
