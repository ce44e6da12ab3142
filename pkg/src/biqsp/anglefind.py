"""Deterministic angle synthesis by recursive peeling.

With the circuit convention G = R_0 prod_j A_{s(j)} R_j and A = diag(z, 1),
the blocks obey P = e^{i phi_0} cos(theta_0) z_s P' - sin(theta_0) Q' and
Q = sin(theta_0) z_s P' + e^{-i phi_0} cos(theta_0) Q', so the ratio of the
leading z_s-coefficients of Q and P is the constant e^{-i phi_0} tan(theta_0)
(independent of the other variable — the constant-ratio condition, CRC).
Peeling inverts the outermost rotation, divides P by z_s, and recurses down
the schedule; the base case reads the last rotation off the residual
constants. Block peeling exploits coefficient separability of segmented
Dyson schedules to extract each ratio from a single coefficient pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from biqsp import bilaurent as bl
from biqsp.errors import (CRCViolationError, NumericalInstabilityError,
                          ValidationError)
from biqsp.mqsp_circuit import CircuitSpec, Schedule

EPS_LEAD = 1e-12  # "vanishing leading coefficient" threshold (relative)


@dataclass(frozen=True)
class PeelState:
    P: bl.BiLaurent
    complements: tuple[bl.BiLaurent, ...]
    remaining_schedule: tuple[str, ...]
    deg1: int  # current z1-degree of P's analytic window
    deg2: int
    kappa_running: float = 1.0
    angles_so_far: tuple = ()
    drift: float = 0.0  # accumulated dropped coefficient mass
    strict: bool = True
    crc_tol_base: float = 1e-8
    use_median: bool = False
    reorthogonalize: bool = False
    trace: tuple = ()
    ratio_ops: int = 0


def _slice_at(P: bl.BiLaurent, var: int, idx: int) -> bl.BiLaurent:
    """Coefficient slice of P at exponent idx of the chosen variable,
    as a univariate polynomial in the other variable."""
    if var == 1:
        if not (P.window1[0] <= idx <= P.window1[1]):
            return bl.BiLaurent.zero()
        row = P.coeffs[idx - P.window1[0], :]
        return bl.BiLaurent((0, 0), P.window2, row[np.newaxis, :])
    if not (P.window2[0] <= idx <= P.window2[1]):
        return bl.BiLaurent.zero()
    col = P.coeffs[:, idx - P.window2[0]]
    return bl.BiLaurent(P.window1, (0, 0), col[:, np.newaxis])


def crc_ratio(P: bl.BiLaurent, Q: bl.BiLaurent, var: int, tol: float,
              use_median: bool = False, top_idx: int | None = None):
    """Ratio of the leading-coefficient slices of Q and P in the peeled
    variable, sampled across the other variable.

    Returns (ratio, max deviation). Raises CRCViolationError when the
    sampled ratios deviate from their center by more than tol."""
    if top_idx is None:
        top_idx = P.window1[1] if var == 1 else P.window2[1]
    a = _slice_at(P, var, top_idx)
    b = _slice_at(Q, var, top_idx)
    span = max(a.span1 * a.span2, b.span1 * b.span2)
    N = max(4 * span, 16)
    N1, N2 = (1, N) if var == 1 else (N, 1)
    if var == 1:
        av = bl.evaluate_grid(a, 1, N).values.ravel()
        bv = bl.evaluate_grid(b, 1, N).values.ravel()
    else:
        av = bl.evaluate_grid(a, N, 1).values.ravel()
        bv = bl.evaluate_grid(b, N, 1).values.ravel()
    amax = float(np.max(np.abs(av)))
    if amax == 0.0:
        return 0.0 + 0.0j, 0.0
    mask = np.abs(av) >= 1e-6 * amax
    ratios = bv[mask] / av[mask]
    if use_median:
        center = complex(np.median(ratios.real), np.median(ratios.imag))
    else:
        # least-squares center: argmin_rho sum |b - rho a|^2
        center = complex(np.vdot(av, bv) / np.vdot(av, av))
    dev = float(np.max(np.abs(ratios - center)))
    if dev > tol * max(1.0, abs(center)):
        raise CRCViolationError(
            f"constant-ratio condition violated in var {var}: deviation "
            f"{dev:.3e} exceeds tolerance {tol:.3e}", deviation=dev)
    return center, dev


def _divide_by_z(P: bl.BiLaurent, var: int):
    """P / z_var assuming the z_var^0 slice is (numerically) zero.

    Returns (quotient, dropped slice magnitude)."""
    if var == 1:
        lo, hi = P.window1
        if lo >= 1:
            return bl.monomial_shift(P, -1, 0), 0.0
        dropped = float(np.max(np.abs(P.coeffs[-lo, :]))) \
            if lo <= 0 <= hi else 0.0
        if hi < 1:
            return bl.BiLaurent.zero(), dropped
        rest = bl.BiLaurent((1, hi), P.window2, P.coeffs[1 - lo:, :])
        return bl.monomial_shift(rest, -1, 0), dropped
    lo, hi = P.window2
    if lo >= 1:
        return bl.monomial_shift(P, 0, -1), 0.0
    dropped = float(np.max(np.abs(P.coeffs[:, -lo]))) \
        if lo <= 0 <= hi else 0.0
    if hi < 1:
        return bl.BiLaurent.zero(), dropped
    rest = bl.BiLaurent(P.window1, (1, hi), P.coeffs[:, 1 - lo:])
    return bl.monomial_shift(rest, 0, -1), dropped


def _clip_above(P: bl.BiLaurent, var: int, dmax: int):
    """Drop coefficients with var-exponent above dmax; returns
    (clipped, dropped magnitude)."""
    if var == 1:
        lo, hi = P.window1
        if hi <= dmax:
            return P, 0.0
        keep = dmax - lo + 1
        if keep <= 0:
            return bl.BiLaurent.zero(), float(np.max(np.abs(P.coeffs)))
        dropped = float(np.max(np.abs(P.coeffs[keep:, :])))
        return bl.BiLaurent((lo, dmax), P.window2, P.coeffs[:keep, :]), \
            dropped
    lo, hi = P.window2
    if hi <= dmax:
        return P, 0.0
    keep = dmax - lo + 1
    if keep <= 0:
        return bl.BiLaurent.zero(), float(np.max(np.abs(P.coeffs)))
    dropped = float(np.max(np.abs(P.coeffs[:, keep:])))
    return bl.BiLaurent(P.window1, (lo, dmax), P.coeffs[:, :keep]), dropped


def _select_q1(complements):
    """Largest-norm complement first (it carries the CRC signal)."""
    if len(complements) <= 1:
        return 0
    norms = [q.norm2() for q in complements]
    return int(np.argmax(norms))


def _norm_identity_drift(P, complements, N1=32, N2=32):
    span1 = max([P.span1] + [q.span1 for q in complements])
    span2 = max([P.span2] + [q.span2 for q in complements])
    N1 = max(N1, 2 * span1)
    N2 = max(N2, 2 * span2)
    acc = np.abs(bl.evaluate_grid(P, N1, N2).values) ** 2
    for q in complements:
        acc += np.abs(bl.evaluate_grid(q, N1, N2).values) ** 2
    return float(np.max(np.abs(acc - 1.0)))


def peel_step(state: PeelState, block_mode: bool = False):
    """One peel: extract (theta, phi) of the current outermost rotation,
    apply its inverse to (P, Q1), divide P by the peeled variable.

    Returns (theta, phi, next_state)."""
    if not state.remaining_schedule:
        raise ValidationError("schedule exhausted")
    sym = state.remaining_schedule[0]
    var = 1 if sym == "R" else 2
    d = state.deg1 if var == 1 else state.deg2
    if d < 1:
        raise ValidationError(
            f"cannot peel variable {var}: degree already 0")
    comps = list(state.complements)
    i1 = _select_q1(comps)
    Q1 = comps[i1]
    a = _slice_at(state.P, var, d)
    b = _slice_at(Q1, var, d)
    scale = max(state.P.max_coeff(), Q1.max_coeff(), 1e-300)
    dev = 0.0
    ops = state.ratio_ops
    if a.max_coeff() < EPS_LEAD * scale:
        # vanishing leading coefficient of P: full swap
        theta, phi = np.pi / 2, 0.0
        ops += 1
    elif b.max_coeff() < EPS_LEAD * scale:
        # vanishing leading coefficient of Q1: transparent rotation
        theta, phi = 0.0, 0.0
        ops += 1
    else:
        tol = state.crc_tol_base * state.kappa_running
        if block_mode:
            # separability: the shared inner factor cancels coefficientwise,
            # so one matching coefficient pair gives the scalar ratio
            if var == 1:
                exps = [(0, n) for n in range(a.window2[0],
                                              a.window2[1] + 1)]
            else:
                exps = [(m, 0) for m in range(a.window1[0],
                                              a.window1[1] + 1)]
            avals = np.array([a.coefficient(m, n) for m, n in exps])
            k0 = int(np.argmax(np.abs(avals)))
            m0, n0 = exps[k0]
            rho = b.coefficient(m0, n0) / avals[k0]
            ops += 2
            # spot check at the second-largest coefficient
            mags = np.abs(avals)
            mags[k0] = 0.0
            k1 = int(np.argmax(mags))
            if mags[k1] > 1e-8 * np.abs(avals[k0]):
                m1, n1 = exps[k1]
                rho2 = b.coefficient(m1, n1) / avals[k1]
                dev = abs(rho2 - rho)
                ops += 2
                if dev > max(1e-6, tol) * max(1.0, abs(rho)):
                    raise CRCViolationError(
                        f"separability check failed: {dev:.3e}",
                        deviation=dev)
        else:
            try:
                rho, dev = crc_ratio(state.P, Q1, var, tol,
                                     state.use_median, top_idx=d)
            except CRCViolationError:
                if state.strict:
                    raise
                rho, dev = crc_ratio(state.P, Q1, var, np.inf,
                                     state.use_median, top_idx=d)
            ops += max(4 * max(a.span1 * a.span2, b.span1 * b.span2), 16)
        theta = float(np.arctan(abs(rho)))
        phi = float(-np.angle(rho)) if abs(rho) > 0 else 0.0
    c, s = np.cos(theta), np.sin(theta)
    e = np.exp(-1j * phi)
    # inverse rotation [[e^{-i phi} c, s], [-s, e^{i phi} c]] on (P, Q1)
    newP_full = state.P.scale(e * c) + Q1.scale(s)
    newQ1 = state.P.scale(-s) + Q1.scale(np.conj(e) * c)
    newP, drop1 = _divide_by_z(newP_full, var)
    newP, drop2 = _clip_above(newP, var, d - 1)
    newQ1, drop3 = _clip_above(newQ1, var, d)
    comps[i1] = newQ1
    drift = state.drift + drop1 + drop2 + drop3
    kappa = min(state.kappa_running / max(c, 1e-300), 1e300)
    step_no = len(state.angles_so_far)
    trace_row = {"step": step_no, "var": var, "theta": theta, "phi": phi,
                 "rho_dev": dev, "kappa": kappa}
    nxt = replace(
        state,
        P=newP,
        complements=tuple(comps),
        remaining_schedule=state.remaining_schedule[1:],
        deg1=state.deg1 - (var == 1),
        deg2=state.deg2 - (var == 2),
        kappa_running=kappa,
        angles_so_far=state.angles_so_far + ((theta, phi),),
        drift=drift,
        trace=state.trace + (trace_row,),
        ratio_ops=ops,
    )
    if state.reorthogonalize:
        nid = _norm_identity_drift(nxt.P, nxt.complements)
        if nid > 0:
            fix = 1.0 / np.sqrt(1.0 + nid) if nid > 1e-14 else 1.0
            # cheap renormalization: scale everything toward the identity
            nxt = replace(nxt, P=nxt.P.scale(fix),
                          complements=tuple(q.scale(fix)
                                            for q in nxt.complements))
    if state.strict:
        nid = _norm_identity_drift(nxt.P, nxt.complements)
        if nid > 1e-6 * nxt.kappa_running:
            raise NumericalInstabilityError(
                f"norm identity drifted to {nid:.3e} at step {step_no}",
                kappa=nxt.kappa_running)
    return theta, phi, nxt


def _base_case(state: PeelState):
    p0 = state.P.coefficient(0, 0)
    q0 = float(np.sqrt(sum(q.norm2() ** 2 for q in state.complements)))
    if abs(p0) < 1e-300:
        theta0, phi0 = np.pi / 2, 0.0
    else:
        theta0 = float(np.arctan(q0 / abs(p0)))
        phi0 = float(np.angle(p0))
    return theta0, phi0


def _run_peel(P_delta: bl.BiLaurent, complements, schedule: Schedule,
              strict: bool = True, crc_tol_base: float = 1e-8,
              use_median: bool = False, reorthogonalize: bool = False,
              block_mode: bool = False):
    if P_delta.window1[0] < 0 or P_delta.window2[0] < 0:
        raise ValidationError(
            "target must be analytic (windows starting at 0); "
            "monomial-shift symmetric Laurent targets first")
    comps = tuple(complements)
    nid = _norm_identity_drift(P_delta, comps)
    if nid > 1e-8 and strict:
        raise ValidationError(
            f"|P|^2 + sum |Q_l|^2 deviates from 1 by {nid:.3e}")
    state = PeelState(
        P=P_delta, complements=comps,
        remaining_schedule=schedule.entries,
        deg1=schedule.dR, deg2=schedule.dI,
        strict=strict, crc_tol_base=crc_tol_base,
        use_median=use_median, reorthogonalize=reorthogonalize)
    angles = []
    while state.remaining_schedule:
        theta, phi, state = peel_step(state, block_mode=block_mode)
        angles.append((theta, phi))
    theta0, phi0 = _base_case(state)
    angles.append((theta0, phi0))
    kappa_total = state.kappa_running / max(np.cos(theta0), 1e-300)
    spec = CircuitSpec(schedule, np.asarray(angles, dtype=float))
    info = {"kappa_total": float(kappa_total), "drift": state.drift,
            "trace": list(state.trace), "ratio_ops": state.ratio_ops,
            "block_mode": block_mode, "fallback": False}
    return spec, info


def recursive_angle_find(P_delta: bl.BiLaurent, complements,
                         schedule: Schedule, strict: bool = True,
                         crc_tol_base: float = 1e-8,
                         use_median: bool = False,
                         reorthogonalize: bool = False):
    """Full recursive peel; returns (CircuitSpec, info) with
    info['kappa_total'] = prod sec(theta_k) and the per-step trace."""
    return _run_peel(P_delta, complements, schedule, strict=strict,
                     crc_tol_base=crc_tol_base, use_median=use_median,
                     reorthogonalize=reorthogonalize, block_mode=False)


def block_peel(P_delta: bl.BiLaurent, complements, schedule: Schedule,
               strict: bool = True, crc_tol_base: float = 1e-8):
    """Peel with O(1) ratio extraction per step using coefficient
    separability of segmented schedules; falls back to the recursive
    path (with a warning flag) if the separability spot-check fails."""
    try:
        return _run_peel(P_delta, complements, schedule, strict=strict,
                         crc_tol_base=crc_tol_base, block_mode=True)
    except CRCViolationError:
        spec, info = _run_peel(P_delta, complements, schedule,
                               strict=strict, crc_tol_base=crc_tol_base,
                               block_mode=False)
        info["fallback"] = True
        return spec, info


def separable_complement(P: bl.BiLaurent, tol: float = 1e-10):
    """Rank-2 complement for a separable target P = f(z1) g(z2) with
    |f|, |g| <= 1: since 1 - |fg|^2 = (1-|f|^2)|g|^2 + (1-|g|^2), the
    terms are (q_f g, q_g) with |q_f|^2 = 1-|f|^2, |q_g|^2 = 1-|g|^2
    obtained by univariate spectral factorization. Raises
    ValidationError when P is not numerically rank-1 separable."""
    from biqsp.sos_factor import _scalar_fejer_riesz
    C = P.coeffs
    U, sv, Vh = np.linalg.svd(C)
    if sv.size > 1 and sv[1] > tol * max(sv[0], 1e-300):
        raise ValidationError(
            f"target is not separable: second singular value "
            f"{sv[1]:.3e}")
    u = U[:, 0] * np.sqrt(sv[0])
    v = Vh[0, :] * np.sqrt(sv[0])
    f = bl.BiLaurent(P.window1, (0, 0), u[:, None])
    g = bl.BiLaurent((0, 0), P.window2, v[None, :])
    # balance so that sup|f| <= 1 and sup|g| <= 1
    sf = bl.sup_norm(f, max(8 * f.span1, 64), 4)
    sg = bl.sup_norm(g, 4, max(8 * g.span2, 64))
    if sf > 1.0:
        f, g = f.scale(1.0 / sf), g.scale(sf)
        sg *= sf
    if sg > 1.0 + 1e-12:
        g = g.scale(1.0 / sg)
        f = f.scale(sg)
        if bl.sup_norm(f, max(8 * f.span1, 64), 4) > 1.0 + 1e-12:
            raise ValidationError("separable factors cannot be balanced "
                                  "to sup-norm <= 1")

    def _univariate_sos(h: bl.BiLaurent, var: int) -> bl.BiLaurent:
        one = bl.BiLaurent.constant(1.0)
        defect = one - bl.abs_squared(h)
        d = defect.span1 // 2 if var == 1 else defect.span2 // 2
        if defect.is_zero() or d == 0:
            val = max(1.0 - abs(complex(h.coeffs.ravel()[0])) ** 2, 0.0) \
                if h.span1 == 0 and h.span2 == 0 else 0.0
            return bl.BiLaurent.constant(np.sqrt(val)) if val > 0 \
                else bl.BiLaurent.zero()
        c = defect.coeffs.ravel()
        q = _scalar_fejer_riesz(c, d)[:, 0, 0]
        if var == 1:
            return bl.BiLaurent((0, d), (0, 0), q[:, None])
        return bl.BiLaurent((0, 0), (0, d), q[None, :])

    qf = _univariate_sos(f, 1)
    qg = _univariate_sos(g, 2)
    return (bl.multiply(qf, g), qg)


def roundtrip_verify(target_P: bl.BiLaurent, spec: CircuitSpec,
                     N1: int = 64, N2: int = 64) -> float:
    """Relative Frobenius error between the circuit's P block and the
    target on an N1 x N2 grid."""
    from biqsp.mqsp_circuit import evaluate_circuit_grid
    Pg, _ = evaluate_circuit_grid(spec, N1, N2)
    Tg = bl.evaluate_grid(target_P, N1, N2)
    num = float(np.linalg.norm(Pg.values - Tg.values))
    den = max(float(np.linalg.norm(Tg.values)), 1e-300)
    return num / den
