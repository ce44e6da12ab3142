"""Closed-form query-complexity, degree, and postselection calculators.

Each calculator reports two kinds of numbers and labels them: values
computed from stated closed forms (lower bound, per-segment Dyson totals,
Lorentzian overhead, postselection cost in the log domain) and published
benchmark totals whose derivation constants are not public, which are
shipped as tagged reference data and never recomputed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from biqsp.errors import ValidationError

SQRT_2LN3 = math.sqrt(2.0 * math.log(3.0))  # = 1.4823038073675112

# published benchmark totals (d_R, d_I, Q_total); "reference" provenance.
# weak regime: alphaT = 338, betaT = 15.6, eps = 1e-3
# strong regime: alphaT = 338, betaT = 338, eps = 1e-3
REFERENCE_TOTALS = {
    ("mqsp", "weak"): (361, 46, 407),
    ("mqsp", "strong"): (360, 922, 1282),
    ("dyson", "weak"): (528, 112, 640),
    ("dyson", "strong"): (2366, 3042, 5408),
}
STRONG_RATIO = REFERENCE_TOTALS[("dyson", "strong")][2] \
    / REFERENCE_TOTALS[("mqsp", "strong")][2]  # ~4.22


@dataclass(frozen=True)
class ResourceBudget:
    method: str
    dR: int
    dI: int
    Q_total: int
    r: int | None = None
    M: int | None = None
    p: float | None = None
    postselection_P: float | None = None
    log10_repetitions: float | None = None
    notes: dict = field(default_factory=dict)
    reference_totals: tuple | None = None


def lower_bound(alphaT: float, betaT: float, eps: float) -> float:
    """alphaT + betaT + ln(1/eps)/lnln(1/eps)."""
    if not (0.0 < eps < 0.5):
        raise ValidationError("eps must be in (0, 1/2)")
    if alphaT < 0 or betaT < 0:
        raise ValidationError("alphaT, betaT must be >= 0")
    L = math.log(1.0 / eps)
    LL = math.log(L)
    if LL <= 0:
        raise ValidationError("eps too large: lnln(1/eps) <= 0")
    return alphaT + betaT + L / LL


def _regime_label(alphaT, betaT, eps):
    if abs(alphaT - 338) < 0.5 and abs(eps - 1e-3) < 1e-12:
        if abs(betaT - 15.6) < 0.05:
            return "weak"
        if abs(betaT - 338) < 0.5:
            return "strong"
    return None


def dyson_lcu_budget(alphaT: float, betaT: float, eps: float,
                     c_seg: float = 1.0,
                     overrides: tuple[int, int] | None = None
                     ) -> ResourceBudget:
    """Segmented truncated-Taylor budget: r = ceil(betaT/c_seg) segments,
    per-segment frame degree and Taylor order from the truncation
    selectors at eps' = eps/(3 r e^{betaT}) unless given explicitly;
    totals d_R = r*d_R_seg, d_I = r*M_seg."""
    if c_seg <= 0:
        raise ValidationError("c_seg must be > 0")
    r = max(1, math.ceil(betaT / c_seg))
    notes = {"c_seg": c_seg}
    if overrides is not None:
        dR_seg, M_seg = overrides
        notes["per_segment"] = "override"
    else:
        from biqsp import specfun
        # per-segment precision with union bound over segments and the
        # amplification e^{betaT}; log-domain to survive betaT = 338
        log_eps_seg = math.log(eps) - math.log(3.0 * r) - betaT
        eps_seg = math.exp(max(log_eps_seg, -700.0))
        dR_seg = specfun.ja_degree(alphaT / r, eps_seg).degree
        M_seg = specfun.taylor_order(betaT / r, eps_seg).degree
        notes["per_segment"] = "selector"
        notes["log_eps_seg"] = log_eps_seg
    dR = r * dR_seg
    dI = r * M_seg
    regime = _regime_label(alphaT, betaT, eps)
    ref = REFERENCE_TOTALS.get(("dyson", regime)) if regime else None
    return ResourceBudget(
        method="dyson-lcu", dR=dR, dI=dI, Q_total=dR + dI, r=r,
        M=M_seg, notes=notes, reference_totals=ref)


def mqsp_budget(alphaT: float, betaT: float, eps: float,
                c_R: float = 1.0, c_I: float = 1.0) -> ResourceBudget:
    """Single-postselection bivariate budget:
    d_R = ceil(c_R alphaT + ln(1/eps)),
    d_I = ceil(c_I betaT + ln(1/eps)/lnln(1/eps))."""
    if not (0.0 < eps < 0.5):
        raise ValidationError("eps must be in (0, 1/2)")
    L = math.log(1.0 / eps)
    LL = math.log(L)
    if LL <= 0:
        raise ValidationError("eps too large: lnln(1/eps) <= 0")
    dR = math.ceil(c_R * alphaT + L)
    dI = math.ceil(c_I * betaT + L / LL)
    regime = _regime_label(alphaT, betaT, eps)
    ref = REFERENCE_TOTALS.get(("mqsp", regime)) if regime else None
    return ResourceBudget(
        method="mqsp", dR=dR, dI=dI, Q_total=dR + dI,
        notes={"c_R": c_R, "c_I": c_I,
               "reference_only": "published totals use unpublished "
                                 "constants"},
        reference_totals=ref)


def lorentzian_budget(alphaT: float, betaT: float, eps: float,
                      p: float | str = "optimal") -> ResourceBudget:
    """Quadrature-of-order-p budget. For finite p:
    Q = T^{1+1/(2p)} eps^{-1/(2p)} (alphaT + ln(1/eps)) with T mapped to
    (alphaT + betaT) in normalized units. For p = 'optimal':
    p* = sqrt(ln(1/eps)/(2 ln 3)) and
    Q = (alphaT + betaT) exp(sqrt(2 ln 3 ln(1/eps)))."""
    if not (0.0 < eps < 1.0):
        raise ValidationError("eps must be in (0, 1)")
    L = math.log(1.0 / eps)
    Tn = alphaT + betaT
    if p == "optimal":
        p_star = math.sqrt(L / (2.0 * math.log(3.0)))
        overhead = math.exp(SQRT_2LN3 * math.sqrt(L))
        Q = Tn * overhead
        notes = {"p_star": p_star, "overhead": overhead,
                 "c": SQRT_2LN3}
        p_val = p_star
    else:
        p_val = float(p)
        if p_val < 1:
            raise ValidationError("need p >= 1 or p = 'optimal'")
        Q = Tn ** (1.0 + 0.5 / p_val) * eps ** (-0.5 / p_val) \
            * (alphaT + L)
        notes = {"overhead": (Tn / eps) ** (0.5 / p_val)}
    return ResourceBudget(
        method="lorentzian", dR=0, dI=0,
        Q_total=int(math.ceil(Q)) if Q < 1e15 else int(1e15),
        p=p_val, notes=notes)


def postselection_cost(betaT: float, survival_sq: float):
    """(P, log10 repetitions-per-success factor): P = e^{-2 betaT} *
    survival_sq, computed so that the repetition count stays finite in
    the log domain even at betaT = 338."""
    if not (0.0 <= survival_sq <= 1.0):
        raise ValidationError("survival_sq must be in [0, 1]")
    if betaT < 0:
        raise ValidationError("betaT must be >= 0")
    log10_P = (-2.0 * betaT + math.log(max(survival_sq, 1e-300))) \
        / math.log(10.0)
    P = 10.0 ** log10_P if log10_P > -300 else 0.0
    return P, -log10_P


def benchmark_table(alphaT: float, betaT: float, eps: float,
                    survival_sq: float = 1.0):
    """All methods side by side: list of row dicts with computed and
    reference columns."""
    lb = lower_bound(alphaT, betaT, eps)
    P, log10_rep = postselection_cost(betaT, survival_sq)
    rows = []
    for b in (mqsp_budget(alphaT, betaT, eps),
              dyson_lcu_budget(alphaT, betaT, eps),
              lorentzian_budget(alphaT, betaT, eps)):
        ref = b.reference_totals
        rep = log10_rep + math.log10(max(b.Q_total, 1))
        rows.append({
            "method": b.method,
            "dR": b.dR, "dI": b.dI, "Q_total": b.Q_total,
            "reference_dR": ref[0] if ref else "",
            "reference_dI": ref[1] if ref else "",
            "reference_Q": ref[2] if ref else "",
            "lower_bound": lb,
            "postselection_P": P,
            "log10_repetitions": rep,
        })
    return rows
