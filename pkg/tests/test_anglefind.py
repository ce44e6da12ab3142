"""Angle recovery by recursive peeling with consistency cross-checks."""

import numpy as np
import pytest

from biqsp import anglefind as af
from biqsp import bilaurent as bl
from biqsp import mqsp_circuit as mc
from biqsp.errors import CRCViolationError


def make_instance(seed, sched_str):
    rng = np.random.default_rng(seed)
    schedule = mc.Schedule.from_string(sched_str)
    spec = mc.random_spec(rng, schedule)
    P, Q = mc.circuit_polynomials(spec)
    return spec, P, Q, schedule


@pytest.mark.parametrize("seed,sched", [
    (0, "RI"), (1, "RIRI"), (2, "RRII"),
    (3, "RIRIRIRI"), (4, "RRIRRIRRI"),
])
def test_recursive_roundtrip(seed, sched):
    spec, P, Q, schedule = make_instance(seed, sched)
    found, info = af.recursive_angle_find(P, (Q,), schedule)
    assert af.roundtrip_verify(P, found) < 1e-9
    assert info["kappa_total"] < 1e6


def test_block_peel_agrees_with_recursive():
    spec, P, Q, schedule = make_instance(5, "RRIRRI")
    rec, _ = af.recursive_angle_find(P, (Q,), schedule)
    blk, info = af.block_peel(P, (Q,), schedule)
    assert info["block_mode"]
    assert af.roundtrip_verify(P, blk) < 1e-9
    P_rec, _ = mc.circuit_polynomials(rec)
    P_blk, _ = mc.circuit_polynomials(blk)
    diff = bl.sup_norm(P_rec - P_blk, 32, 32)
    assert diff < 1e-8


def test_trace_records_each_step():
    spec, P, Q, schedule = make_instance(6, "RIRI")
    _found, info = af.recursive_angle_find(P, (Q,), schedule)
    trace = info["trace"]
    assert len(trace) == len(schedule)
    for row in trace:
        assert row["var"] in (1, 2)
        assert row["rho_dev"] < 1e-6


def test_corrupted_complement_fails_norm_identity():
    spec, P, Q, schedule = make_instance(7, "RIRI")
    # corrupt the complement so |P|^2 + |Q|^2 != 1
    bad = Q.scale(1.02)
    with pytest.raises(Exception) as exc:
        af.recursive_angle_find(P, (bad,), schedule)
    assert "deviates" in str(exc.value)


def test_off_manifold_complement_raises_crc():
    spec, P, Q, schedule = make_instance(7, "RIRI")
    # a monomial phase twist preserves |Q| exactly (so the norm identity
    # still holds) but breaks the constant-ratio condition
    twisted = bl.monomial_shift(Q, 0, 1)
    with pytest.raises(CRCViolationError):
        af.recursive_angle_find(P, (twisted,), schedule)


def test_non_strict_mode_reports_drift_instead():
    spec, P, Q, schedule = make_instance(7, "RIRI")
    bad = Q.scale(1.0 + 2e-8)  # just past the strict tolerance
    found, info = af.recursive_angle_find(P, (bad,), schedule,
                                          strict=False)
    assert af.roundtrip_verify(P, found) < 1e-5


def test_separable_complement_restores_unitarity():
    # P = f(z_1) g(z_2) with |f|, |g| < 1
    rng = np.random.default_rng(8)
    f = bl.BiLaurent((0, 2), (0, 0),
                     (rng.standard_normal((3, 1))
                      + 1j * rng.standard_normal((3, 1))))
    g = bl.BiLaurent((0, 0), (0, 2),
                     (rng.standard_normal((1, 3))
                      + 1j * rng.standard_normal((1, 3))))
    # keep both factors strictly inside the unit disc so the univariate
    # spectral factorizations stay away from boundary zeros
    f = f.scale(0.95 / bl.sup_norm(f, 64, 4))
    g = g.scale(0.9 / bl.sup_norm(g, 4, 64))
    P = bl.multiply(f, g)
    comps = af.separable_complement(P)
    N = 48
    total = np.abs(bl.evaluate_grid(P, N, N).values) ** 2
    for q in comps:
        total += np.abs(bl.evaluate_grid(q, N, N).values) ** 2
    assert np.max(np.abs(total - 1.0)) < 1e-7
