"""Gradient-based angle refinement: analytic gradients, L-BFGS, multistart."""

import numpy as np
import pytest

from biqsp import mqsp_circuit as mc
from biqsp import qsp_optimize as qo
from biqsp.errors import ValidationError


def instance(seed, sched="RIRI"):
    rng = np.random.default_rng(seed)
    schedule = mc.Schedule.from_string(sched)
    spec = mc.random_spec(rng, schedule)
    Pg, _ = mc.evaluate_circuit_grid(spec, 16, 16)
    return schedule, spec, Pg.values


def test_gradient_matches_finite_differences():
    schedule, spec, target = instance(0)
    rng = np.random.default_rng(1)
    angles = spec.angles + 0.1 * rng.standard_normal(spec.angles.shape)
    cost, grad = qo.cost_and_grad(schedule, angles, target)
    h = 1e-6
    for idx in [(0, 0), (2, 1), (4, 0)]:
        ap = angles.copy()
        ap[idx] += h
        am = angles.copy()
        am[idx] -= h
        fd = (qo.cost_only(schedule, ap, target)
              - qo.cost_only(schedule, am, target)) / (2 * h)
        assert grad[idx] == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_cost_vanishes_at_exact_angles():
    schedule, spec, target = instance(2)
    cost, grad = qo.cost_and_grad(schedule, spec.angles, target)
    assert cost < 1e-24
    assert np.max(np.abs(grad)) < 1e-11


def test_lbfgs_recovers_perturbed_circuit():
    schedule, spec, target = instance(3, "RRIRI")
    rng = np.random.default_rng(4)
    start = spec.angles + 0.05 * rng.standard_normal(spec.angles.shape)
    res = qo.lbfgs_minimize(schedule, start, target)
    assert res.converged
    assert res.residual < 1e-7


def test_multistart_finds_global_basin_and_reports_counts():
    schedule, spec, target = instance(5)
    rng = np.random.default_rng(6)
    res = qo.multistart(schedule, target, spec.angles, k=6, rng=rng,
                        sigma=0.3)
    assert res.best.residual < 1e-7
    assert sum(c for _cost, c in res.basins) == 6
    assert res.best.cost == min(r.cost for r in res.results)


def test_shifted_exact_target_modulus():
    alphaRT, betaIT, dR, dI = 1.0, 0.5, 6, 4
    target = qo.shifted_exact_target(alphaRT, betaIT, dR, dI, 24, 24)
    th2 = 2 * np.pi * np.arange(24) / 24
    expected = np.exp(betaIT * (np.cos(th2) - 1.0))
    assert np.allclose(np.abs(target), expected[None, :], atol=1e-12)


def test_angle_shape_validation():
    schedule = mc.Schedule.from_string("RI")
    with pytest.raises(ValidationError):
        qo.cost_and_grad(schedule, np.zeros((2, 2)),
                         np.zeros((8, 8), dtype=complex))
