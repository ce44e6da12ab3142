"""Matrix-level simulation methods and their rigorous error bounds."""

import math

import numpy as np
import pytest
import scipy.linalg

from biqsp import matops, method_sim as ms
from biqsp.errors import ValidationError


@pytest.fixture(scope="module")
def pair():
    return matops.lindblad_benchmark_pair()


class TestLorentzianWeights:
    def test_total_mass_matches_kernel_integral(self):
        gamma, s_max, M = 0.5, 40.0, 4000
        _s, w = ms.lorentzian_weights(gamma, s_max, M)
        exact = (2.0 / math.pi) * math.atan(s_max / gamma)
        assert np.sum(w) == pytest.approx(exact, abs=1e-5)

    def test_rejects_tiny_grid(self):
        with pytest.raises(ValidationError):
            ms.lorentzian_weights(0.5, 10.0, 1)


class TestLorentzianMethod:
    def test_error_within_predicted_bound(self, pair):
        res = ms.lorentzian_method(pair, T=0.5, r=4,
                                   disc=(200.0, 20000))
        assert res.error_norm <= res.bound_predicted
        assert res.bound_applies

    def test_segment_matches_dissipative_exponential(self, pair):
        tau, dt = 0.25, 0.125
        seg = ms.lorentzian_segment(pair, tau, dt, gamma=dt,
                                    s_max=400.0, Mpts=40000)
        Ht = pair.interaction_frame(tau)
        exact = math.exp(-pair.beta_I * dt) * scipy.linalg.expm(Ht * dt)
        assert np.linalg.norm(seg - exact, 2) < 1e-2


class TestMidpointAndDyson:
    def test_midpoint_second_order_convergence(self, pair):
        T = 1.0
        exact = matops.interaction_propagator(pair, T, steps=8192)
        errs = []
        for r in (4, 8, 16):
            errs.append(np.linalg.norm(
                ms.midpoint_propagator(pair, T, r) - exact, 2))
        slope = np.polyfit(np.log([4, 8, 16]), np.log(errs), 1)[0]
        assert slope == pytest.approx(-2.0, abs=0.3)

    def test_dyson_lcu_error_within_bound(self, pair):
        res = ms.dyson_lcu_propagator(pair, T=0.5, r=8, M=6)
        assert res.error_norm <= res.bound_predicted
        assert res.error_norm < 1e-2

    def test_dyson_lcu_taylor_order_tightens_bound(self, pair):
        # at this r the measured error is quadrature-dominated, so only
        # the predicted bound is required to shrink with the Taylor order
        lo = ms.dyson_lcu_propagator(pair, T=0.5, r=8, M=2)
        hi = ms.dyson_lcu_propagator(pair, T=0.5, r=8, M=8)
        assert hi.bound_predicted < lo.bound_predicted
        assert hi.error_norm <= hi.bound_predicted


class TestTelescopingAndBarrier:
    def test_telescoping_defect_machine_small(self, pair):
        # normalize away the e^{beta_I T} amplification so the chain map
        # is a contraction
        M = math.exp(-pair.beta_I * 0.25) * matops.exact_propagator(
            pair, 0.25)
        psi0 = np.zeros(4, dtype=complex)
        psi0[0] = 1.0
        assert ms.telescoping_check(M, psi0, K=6) < 1e-12

    def test_postselection_bound_formula(self, pair):
        T = 0.8
        psi0 = np.zeros(4, dtype=complex)
        psi0[0] = 1.0
        U = matops.exact_propagator(pair, T)
        expected = (math.exp(-2 * pair.beta_I * T)
                    * np.linalg.norm(U @ psi0) ** 2)
        assert ms.postselection_bound(pair, T, psi0) \
            == pytest.approx(expected, rel=1e-12)

    def test_barrier_check_accepts_legitimate_probability(self, pair):
        psi0 = np.zeros(4, dtype=complex)
        psi0[0] = 1.0
        bound = ms.postselection_bound(pair, 0.8, psi0)
        margin = ms.barrier_check(pair, 0.8, psi0, bound * 0.5)
        assert margin == pytest.approx(bound * 0.5, rel=1e-10)

    def test_barrier_check_rejects_violation(self, pair):
        psi0 = np.zeros(4, dtype=complex)
        psi0[0] = 1.0
        bound = ms.postselection_bound(pair, 0.8, psi0)
        with pytest.raises(ValidationError):
            ms.barrier_check(pair, 0.8, psi0,
                             min(1.0, bound * 1.5 + 1e-6))
