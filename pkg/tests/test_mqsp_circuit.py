"""Two-variable QSP circuit model: unitarity, polynomials, walk operator."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biqsp import bilaurent as bl
from biqsp import matops, mqsp_circuit as mc
from biqsp.errors import ValidationError


def random_spec(seed, sched="RIRI"):
    rng = np.random.default_rng(seed)
    return mc.random_spec(rng, mc.Schedule.from_string(sched))


class TestSchedule:
    def test_counts_and_roundtrip(self):
        s = mc.Schedule.from_string("RRIRI")
        assert s.dR == 3 and s.dI == 2 and len(s) == 5
        assert mc.Schedule.from_string(s.as_string()) == s

    def test_rejects_bad_symbol(self):
        with pytest.raises(ValidationError):
            mc.Schedule.from_string("RXI")


class TestCircuit:
    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10 ** 6),
           sched=st.sampled_from(["R", "I", "RI", "RRII", "RIRIRI"]))
    def test_unitarity_defect_is_machine_precision(self, seed, sched):
        spec = random_spec(seed, sched)
        assert mc.unitarity_defect(spec) < 1e-12

    def test_polynomial_windows_match_schedule(self):
        spec = random_spec(0, "RRIRI")
        P, Q = mc.circuit_polynomials(spec)
        assert P.window1[0] >= 0 and P.window1[1] <= 3
        assert P.window2[0] >= 0 and P.window2[1] <= 2
        assert Q.window1[0] >= 0 and Q.window1[1] <= 3

    def test_polynomials_agree_with_grid_evaluation(self):
        spec = random_spec(1)
        P, Q = mc.circuit_polynomials(spec)
        Pg, Qg = mc.evaluate_circuit_grid(spec, 16, 16)
        assert np.allclose(bl.evaluate_grid(P, 16, 16).values,
                           Pg.values, atol=1e-11)
        assert np.allclose(bl.evaluate_grid(Q, 16, 16).values,
                           Qg.values, atol=1e-11)

    def test_angles_shape_validated(self):
        sched = mc.Schedule.from_string("RI")
        with pytest.raises(ValidationError):
            mc.CircuitSpec(sched, np.zeros((2, 2)))  # needs d+1 = 3 rows


class TestSuccessProbability:
    def test_bounded_by_postselection_ceiling(self):
        pair = matops.lindblad_benchmark_pair()
        psi0 = np.zeros(4, dtype=complex)
        psi0[0] = 1.0
        spec = random_spec(2)
        from biqsp import method_sim
        delta = 0.01
        p = mc.success_probability(spec, pair, T=1.0, psi0=psi0,
                                   delta=delta)
        ceiling = method_sim.postselection_bound(pair, 1.0, psi0)
        assert 0.0 < p <= ceiling * (1 + 1e-12)
        assert p == pytest.approx((1 - delta) ** 2 * ceiling, rel=1e-6)

    def test_rejects_unnormalized_state(self):
        pair = matops.lindblad_benchmark_pair()
        spec = random_spec(3)
        with pytest.raises(ValidationError):
            mc.success_probability(spec, pair, 1.0,
                                   np.ones(4, dtype=complex), 0.0)


class TestWalkOperator:
    def test_unitary_with_chebyshev_block(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((3, 3))
        H = (A + A.T) / 2
        alpha = np.linalg.norm(H, 2) * 1.1
        W = mc.build_walk_operator(H, alpha)
        assert np.allclose(W.conj().T @ W, np.eye(6), atol=1e-11)
        # <0|W^n|0> = T_n(H/alpha)
        n = 3
        Wn = np.linalg.matrix_power(W, n)
        lam, U = np.linalg.eigh(H / alpha)
        Tn = (U * np.cos(n * np.arccos(np.clip(lam, -1, 1)))) @ U.T
        assert np.allclose(Wn[:3, :3], Tn, atol=1e-10)

    def test_rejects_undersized_normalization(self):
        with pytest.raises(ValidationError):
            mc.build_walk_operator(np.diag([2.0, -2.0]), alpha=1.0)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        spec = random_spec(5, "RRIRII")
        path = tmp_path / "spec.json"
        mc.save_spec(spec, path)
        back = mc.load_spec(path)
        assert back.schedule == spec.schedule
        assert np.allclose(back.angles, spec.angles)
