"""Segmented truncated-Dyson target assembly and its diagnostics."""

import math

import numpy as np
import pytest

from biqsp import bilaurent as bl
from biqsp import dyson_target as dt
from biqsp import specfun
from biqsp.errors import ValidationError


def params(alphaRT=2.0, betaIT=0.6, r=2, M=3, dR_seg=8, delta=1e-3):
    return dt.DysonParams(alphaRT=alphaRT, betaIT=betaIT, r=r, M=M,
                          dR_seg=dR_seg, delta=delta)


class TestBlocks:
    def test_frame_block_approximates_oscillatory_exponential(self):
        tau, d = 2.0, 14
        P = dt.frame_block(tau, d)
        th = 2 * np.pi * np.arange(64) / 64
        exact = np.exp(-1j * tau * np.cos(th))
        approx = bl.evaluate_grid(P, 64, 4).values[:, 0]
        assert np.max(np.abs(approx - exact)) \
            <= 2.0 * specfun._bessel_tail(tau, d)

    def test_frame_block_coefficients_are_bessel(self):
        P = dt.frame_block(1.5, 5)
        assert P.coefficient(2, 0) == pytest.approx(
            (-1j) ** 2 * specfun.bessel_j(2, 1.5), abs=1e-12)
        # even in n: J_{|n|} with the same phase
        assert P.coefficient(-2, 0) == pytest.approx(
            P.coefficient(2, 0), abs=1e-14)

    def test_taylor_block_matches_truncated_series(self):
        c, M = 0.8, 4
        P = dt.taylor_block(c, M)
        th = 2 * np.pi * np.arange(32) / 32
        exact = sum((c * np.cos(th)) ** m / math.factorial(m)
                    for m in range(M + 1))
        approx = bl.evaluate_grid(P, 4, 32).values[0, :]
        assert np.max(np.abs(approx - exact)) < 1e-12

    def test_taylor_norm_is_value_at_zero(self):
        c, M = 0.8, 4
        P = dt.taylor_block(c, M)
        at_zero = float(np.real(np.sum(P.coeffs)))
        assert dt.taylor_norm(c, M) == pytest.approx(at_zero, abs=1e-13)


class TestTargetGrid:
    def test_exact_grid_values(self):
        G = dt.target_grid_exact(1.0, 0.5, 16, 16)
        th = 2 * np.pi * 3 / 16
        expected = (np.exp(-1j * 1.0 * math.cos(th))
                    * math.exp(0.5 * (math.cos(2 * np.pi * 5 / 16) - 1)))
        assert G.values[3, 5] == pytest.approx(expected, abs=1e-13)
        assert np.max(np.abs(G.values)) <= 1.0 + 1e-12


class TestBuild:
    def test_schedule_and_bidegree(self):
        p = params()
        tgt = dt.build_dyson_target(p)
        assert len(tgt.schedule) == p.r * (p.dR_seg + p.M)
        assert tgt.schedule.dR == p.r * p.dR_seg
        assert tgt.schedule.dI == p.r * p.M
        assert tgt.bidegree == (p.r * p.dR_seg, p.r * p.M)
        # the single-M "stated" budget undercounts the product degree
        assert tgt.budget_mismatch == (p.r > 1)

    def test_target_is_strictly_subunitary(self):
        tgt = dt.build_dyson_target(params())
        sup = bl.sup_norm(tgt.P_delta, 96, 96)
        assert sup <= 1.0 - 1e-3 + 1e-10

    def test_target_tracks_exact_grid(self):
        p = params(delta=1e-6)
        tgt = dt.build_dyson_target(p)
        G = bl.evaluate_grid(tgt.P_delta, 64, 64)
        E = dt.target_grid_exact(p.alphaRT, p.betaIT, 64, 64)
        # the lam normalization (mu^r ~ e^{betaIT}) already converts the
        # e^{c cos theta_2} blocks to the postselected e^{c(cos-1)} form
        approx = G.values / (1 - p.delta)
        assert np.max(np.abs(approx - E.values)) < 0.02

    def test_zero_locus_deficit_nonnegative_and_small(self):
        tgt = dt.build_dyson_target(params())
        assert -1e-6 <= tgt.zero_locus_deficit < 0.1

    def test_validates_delta(self):
        with pytest.raises(Exception):
            dt.DysonParams(alphaRT=1.0, betaIT=0.5, r=1, M=2, dR_seg=4,
                           delta=1.5)


class TestErrorBudget:
    def test_components_and_total(self):
        p = params(r=4)
        T, alpha, beta = 1.0, p.alphaRT, p.betaIT
        quad, tay, total = dt.error_budget(p, T, alpha, beta)
        assert quad == pytest.approx(alpha * beta ** 2 * T ** 3
                                     / p.r ** 2)
        c = beta * T / p.r
        expected_tay = (p.r * c ** (p.M + 1)
                        / math.factorial(p.M + 1) * math.exp(beta * T))
        assert tay == pytest.approx(expected_tay, rel=1e-10)
        assert total == pytest.approx(quad + tay)

    def test_quadrature_shrinks_with_segments(self):
        p1, p2 = params(r=2), params(r=8)
        q1 = dt.error_budget(p1, 1.0, 2.0, 0.6)[0]
        q2 = dt.error_budget(p2, 1.0, 2.0, 0.6)[0]
        assert q2 == pytest.approx(q1 / 16.0)
