import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockjacobi import (BoundParams, CommutationError, StParams,
                         check_pairwise_commutation, simplified_regime_params,
                         diagonal_family, gamma_rate, operator_envelope,
                         phi_delta, psi, psi_inv, qualified_constant,
                         scalar_envelope, scalar_free_family, simplified_rate,
                         spectral_norm, st_family)


class TestBoundParams:
    def test_rejects_lambda_at_or_above_b(self):
        with pytest.raises(ValueError, match="below"):
            BoundParams(lam=0.0, b=0.0)

    def test_rejects_bad_delta_eps(self):
        with pytest.raises(ValueError, match="delta"):
            BoundParams(lam=-1.0, b=0.0, delta=0.0)
        with pytest.raises(ValueError, match="eps"):
            BoundParams(lam=-1.0, b=0.0, eps=1.0)

    def test_complex_lambda_uses_real_part(self):
        p = BoundParams(lam=-1.0 + 5.0j, b=0.0)
        assert p.gap == 1.0


class TestPsi:
    def test_values(self):
        assert psi(0.0) == 0.0
        assert psi(1.0) == pytest.approx(math.e, rel=1e-15)
        assert psi(2.0) == pytest.approx(4 * math.e**2, rel=1e-15)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            psi(-0.1)

    def test_inverse_values(self):
        assert psi_inv(0.0) == 0.0
        assert psi_inv(math.e) == pytest.approx(1.0, abs=1e-13)
        assert psi_inv(4 * math.e**2) == pytest.approx(2.0, abs=1e-13)

    def test_roundtrip_grid(self):
        xs = np.linspace(0.0, 20.0, 1000)
        for x in xs:
            t = psi(x)
            err = abs(psi(psi_inv(t)) - t)
            assert err <= 1e-12 * max(t, 1.0)

    @settings(deadline=None, max_examples=100)
    @given(st.floats(min_value=0.0, max_value=20.0))
    def test_roundtrip_property(self, x):
        t = psi(x)
        assert abs(psi_inv(t) - x) <= 1e-10 * max(x, 1.0)

    def test_strictly_increasing(self):
        xs = np.linspace(0.0, 20.0, 400)
        vals = [psi(x) for x in xs]
        assert all(vals[i] < vals[i + 1] for i in range(len(vals) - 1))


class TestPhiDelta:
    def test_branches(self):
        assert phi_delta(0.25, 1.0) == 1.0
        assert phi_delta(4.0, 1.0) == 0.5

    def test_continuous_at_joint(self):
        for delta in (0.5, 1.0, 3.0):
            assert phi_delta(delta, delta) == pytest.approx(1 / math.sqrt(delta), rel=1e-15)
            below = phi_delta(delta * (1 - 1e-12), delta)
            above = phi_delta(delta * (1 + 1e-12), delta)
            assert abs(below - above) < 1e-6

    @settings(deadline=None, max_examples=100)
    @given(st.floats(min_value=0, max_value=1e6),
           st.floats(min_value=0, max_value=1e6),
           st.floats(min_value=1e-6, max_value=1e3))
    def test_nonincreasing_and_capped(self, x, y, delta):
        lo, hi = sorted((x, y))
        assert phi_delta(lo, delta) >= phi_delta(hi, delta)
        assert phi_delta(x, delta) <= 1 / math.sqrt(delta) + 1e-15


class TestGammaRate:
    def test_delta_one_argument_e(self):
        # (b - Re lam)(1 - eps) = e with delta = 1 gives gamma = 1
        p = BoundParams(lam=-math.e / 0.9, b=0.0, delta=1.0, eps=0.1)
        assert gamma_rate(p) == pytest.approx(1.0, abs=1e-12)

    def test_delta_four_argument_4e(self):
        # delta = 4 and (b - Re lam)(1 - eps) = 4e: psi_inv(e) = 1, sqrt(4) = 2
        p = BoundParams(lam=-4 * math.e / 0.9, b=0.0, delta=4.0, eps=0.1)
        assert gamma_rate(p) == pytest.approx(2.0, abs=1e-12)

    def test_vanishes_at_edge(self):
        gams = [gamma_rate(BoundParams(lam=-gap, b=0.0)) for gap in (1e-1, 1e-3, 1e-6)]
        assert gams[0] > gams[1] > gams[2] > 0.0
        assert gams[2] < 1e-2

    @settings(deadline=None, max_examples=80)
    @given(st.floats(min_value=-50, max_value=-1e-3),
           st.floats(min_value=-40, max_value=-1e-3))
    def test_monotone_in_re_lambda(self, lam1, lam2):
        lo, hi = sorted((lam1, lam2))
        g_lo = gamma_rate(BoundParams(lam=lo, b=0.0))
        g_hi = gamma_rate(BoundParams(lam=hi, b=0.0))
        assert g_lo >= g_hi - 1e-12

    @settings(deadline=None, max_examples=80)
    @given(st.floats(min_value=0.0, max_value=10.0),
           st.floats(min_value=0.0, max_value=10.0))
    def test_monotone_in_b(self, b1, b2):
        lo, hi = sorted((b1, b2))
        g_lo = gamma_rate(BoundParams(lam=-1.0, b=lo))
        g_hi = gamma_rate(BoundParams(lam=-1.0, b=hi))
        assert g_hi >= g_lo - 1e-12


class TestSimplifiedRate:
    def test_values(self):
        assert simplified_rate(BoundParams(lam=-1.0, b=0.0, eps=0.1)) == pytest.approx(0.9)
        assert simplified_rate(BoundParams(lam=-4.0, b=0.0, eps=0.5)) == pytest.approx(1.0)

    def test_ratio_near_edge(self):
        p = BoundParams(lam=-1e-3, b=0.0, delta=1.0, eps=0.1)
        ratio = gamma_rate(p) / simplified_rate(p)
        assert 0.95 <= ratio <= 1.05

    def test_simplified_regime_params_match_simplified_within_5pct(self):
        for gap in (0.5, 3.0, 40.0):
            p = BoundParams(lam=-gap, b=0.0, delta=1.0, eps=0.1)
            pc = simplified_regime_params(p)
            assert pc.gap * (1 - pc.eps) / pc.delta <= 0.01 + 1e-15
            target = math.sqrt(pc.gap * (1 - pc.eps))
            assert gamma_rate(pc) == pytest.approx(target, rel=0.05)
            assert gamma_rate(pc) <= target


class TestScalarEnvelope:
    def test_scalar_free_cumulative(self):
        env = scalar_envelope(scalar_free_family(),
                              BoundParams(lam=-3.0, b=-2.0), 6)
        assert np.allclose(env.cumulative, np.arange(6))

    def test_st_alpha06_s4(self):
        env = scalar_envelope(st_family(StParams(2, 2, 0.6)),
                              BoundParams(lam=-1.0, b=0.0), 4)
        want = 1 + 2 ** -0.3 + 3 ** -0.3
        assert env.cumulative[3] == pytest.approx(want, abs=1e-12)
        assert env.cumulative[3] == pytest.approx(2.5314754896811, abs=1e-10)

    def test_same_index_bound_is_one(self):
        env = scalar_envelope(scalar_free_family(),
                              BoundParams(lam=-3.0, b=-2.0), 5)
        assert env.bound(3, 3) == 1.0

    def test_increments_capped_by_delta(self):
        fam = diagonal_family([0.01], [0.0])  # tiny coupling: phi = 1/sqrt(delta)
        p = BoundParams(lam=-1.0, b=0.0, delta=0.25)
        env = scalar_envelope(fam, p, 10)
        inc = np.diff(env.cumulative)
        assert np.all(inc <= 1 / math.sqrt(p.delta) + 1e-15)
        assert np.all(inc >= 0)


class TestOperatorEnvelope:
    def test_antidiagonal_reduces_to_scalar(self):
        fam = st_family(StParams(2, 2, 0.6))
        p = BoundParams(lam=-1.0, b=0.0)
        weights = operator_envelope(fam, p, 6)
        env = scalar_envelope(fam, p, 6)
        for m, W in enumerate(weights, start=1):
            scalar = math.exp(env.gamma * env.cumulative[m - 1])
            assert np.abs(W - scalar * np.eye(2)).max() <= 1e-10 * scalar

    def test_first_weight_is_identity(self):
        fam = diagonal_family([1, 4], [0, 0])
        weights = operator_envelope(fam, BoundParams(lam=-1.0, b=0.0), 3)
        assert np.array_equal(weights[0], np.eye(2))

    def test_diagonal_entrywise_weight(self):
        # A_k = diag(1, 4), delta 1: phi values 1 and 1/2 per step
        fam = diagonal_family([1.0, 4.0], [0.0, 0.0])
        p = BoundParams(lam=-math.e / 0.9, b=0.0)  # gamma = 1
        W2 = operator_envelope(fam, p, 2)[1]
        assert np.allclose(np.diag(W2).real, [math.e, math.exp(0.5)], rtol=1e-12)

    def test_min_eig_dominates_scalar_weight(self):
        fam = diagonal_family([1.0, 4.0], [0.0, 0.0], aexp=0.3)
        p = BoundParams(lam=-2.0, b=0.0)
        weights = operator_envelope(fam, p, 8)
        env = scalar_envelope(fam, p, 8)
        for m, W in enumerate(weights, start=1):
            lo = np.linalg.eigvalsh(W)[0]
            scalar = math.exp(env.gamma * env.cumulative[m - 1])
            assert lo >= scalar * (1 - 1e-10)

    def test_noncommuting_family_rejected(self):
        fam = st_family(StParams(1, 4, 0.5))  # s != t: A and B do not commute
        with pytest.raises(CommutationError, match="do not commute"):
            operator_envelope(fam, BoundParams(lam=-1.0, b=0.0), 4)

    def test_commutation_check_names_pair(self):
        fam = st_family(StParams(1, 4, 0.5))
        with pytest.raises(CommutationError) as err:
            check_pairwise_commutation(fam, 3)
        assert err.value.first[0] in ("A", "B", "A*")
        assert isinstance(err.value.first[1], int)

    def test_commuting_family_accepted(self):
        check_pairwise_commutation(diagonal_family([1, 2], [3, 4], 0.5, 0.5), 12)
        check_pairwise_commutation(st_family(StParams(2, 2, 0.6)), 12)


class TestQualifiedConstant:
    def test_no_spectrum_below_collapses(self):
        p = BoundParams(lam=-1.0, b=0.0, eps=0.1)
        val = qualified_constant(scalar_free_family(), p, M=5,
                                 dist_sigma=1.0, min_eig_gap=0.0)
        assert val == pytest.approx(2.0 / (0.1 * 1.0))

    def test_zero_cutoff_collapses_exponential(self):
        p = BoundParams(lam=-1.0, b=0.0, eps=0.1)
        ratio = 0.5
        val = qualified_constant(scalar_free_family(), p, M=0,
                                 dist_sigma=1.0, min_eig_gap=ratio)
        assert val == pytest.approx(2.0 * (1 + ratio) / 0.1)

    def test_monotone_in_cutoff(self):
        fam = st_family(StParams(2, 2, 0.6))
        p = BoundParams(lam=-1.0, b=0.0, delta=1.0, eps=0.1)
        vals = [qualified_constant(fam, p, M=M, dist_sigma=1.0, min_eig_gap=0.5)
                for M in (1, 5, 10, 20)]
        assert all(v > 0 and np.isfinite(v) for v in vals)
        assert all(vals[i] < vals[i + 1] for i in range(len(vals) - 1))

    def test_rejects_bad_inputs(self):
        p = BoundParams(lam=-1.0, b=0.0)
        with pytest.raises(ValueError):
            qualified_constant(scalar_free_family(), p, M=-1,
                               dist_sigma=1.0, min_eig_gap=0.0)
        with pytest.raises(ValueError):
            qualified_constant(scalar_free_family(), p, M=1,
                               dist_sigma=0.0, min_eig_gap=0.0)


class TestSpectralNormOfFamilies:
    def test_st_offdiag_norm(self):
        fam = st_family(StParams(2, 2, 0.6))
        from blockjacobi import block_entries
        for n in (1, 2, 9):
            A, _ = block_entries(fam, n)
            assert spectral_norm(A) == pytest.approx(n ** 0.6, rel=1e-12)
