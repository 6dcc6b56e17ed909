import math

import mpmath as mp
import numpy as np
import pytest

from eginoe.exactprob import (
    EnsembleParams,
    Strong,
    Weak,
    _entry_poly,
    log_p_nm,
    log_p_nn,
    mean_count_exact,
    ratio_l1_laguerre,
    ratio_l1_prefactored,
    rho_traces,
)
from eginoe.specfun import DomainError

SQRT2 = math.sqrt(2.0)


class TestParams:
    def test_validation(self):
        with pytest.raises(DomainError):
            EnsembleParams.strong(3, 0.5)
        with pytest.raises(DomainError):
            EnsembleParams.strong(4, 1.0)
        with pytest.raises(DomainError):
            EnsembleParams.weak(4, -1.0)
        with pytest.raises(DomainError):
            EnsembleParams.weak(4, 3.0)  # alpha^2 > n

    def test_effective_tau(self):
        assert EnsembleParams.weak(100, 1.0).tau == pytest.approx(0.99)
        assert EnsembleParams.strong(10, 0.3).tau == 0.3


class TestClosedForm:
    def test_n2(self):
        assert log_p_nn(EnsembleParams.strong(2, 0.0)).log == pytest.approx(-0.5 * math.log(2.0), rel=1e-15)

    def test_n4(self):
        assert math.exp(log_p_nn(EnsembleParams.strong(4, 0.0)).log) == pytest.approx(1.0 / 8.0, rel=1e-14)

    def test_goe_limit(self):
        # probability -> 1 as tau -> 1
        logs = [log_p_nn(EnsembleParams.strong(8, t)).log for t in (0.9, 0.99, 0.999)]
        assert logs[0] < logs[1] < logs[2] < 0
        assert math.exp(logs[2]) > 0.99

    def test_monotone_in_tau(self):
        for n in (2, 6, 20):
            vals = [log_p_nn(EnsembleParams.strong(n, t)).log for t in np.linspace(0.0, 0.95, 20)]
            assert all(a < b for a, b in zip(vals, vals[1:]))


class TestL1Routes:
    def test_laguerre_n2(self):
        v = ratio_l1_laguerre(EnsembleParams.strong(2, 0.0))
        assert v.to_real() == pytest.approx(SQRT2 - 1.0, rel=1e-10)

    def test_prefactored_n2(self):
        v = ratio_l1_prefactored(EnsembleParams.strong(2, 0.0))
        assert v.to_real() == pytest.approx(SQRT2 - 1.0, rel=1e-10)

    def test_goe_limit_small_ratio(self):
        # ratio -> 0 as tau -> 1
        r = ratio_l1_laguerre(EnsembleParams.strong(2, 0.9999))
        assert r.to_real() < 1e-2

    def test_cross_route(self):
        for n, tau in [(4, 0.0), (10, 0.5), (40, 0.25), (100, 0.75)]:
            a = ratio_l1_laguerre(EnsembleParams.strong(n, tau))
            b = ratio_l1_prefactored(EnsembleParams.strong(n, tau))
            assert abs(math.exp(a.log_abs - b.log_abs) - 1.0) < 1e-8

    def test_exact_n2_general_tau(self):
        # closed form: ratio = sqrt(2/(1+tau)) - 1
        for tau in (0.0, 0.3, 0.8):
            ref = math.sqrt(2.0 / (1.0 + tau)) - 1.0
            assert ratio_l1_laguerre(EnsembleParams.strong(2, tau)).to_real() == pytest.approx(ref, rel=1e-10)


def _entry_by_moment_recurrence(j, k, tau, dps=120):
    """Independent oracle: exact odd moments of e^{y^2} erfc(cy) by the
    integration-by-parts recurrence, combined with the entry polynomial."""
    with mp.workdps(dps):
        c = mp.sqrt(2 / (1 - mp.mpf(tau)))
        lam = c * c - 1
        poly = _entry_poly(j, k)
        pmax = poly[-1][0]
        M = {1: (c / mp.sqrt(lam) - 1) / 2}
        m = 1
        while 2 * m + 1 <= pmax:
            M[2 * m + 1] = -m * M[2 * m - 1] + c / (2 * mp.sqrt(mp.pi)) * mp.gamma(m + mp.mpf(1) / 2) / lam ** (
                m + mp.mpf(1) / 2
            )
            m += 1
        return float(mp.fsum(mp.mpf(cf.numerator) / cf.denominator * M[p] for p, cf in poly))


class TestRhoTraces:
    def test_n2_trace_is_ratio(self):
        rt = rho_traces(EnsembleParams.strong(2, 0.0), 1)
        assert rt.traces[0].to_real() == pytest.approx(SQRT2 - 1.0, rel=1e-10)

    def test_trace_equals_l1_routes(self):
        for n, tau in [(4, 0.0), (10, 0.5), (40, 0.75)]:
            rt = rho_traces(EnsembleParams.strong(n, tau), 1)
            r = ratio_l1_laguerre(EnsembleParams.strong(n, tau))
            assert abs(math.exp(rt.traces[0].log_abs - r.log_abs) - 1.0) < 1e-8

    def test_goe_limit(self):
        rt = rho_traces(EnsembleParams.strong(2, 0.9999), 1)
        assert rt.traces[0].to_real() < 1e-2

    def test_entries_vs_moment_recurrence(self):
        # full-matrix path (mp quadrature) against the recurrence oracle
        from eginoe.exactprob import _rho_matrix_mp

        for n, tau in [(6, 0.0), (8, 0.5)]:
            mat, err = _rho_matrix_mp(n, tau, dps=30)
            assert err < 1e-9
            for j in range(1, n // 2 + 1):
                for k in range(1, n // 2 + 1):
                    ref = _entry_by_moment_recurrence(j, k, tau)
                    assert float(mat[j - 1][k - 1]) == pytest.approx(ref, rel=1e-12)

    def test_entry_poly_positive_odd(self):
        for j in range(1, 8):
            for k in range(1, 8):
                poly = _entry_poly(j, k)
                assert all(p % 2 == 1 and p >= 1 and c > 0 for p, c in poly)

    def test_l_bounds(self):
        with pytest.raises(DomainError):
            rho_traces(EnsembleParams.strong(4, 0.0), 3)


class TestLogPnm:
    def test_delegation_l0(self):
        p = EnsembleParams.strong(6, 0.3)
        assert log_p_nm(p, 0).log == log_p_nn(p).log

    def test_n2_l1(self):
        lp = log_p_nm(EnsembleParams.strong(2, 0.0), 1)
        assert math.exp(lp.log) == pytest.approx(1.0 - 1.0 / SQRT2, rel=1e-10)

    def test_n4_l2_normalization(self):
        p = EnsembleParams.strong(4, 0.0)
        tot = sum(math.exp(log_p_nm(p, l).log) for l in range(3))
        assert tot == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("tau", [0.0, 0.25, 0.5, 0.75])
    @pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
    def test_normalization_grid(self, n, tau):
        p = EnsembleParams.strong(n, tau)
        tot = sum(math.exp(log_p_nm(p, l).log) for l in range(n // 2 + 1))
        assert tot == pytest.approx(1.0, abs=1e-6)

    def test_all_probabilities_in_unit_interval(self):
        p = EnsembleParams.strong(8, 0.5)
        for l in range(5):
            lp = log_p_nm(p, l)
            assert lp.log < 0.0
            assert 0.0 < math.exp(lp.log) < 1.0

    def test_verify_flag(self):
        lp = log_p_nm(EnsembleParams.strong(10, 0.5), 1, verify=True)
        assert not any(f.startswith("l1-route-disagreement") for f in lp.flags)

    def test_domain(self):
        with pytest.raises(DomainError):
            log_p_nm(EnsembleParams.strong(4, 0.0), 3)


class TestMeanCount:
    def test_n2(self):
        mc = mean_count_exact(EnsembleParams.strong(2, 0.0))
        assert mc.mean == pytest.approx(SQRT2, rel=1e-9)

    def test_goe_trend(self):
        mc = mean_count_exact(EnsembleParams.strong(2, 0.999))
        assert mc.mean > 1.99

    def test_variance_consistency(self):
        mc = mean_count_exact(EnsembleParams.strong(4, 0.5))
        ps = mc.probabilities
        mean = 4 * ps[0] + 2 * ps[1]
        assert mc.mean == pytest.approx(mean, rel=1e-12)
        assert mc.variance >= 0

    def test_n8_monte_carlo_oracle(self):
        # the distribution-based mean must match sampling
        from eginoe.ensemble import SampleConfig, run_mc

        params = EnsembleParams.strong(8, 0.0)
        mc = mean_count_exact(params)
        h = run_mc(SampleConfig(params, 40000, 77))
        assert abs(h.mean - mc.mean) < 4 * math.sqrt(mc.variance / 40000)

    def test_n8_asymptotic_sanity(self):
        # E N / (b(0) sqrt(n)) -> 1; at n = 8 the O(1) correction is ~ +0.39,
        # i.e. 17% of the leading term, so only a loose band can hold here
        mc = mean_count_exact(EnsembleParams.strong(8, 0.0))
        target = math.sqrt(2.0 / math.pi) * math.sqrt(8.0)
        assert 0.8 < mc.mean / target < 1.25

    def test_size_guard(self):
        with pytest.raises(DomainError):
            mean_count_exact(EnsembleParams.strong(14, 0.0))
