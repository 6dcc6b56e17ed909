import math

import numpy as np
import pytest

from eginoe._backend import HAVE_COMPILED, kernels
from eginoe import _kernels_py
from eginoe.ensemble import CountHistogram, SampleConfig, count_real_eigs, run_mc, sample_matrix
from eginoe.exactprob import EnsembleParams, log_p_nm
from eginoe.specfun import DomainError


class TestSampleMatrix:
    def test_symmetric_at_tau_one(self):
        # kernel-level: weight of the antisymmetric part vanishes at tau = 1
        rng = np.random.default_rng(0)
        g = rng.normal(size=16)
        X = _kernels_py.build_elliptic(g, 4, 1.0)
        assert np.allclose(X, X.T, atol=1e-15)

    def test_ginoe_entry_variance(self):
        # tau = 0: i.i.d. standard normals
        p = EnsembleParams.strong(2, 0.0)
        entries = np.concatenate([sample_matrix(p, seed=11, trial=t).ravel() for t in range(25000)])
        se = math.sqrt(2.0 / len(entries))  # var of the sample variance estimator
        assert abs(entries.var() - 1.0) < 3 * se
        assert abs(entries.mean()) < 3 / math.sqrt(len(entries))

    def test_covariance_structure(self):
        tau = 0.5
        p = EnsembleParams.strong(2, tau)
        x12, x21, diag = [], [], []
        for t in range(30000):
            X = sample_matrix(p, seed=7, trial=t)
            x12.append(X[0, 1])
            x21.append(X[1, 0])
            diag.append(X[0, 0])
        x12, x21, diag = map(np.asarray, (x12, x21, diag))
        m = len(x12)
        assert abs(np.mean(x12 * x21) - tau) < 3 * math.sqrt(2.0 / m)
        assert abs(diag.var() - (1 + tau)) < 3 * (1 + tau) * math.sqrt(2.0 / m)
        assert abs(x12.var() - 1.0) < 3 * math.sqrt(2.0 / m)

    def test_determinism(self):
        p = EnsembleParams.strong(4, 0.3)
        a = sample_matrix(p, seed=5, trial=9)
        b = sample_matrix(p, seed=5, trial=9)
        assert np.array_equal(a, b)
        c = sample_matrix(p, seed=5, trial=10)
        assert not np.array_equal(a, c)


class TestCountRealEigs:
    def test_diagonal(self):
        cnt, eigs = count_real_eigs(np.diag([1.0, 2.0, 3.0, 4.0]))
        assert cnt == 4
        assert sorted(e.real for e in eigs) == pytest.approx([1, 2, 3, 4])

    def test_rotation(self):
        cnt, eigs = count_real_eigs(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        assert cnt == 0
        assert sorted(e.imag for e in eigs) == pytest.approx([-1.0, 1.0])

    def test_companion(self):
        # (x^2+1)(x-2)(x-3) = x^4 - 5x^3 + 7x^2 - 5x + 6
        coeffs = [1.0, -5.0, 7.0, -5.0, 6.0]
        C = np.zeros((4, 4))
        C[0, :] = [-c for c in coeffs[1:]]
        C[1:, :-1] = np.eye(3)
        cnt, eigs = count_real_eigs(C)
        assert cnt == 2
        reals = sorted(e.real for e in eigs if e.imag == 0)
        assert reals == pytest.approx([2.0, 3.0], rel=1e-8)

    def test_parity(self):
        p = EnsembleParams.strong(6, 0.25)
        for t in range(200):
            cnt, _ = count_real_eigs(sample_matrix(p, seed=21, trial=t))
            assert cnt % 2 == 0

    def test_spectrum_validity(self):
        rng = np.random.default_rng(2)
        for n in (2, 5, 8, 12):
            A = rng.normal(size=(n, n))
            cnt, eigs = count_real_eigs(A)
            norm = np.linalg.norm(A)
            assert sum(eigs).real == pytest.approx(np.trace(A), abs=1e-8 * max(norm, 1.0))
            assert abs(sum(eigs).imag) < 1e-8 * max(norm, 1.0)
            det = complex(np.prod(np.array(eigs)))
            assert det.real == pytest.approx(np.linalg.det(A), rel=1e-6)

    def test_against_numpy_spectrum(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            A = rng.normal(size=(8, 8))
            _, eigs = count_real_eigs(A)
            mine = np.sort_complex(np.array(eigs))
            ref = np.sort_complex(np.linalg.eigvals(A))
            assert np.allclose(mine, ref, atol=1e-7 * np.linalg.norm(A))

    def test_structural_count_matches_numpy(self):
        # counts must agree with numpy's spectrum for generic matrices
        rng = np.random.default_rng(8)
        for _ in range(100):
            A = rng.normal(size=(6, 6))
            cnt, _ = count_real_eigs(A)
            ref = int(np.sum(np.abs(np.linalg.eigvals(A).imag) < 1e-9))
            assert cnt == ref

    def test_n1(self):
        cnt, eigs = count_real_eigs(np.array([[3.5]]))
        assert cnt == 1 and eigs == [3.5 + 0j]

    def test_domain(self):
        with pytest.raises(DomainError):
            count_real_eigs(np.array([[1.0, 2.0]]))
        with pytest.raises(DomainError):
            count_real_eigs(np.array([[np.inf, 0.0], [0.0, 1.0]]))


class TestRunMc:
    def test_seed_determinism(self):
        cfg = SampleConfig(EnsembleParams.strong(4, 0.5), 3000, 42)
        h1 = run_mc(cfg)
        h2 = run_mc(cfg)
        assert h1.counts == h2.counts

    def test_seeds_differ(self):
        base = EnsembleParams.strong(4, 0.5)
        h1 = run_mc(SampleConfig(base, 3000, 1))
        h2 = run_mc(SampleConfig(base, 3000, 2))
        assert h1.counts != h2.counts

    def test_parity_of_support(self):
        h = run_mc(SampleConfig(EnsembleParams.strong(6, 0.0), 2000, 3))
        assert all(m % 2 == 0 for m in h.counts)

    def test_frequencies_sum_to_one(self):
        h = run_mc(SampleConfig(EnsembleParams.strong(4, 0.0), 5000, 9))
        assert sum(h.frequency(m) for m in h.counts) == pytest.approx(1.0)

    def test_n2_against_exact(self):
        trials = 40000
        h = run_mc(SampleConfig(EnsembleParams.strong(2, 0.0), trials, 17))
        exact = 1.0 / math.sqrt(2.0)
        se = math.sqrt(exact * (1 - exact) / trials)
        assert abs(h.frequency(2) - exact) < 4 * se

    def test_n4_against_exact(self):
        trials = 40000
        params = EnsembleParams.strong(4, 0.5)
        h = run_mc(SampleConfig(params, trials, 23))
        for l in range(3):
            ex = math.exp(log_p_nm(params, l).log)
            se = math.sqrt(ex * (1 - ex) / trials)
            assert abs(h.frequency(4 - 2 * l) - ex) < 4 * se

    def test_mean_consistency(self):
        from eginoe.exactprob import mean_count_exact

        params = EnsembleParams.strong(4, 0.25)
        trials = 30000
        h = run_mc(SampleConfig(params, trials, 31))
        mc = mean_count_exact(params)
        se = math.sqrt(mc.variance / trials)
        assert abs(h.mean - mc.mean) < 4 * se

    def test_trials_guard(self):
        with pytest.raises(DomainError):
            SampleConfig(EnsembleParams.strong(2, 0.0), 0, 1)

    def test_histogram_helpers(self):
        h = CountHistogram({0: 25, 2: 75}, 100)
        assert h.frequency(2) == 0.75
        lo, hi = h.ci95(2)
        assert lo < 0.75 < hi
        assert h.mean == pytest.approx(1.5)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernels unavailable")
class TestBackendEquivalence:
    def test_histograms_bit_identical(self):
        hc = kernels.run_mc_kernel(4, 0.5, 800, 7)
        hp = _kernels_py.run_mc_kernel(4, 0.5, 800, 7)
        assert np.array_equal(hc, hp)

    def test_matrices_bit_identical(self):
        a = kernels.sample_matrix_kernel(5, 0.3, 13, 2)
        b = _kernels_py.sample_matrix_kernel(5, 0.3, 13, 2)
        assert np.array_equal(a, b)

    def test_counts_match(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            A = rng.normal(size=(7, 7))
            cc, _ = kernels.count_real_eigs(np.ascontiguousarray(A))
            cp, _ = _kernels_py.count_real_eigs(A)
            assert cc == cp
