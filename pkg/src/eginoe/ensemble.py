"""Sampling of the elliptic ensemble and Monte Carlo counting of real
eigenvalues, with structural counting from the real quasi-triangular form.

Reproducibility contract: trial t draws from a Philox stream with key = seed
and counter = (0,0,0,t); Gaussians come from the polar method, so each trial
is an isolated deterministic stream and the histogram is a pure function of
(n, tau, trials, seed) regardless of execution order or backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import BACKEND, kernels
from .exactprob import EnsembleParams
from .specfun import DomainError

__all__ = ["SampleConfig", "CountHistogram", "sample_matrix", "count_real_eigs", "run_mc", "BACKEND"]

_TRIALS_GUARD = 10**8


@dataclass(frozen=True)
class SampleConfig:
    params: EnsembleParams
    trials: int
    seed: int

    def __post_init__(self):
        if not 1 <= self.trials <= _TRIALS_GUARD:
            raise DomainError(f"trials must be in [1, {_TRIALS_GUARD}]")


@dataclass(frozen=True)
class CountHistogram:
    counts: dict  # m -> tally
    trials: int

    def frequency(self, m: int) -> float:
        return self.counts.get(m, 0) / self.trials

    def ci95(self, m: int) -> tuple:
        """Normal-approximation binomial 95% interval for freq(m)."""
        p = self.frequency(m)
        half = 1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / self.trials)
        return (p - half, p + half)

    @property
    def mean(self) -> float:
        return sum(m * c for m, c in self.counts.items()) / self.trials

    @property
    def variance(self) -> float:
        mu = self.mean
        return sum((m - mu) ** 2 * c for m, c in self.counts.items()) / self.trials


def sample_matrix(params: EnsembleParams, seed: int, trial: int = 0) -> np.ndarray:
    """One draw of X = (sqrt(1+tau)/2)(G+G^T) + (sqrt(1-tau)/2)(G-G^T)."""
    return kernels.sample_matrix_kernel(params.n, params.tau, seed, trial)


def count_real_eigs(A: np.ndarray):
    """(count, spectrum) via Hessenberg + Francis double-shift reduction.

    The count is structural: 1x1 diagonal blocks of the quasi-triangular form
    (2x2 blocks with nonnegative discriminant split into two reals).
    """
    A = np.ascontiguousarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("count_real_eigs needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise DomainError("count_real_eigs needs finite entries")
    return kernels.count_real_eigs(A)


def run_mc(config: SampleConfig) -> CountHistogram:
    """Monte Carlo histogram of the real-eigenvalue count."""
    n = config.params.n
    hist = kernels.run_mc_kernel(n, config.params.tau, config.trials, config.seed)
    counts = {m: int(c) for m, c in enumerate(hist) if c}
    if any(m % 2 != n % 2 for m in counts):
        raise AssertionError("parity violation: real eigenvalue count must match n mod 2")
    return CountHistogram(counts, config.trials)
