"""eginoe: real-eigenvalue counting statistics of the real elliptic Ginibre
ensemble.

Exact probabilities p_{n,m} through four independent routes, full asymptotic
coefficient engines for both large-n regimes, the GOE prekernel, the
electrostatic landscape of a complex-conjugate pair, and a reproducible
Monte Carlo sampler.
"""

from ._backend import BACKEND, HAVE_COMPILED
from .exactprob import EnsembleParams, Strong, Weak, log_p_nm, log_p_nn, mean_count_exact

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_COMPILED",
    "EnsembleParams",
    "Strong",
    "Weak",
    "log_p_nn",
    "log_p_nm",
    "mean_count_exact",
    "__version__",
]
