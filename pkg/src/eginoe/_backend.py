"""Select the compiled kernel extension when available, else the pure-Python
reference implementation.  Both expose the same API and the same arithmetic.
"""

try:
    from . import _kernels as kernels

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build environment
    from . import _kernels_py as kernels

    HAVE_COMPILED = False

BACKEND = kernels.BACKEND

__all__ = ["kernels", "BACKEND", "HAVE_COMPILED"]
