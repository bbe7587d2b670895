"""Backend dispatch for the O(N^2) oscillatory-kernel assembly.

The compiled extension is preferred when it imported cleanly; the NumPy
implementation is always available and produces identical results.  Set
``HARTREE_EXACT_FORCE_NUMPY=1`` to skip the extension (useful for
benchmarking and debugging).
"""

import os

from . import _numpy_impl

_IMPL = _numpy_impl
_BACKEND = "numpy"

if os.environ.get("HARTREE_EXACT_FORCE_NUMPY", "") not in ("1", "true", "yes"):
    try:
        from . import _core  # type: ignore[attr-defined]

        _IMPL = _core
        _BACKEND = "cython"
    except ImportError:
        pass

__all__ = ["build_kernel", "backend_name", "numpy_build_kernel"]


def backend_name() -> str:
    """Which kernel assembly implementation is active."""
    return _BACKEND


def build_kernel(x, y, X_t, X_s, P_t, P_s, dS, hbar, m_omega, cos_th, sin_th, pref):
    """Assemble ``K[i, j] = pref * exp(i phase(x_i, y_j))`` (see propagator)."""
    return _IMPL.build_kernel(
        x, y, X_t, X_s, P_t, P_s, dS, hbar, m_omega, cos_th, sin_th, pref
    )


def numpy_build_kernel(x, y, X_t, X_s, P_t, P_s, dS, hbar, m_omega, cos_th, sin_th, pref):
    """Always-NumPy variant, kept accessible for backend cross-checks."""
    return _numpy_impl.build_kernel(
        x, y, X_t, X_s, P_t, P_s, dS, hbar, m_omega, cos_th, sin_th, pref
    )
