"""Kernel dispatch: compiled extension when importable, NumPy fallback otherwise.

Set ``LPRECON_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

#: above this dimension the batched BLAS fallback beats the compiled loops
BOYD_COMPILED_MAX_DIM = 16

BACKEND = "python"
enumerate_bisection_masks = _pykernels.enumerate_bisection_masks
_boyd = _pykernels.boyd_pnorm

if os.environ.get("LPRECON_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        _boyd = _ckernels.boyd_pnorm
        enumerate_bisection_masks = _ckernels.enumerate_bisection_masks


def boyd_pnorm(M, p, starts, max_iter, tol):
    """``(value, witness, iterations, converged)``; see :func:`lprecon._pykernels.boyd_pnorm`."""
    if M.shape[1] > BOYD_COMPILED_MAX_DIM:
        return _pykernels.boyd_pnorm(M, p, starts, max_iter, tol)
    return _boyd(M, p, starts, max_iter, tol)
