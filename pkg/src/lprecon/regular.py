"""Left regular representation on l^p(G), p-operator norms and the j-map.

Matrices act on column vectors indexed by arrows (or by the source fiber
``G_u`` for the per-unit representations). General p-norms come from
Boyd's power iteration and are certified lower bounds; ``p`` in
``{1, 2, inf}`` is computed exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .convolution import AlgElem, i_norm, involution
from .groupoid import Groupoid

RESTARTS = 32
MAX_ITER = 500
STEP_TOL = 1e-10
#: tolerance for anything that passes through the iterative solver
ITERATIVE_TOL = 1e-6


class NormConsistencyError(ArithmeticError):
    """Two independent descriptions of the same norm disagree."""


class NotInImage(ValueError):
    """Matrix does not commute with right convolutions, so it is not some λ(f)."""


@dataclass(frozen=True)
class PNorm:
    p: float

    def __post_init__(self):
        if not (self.p >= 1):
            raise ValueError(f"p must be >= 1, got {self.p}")

    @property
    def q(self) -> float:
        """Dual Hölder exponent."""
        if self.p == 1:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    @property
    def is_two(self) -> bool:
        return self.p == 2


def as_p(p) -> float:
    return PNorm(p.p if isinstance(p, PNorm) else float(p)).p


@dataclass
class NormResult:
    value: float
    exact: bool
    witness: np.ndarray | None = None
    iterations: int = 0
    converged: bool = True

    def __float__(self):
        return self.value

    @property
    def regime(self) -> str:
        return "exact" if self.exact else "iterative-1e-6"


def lambda_matrix(g: Groupoid, f: AlgElem) -> np.ndarray:
    """Matrix of ``ξ ↦ f ∗ ξ``: entry ``(x, y) = f(x y⁻¹)`` when ``s(x) = s(y)``."""
    n = g.n
    M = np.zeros((n, n), dtype=np.complex128)
    yinv = g.inv
    for x in range(n):
        for y in range(n):
            if g.source[x] == g.source[y]:
                M[x, y] = f.coeffs[g.compose[x, yinv[y]]]
    return M


def lambda_u_matrix(g: Groupoid, f: AlgElem, u: int) -> np.ndarray:
    """``λ_u(f)`` on ``l^p(G_u)``, rows/columns in the order of ``g.source_fiber(u)``."""
    fib = g.source_fiber(u)
    M = np.empty((len(fib), len(fib)), dtype=np.complex128)
    for i, x in enumerate(fib):
        for k, y in enumerate(fib):
            M[i, k] = f.coeffs[g.compose[x, g.inv[y]]]
    return M


def rho_point(g: Groupoid, y: int) -> np.ndarray:
    """Right convolution by ``1_y``: ``δ_x ↦ δ_{x y⁻¹}`` if ``s(x) = s(y)``, else 0."""
    R = np.zeros((g.n, g.n), dtype=np.complex128)
    yi = g.inv[y]
    for x in range(g.n):
        if g.source[x] == g.source[y]:
            R[g.compose[x, yi], x] = 1.0
    return R


def _starts(n: int, restarts: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rand = rng.normal(size=(n, restarts)) + 1j * rng.normal(size=(n, restarts))
    # basis vectors guarantee the result dominates every column norm
    return np.hstack([np.eye(n, dtype=np.complex128), rand])


def p_op_norm(M, p, *, restarts: int = RESTARTS, max_iter: int = MAX_ITER,
              tol: float = STEP_TOL, seed=0, force_iterative: bool = False) -> NormResult:
    """Operator norm of ``M`` on l^p.

    ``p = 1``: max column sum; ``p = inf``: max row sum; ``p = 2``: largest
    singular value. Other ``p`` (or ``force_iterative``) use Boyd's power
    iteration from ``restarts`` Gaussian starts plus the standard basis,
    returning the best value as a lower bound with its witness vector.
    """
    M = np.asarray(M, dtype=np.complex128)
    p = as_p(p)
    if M.size == 0:
        return NormResult(0.0, True)
    if not force_iterative:
        if p == 1:
            return NormResult(float(np.abs(M).sum(axis=0).max()), True)
        if math.isinf(p):
            return NormResult(float(np.abs(M).sum(axis=1).max()), True)
        if p == 2:
            return NormResult(float(np.linalg.norm(M, 2)), True)
    if p == 1 or math.isinf(p):
        raise ValueError("iterative solver needs 1 < p < inf")
    value, x, iters, conv = kernels.boyd_pnorm(M, p, _starts(M.shape[1], restarts, seed), max_iter, tol)
    return NormResult(value, False, x, iters, conv)


def fp_norm(g: Groupoid, f: AlgElem, p, seed=0) -> float:
    """Reduced norm ``sup_u ||λ_u(f)||_p``."""
    p = as_p(p)
    best = 0.0
    for u in g.units:
        best = max(best, p_op_norm(lambda_u_matrix(g, f, u), p, seed=seed).value)
    return best


def fp_norm_result(g: Groupoid, f: AlgElem, p, seed=0) -> NormResult:
    """Like :func:`fp_norm` but keeps the exactness flag and convergence status."""
    p = as_p(p)
    results = [p_op_norm(lambda_u_matrix(g, f, u), p, seed=seed) for u in g.units]
    top = max(results, key=lambda r: r.value)
    return NormResult(top.value, all(r.exact for r in results), top.witness,
                      max(r.iterations for r in results), all(r.converged for r in results))


def sym_norm(g: Groupoid, f: AlgElem, p, seed=0, check: bool = True) -> float:
    """``max(||f||_p, ||f*||_p)`` in the reduced L^p algebra.

    For ``1 < p < inf`` the same quantity is also computed as
    ``max(||f||_p, ||f||_q)`` and a disagreement beyond 1e-6 raises
    :class:`NormConsistencyError`. At ``p = 1`` the value is compared with
    the I-norm instead.
    """
    p = as_p(p)
    fp = fp_norm(g, f, p, seed)
    value = max(fp, fp_norm(g, involution(g, f), p, seed))
    if check:
        if p == 1 or math.isinf(p):
            other = i_norm(g, f)
        else:
            other = max(fp, fp_norm(g, f, PNorm(p).q, seed))
        if abs(value - other) > ITERATIVE_TOL * max(1.0, value):
            raise NormConsistencyError(f"symmetrized norm mismatch at p={p}: {value} vs {other}")
    return value


def j_map(g: Groupoid, M, check: bool = True, tol: float = 1e-9) -> AlgElem:
    """Renault's j-map ``j(M)(x) = M δ_{s(x)} evaluated at x``; inverts :func:`lambda_matrix`.

    With ``check`` the matrix must commute with every ``rho_point``.
    """
    M = np.asarray(M, dtype=np.complex128)
    if check:
        for y in range(g.n):
            R = rho_point(g, y)
            if np.abs(M @ R - R @ M).max() > tol:
                raise NotInImage(f"matrix does not commute with right convolution by {g.names[y]}")
    return AlgElem(g, M[np.arange(g.n), g.source])
