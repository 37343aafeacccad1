"""Hermitian elements, Moore–Penrose inverses and MP-partial isometries in C_c(G).

Every operation runs against an :class:`AlgebraContext` that fixes which
completion the algebra carries: the reduced L^p norm (``"fp"``), its
symmetrized version (``"symfp"``) or the I-norm (``"i"``).

Two tolerance regimes are used: algebraic identities at 1e-9 and anything
that passes through the iterative p-norm solver at 1e-6.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import convolution as cv
from .convolution import AlgElem
from .groupoid import (Groupoid, bisection_inv, bisection_label, bisection_mul, enumerate_bisections,
                       is_bisection)
from .regular import ITERATIVE_TOL, as_p, fp_norm, j_map, lambda_matrix, sym_norm

ALG_TOL = 1e-9
SUPPORT_TOL = 1e-12
EXP_GRID = (0.1, 0.3, 1.0, 3.0, 10.0)

CONTEXT_KINDS = ("fp", "symfp", "i")


class PEqualsTwo(ValueError):
    """Structure results need p ≠ 2; at p = 2 MP-partial isometries need not live on bisections."""


class HermitianDisagreement(AssertionError):
    """Structural and exponential tests of hermitian-ness disagree."""


class MPVerificationError(AssertionError):
    pass


class NotIdempotent(ValueError):
    pass


@dataclass(frozen=True)
class AlgebraContext:
    g: Groupoid
    kind: str = "fp"
    p: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CONTEXT_KINDS:
            raise ValueError(f"unknown context kind {self.kind!r}")
        object.__setattr__(self, "p", 1.0 if self.kind == "i" else as_p(self.p))

    def norm(self, f: AlgElem) -> float:
        if self.kind == "i":
            return cv.i_norm(self.g, f)
        if self.kind == "symfp":
            return sym_norm(self.g, f, self.p, self.seed)
        return fp_norm(self.g, f, self.p, self.seed)

    @property
    def exact(self) -> bool:
        """Whether :meth:`norm` is computed in closed form."""
        return self.kind == "i" or self.p in (1.0, 2.0)

    @property
    def tol(self) -> float:
        return ALG_TOL if self.exact else ITERATIVE_TOL

    def require_structure(self):
        if self.kind != "i" and self.p == 2:
            raise PEqualsTwo("p = 2 is excluded: the structure theorem needs p != 2")

    def __str__(self):
        return "I" if self.kind == "i" else f"{'SymFp' if self.kind == 'symfp' else 'Fp'}(p={self.p:g})"


# ---------------------------------------------------------------- hermitian elements


@dataclass
class HermitianVerdict:
    hermitian: bool
    structural: bool | None
    numerical: bool
    max_exp_norm: float

    def __bool__(self):
        return self.hermitian


def exp_i(ctx: AlgebraContext, f: AlgElem, t: float) -> AlgElem:
    """``exp(i t f)`` computed through λ and pulled back with the j-map."""
    return j_map(ctx.g, expm(1j * t * lambda_matrix(ctx.g, f)), check=False)


def structurally_hermitian(ctx: AlgebraContext, f: AlgElem, tol: float = ALG_TOL) -> bool:
    """Real-valued and supported on the unit space."""
    g = ctx.g
    off = np.ones(g.n, dtype=bool)
    off[list(g.units)] = False
    c = f.coeffs
    return bool(np.all(np.abs(c[off]) <= tol) and np.all(np.abs(c[~off].imag) <= tol))


def is_hermitian(ctx: AlgebraContext, f: AlgElem, numerical: bool = True) -> HermitianVerdict:
    """Decide whether ``||exp(itf)|| = 1`` for all real ``t``.

    Away from p = 2 both the structural characterization and the
    exponential grid test are evaluated; a disagreement raises
    :class:`HermitianDisagreement`. At p = 2 only the grid test applies.
    """
    structural = None if (ctx.kind != "i" and ctx.p == 2) else structurally_hermitian(ctx, f)
    worst = 1.0
    if numerical or structural is None:
        for t in EXP_GRID:
            for s in (t, -t):
                worst = max(worst, ctx.norm(exp_i(ctx, f, s)))
        num = worst <= 1.0 + ITERATIVE_TOL
    else:
        num = structural
    if structural is not None and structural != num:
        raise HermitianDisagreement(f"structural={structural}, exp-grid={num} (max norm {worst}) for {f}")
    return HermitianVerdict(num, structural, num, worst)


@dataclass
class Core:
    """The C*-core: functions on the unit space."""

    ctx: AlgebraContext
    basis: list
    cstar_defect: float = 0.0
    commutator_defect: float = 0.0

    def restrict(self, f: AlgElem) -> dict:
        """Core element → function on units, via the j-map values at units."""
        g = self.ctx.g
        if any(abs(f.coeffs[x]) > ALG_TOL for x in range(g.n) if not g.is_unit(x)):
            raise ValueError("element is not in the core")
        return {g.names[u]: complex(f.coeffs[u]) for u in g.units}

    @property
    def dim(self) -> int:
        return len(self.basis)


def core(ctx: AlgebraContext, samples: int = 20, seed: int = 0) -> Core:
    """Basis ``{δ_u}`` of the core plus C*-identity and commutativity defects on random samples."""
    ctx.require_structure()
    g = ctx.g
    basis = [cv.delta(g, u) for u in g.units]
    rng = np.random.default_rng(seed)
    cdef = comm = 0.0
    for _ in range(samples):
        x = cv.on_units(g, rng.normal(size=len(g.units)) + 1j * rng.normal(size=len(g.units)))
        y = cv.on_units(g, rng.normal(size=len(g.units)) + 1j * rng.normal(size=len(g.units)))
        nx = ctx.norm(x)
        cdef = max(cdef, abs(ctx.norm(x.star() * x) - nx * nx) / max(1.0, nx * nx))
        comm = max(comm, (x * y - y * x).sup_norm())
    return Core(ctx, basis, cdef, comm)


# ---------------------------------------------------------------- idempotents


def is_idempotent(f: AlgElem, tol: float = ALG_TOL) -> bool:
    return (f * f).close_to(f, tol)


@dataclass
class UltrahermitianVerdict:
    structural: bool
    sampled: bool
    worst: float
    witness: tuple | None = None


def is_ultrahermitian_idempotent(ctx: AlgebraContext, e: AlgElem, samples: int = 200,
                                 seed: int = 0) -> UltrahermitianVerdict:
    """Test ``||e a e + (1-e) b (1-e)|| ≤ 1`` on sampled contraction pairs.

    Samples include the unit, bisection indicators and normalized random
    elements. The structural verdict is "e is a {0,1}-valued function on units".
    """
    if not is_idempotent(e):
        raise NotIdempotent(f"{e} is not idempotent")
    g = ctx.g
    c = e.coeffs
    on_units = np.zeros(g.n, dtype=bool)
    on_units[list(g.units)] = True
    structural = bool(
        np.all(np.abs(c[~on_units]) <= ALG_TOL)
        and np.all(np.minimum(np.abs(c[on_units]), np.abs(c[on_units] - 1)) <= ALG_TOL)
    )
    one = cv.unit(g)
    f = one - e
    rng = np.random.default_rng(seed)
    pool = [one] + [cv.indicator(g, B) for B in enumerate_bisections(g) if B]
    pairs = [(a, b) for a in pool[:4] for b in pool[:4]]
    while len(pairs) < samples:
        a, b = cv.random_element(g, rng), cv.random_element(g, rng)
        pairs.append((a / ctx.norm(a), b / ctx.norm(b)))
    worst, witness = 0.0, None
    for a, b in pairs:
        val = ctx.norm(e * a * e + f * b * f)
        if val > worst:
            worst, witness = val, (a, b)
    return UltrahermitianVerdict(structural, worst <= 1.0 + ITERATIVE_TOL, worst, witness)


def hermitian_idempotents(g: Groupoid) -> list:
    """All ``1_X`` for ``X ⊆ G^(0)``."""
    k = len(g.units)
    out = []
    for mask in range(1 << k):
        out.append(cv.on_units(g, [(mask >> i) & 1 for i in range(k)]))
    return out


# ---------------------------------------------------------------- Moore–Penrose


def verify_mp(ctx: AlgebraContext, a: AlgElem, b: AlgElem, tol: float = ALG_TOL,
              numerical: bool = True) -> bool:
    """``a = aba``, ``b = bab`` and ``ab``, ``ba`` hermitian."""
    if not (a * b * a).close_to(a, tol) or not (b * a * b).close_to(b, tol):
        return False
    return bool(is_hermitian(ctx, a * b, numerical)) and bool(is_hermitian(ctx, b * a, numerical))


def mp_inverse(ctx: AlgebraContext, a: AlgElem, numerical: bool = False) -> AlgElem | None:
    """Closed-form Moore–Penrose inverse for bisection-supported ``a``.

    Returns ``b`` with ``b(x⁻¹) = 1 / a(x)`` on ``supp(a)``, or ``None``
    when the support is not a bisection (no closed form). The result is
    verified; failure raises :class:`MPVerificationError`.
    """
    g = ctx.g
    B = a.support(SUPPORT_TOL)
    if not is_bisection(g, B):
        return None
    c = np.zeros(g.n, dtype=np.complex128)
    for x in B:
        c[g.inv[x]] = 1.0 / a.coeffs[x]
    b = AlgElem(g, c)
    if not verify_mp(ctx, a, b, tol=ALG_TOL * max(1.0, b.sup_norm(), a.sup_norm()), numerical=numerical):
        raise MPVerificationError(f"closed-form inverse failed verification for {a}")
    return b


@dataclass
class MPDecomposition:
    bisection: frozenset
    phase: dict = field(default_factory=dict)

    def element(self, g: Groupoid) -> AlgElem:
        c = np.zeros(g.n, dtype=np.complex128)
        for x, z in self.phase.items():
            c[x] = z
        return AlgElem(g, c)

    def to_json(self, g: Groupoid) -> dict:
        arrows = sorted(self.bisection)
        return {
            "bisection": [g.names[x] for x in arrows],
            "phases": [[float(self.phase[x].real), float(self.phase[x].imag)] for x in arrows],
        }


def is_mp_partial_isometry(ctx: AlgebraContext, a: AlgElem, tol: float | None = None) -> MPDecomposition | None:
    """Return the (support, phase) decomposition if ``a`` is an MP-partial isometry, else ``None``.

    ``a`` qualifies when ``||a|| ≤ 1`` and its Moore–Penrose inverse exists
    with ``||a†|| ≤ 1``. Only bisection-supported elements can qualify away
    from p = 2, so other supports are rejected before any norm is computed.
    """
    ctx.require_structure()
    tol = ctx.tol if tol is None else tol
    B = a.support(SUPPORT_TOL)
    if not is_bisection(ctx.g, B):
        return None
    # sup norm is a lower bound for every norm in play
    if a.sup_norm() > 1.0 + tol or ctx.norm(a) > 1.0 + tol:
        return None
    b = mp_inverse(ctx, a)
    if b is None or b.sup_norm() > 1.0 + tol or ctx.norm(b) > 1.0 + tol:
        return None
    phases = {x: complex(a.coeffs[x]) for x in sorted(B)}
    bad = [x for x, z in phases.items() if abs(abs(z) - 1.0) > max(tol, ALG_TOL)]
    if bad:
        raise MPVerificationError(f"non-unimodular values on support at arrows {bad}")
    return MPDecomposition(frozenset(B), phases)


# ---------------------------------------------------------------- the semigroup PI_MP


@dataclass
class PIMPReport:
    closed_under_products: bool
    closed_under_dagger: bool
    dagger_antimultiplicative: bool
    compressions_hermitian_idempotent: bool
    normalizer_members: bool
    normalizer_valid: bool | None
    failures: list = field(default_factory=list)
    product_table: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return (self.closed_under_products and self.closed_under_dagger and self.dagger_antimultiplicative
                and self.compressions_hermitian_idempotent and self.normalizer_members
                and self.normalizer_valid is not False)


def _find(sample, x, tol=ALG_TOL):
    for k, s in enumerate(sample):
        if s.close_to(x, tol):
            return k
    return -1


def pi_mp_semigroup_check(ctx: AlgebraContext, sample: list, tol: float = ALG_TOL,
                          closure_bound: int = 512) -> PIMPReport:
    """Check the inverse-semigroup laws of MP-partial isometries on a finite sample.

    For all pairs: the product is again an MP-partial isometry,
    ``(ab)† = b†a†``; for each ``a`` and each hermitian idempotent ``e``
    (every ``1_X``, ``X ⊆ G^(0)``): ``a†ea`` is a hermitian idempotent.
    Every sample element must normalize those idempotents, and the
    normalizer semigroup generated by the sample must pass the
    inverse-semigroup verifier; ``normalizer_valid`` is ``None`` when that
    closure is infinite (exceeds ``closure_bound``).
    """
    from .semigroup import ClosureBoundExceeded, normalizer_semigroup, normalizes, verify_inverse_semigroup

    ctx.require_structure()
    failures = []
    daggers = []
    for a in sample:
        if is_mp_partial_isometry(ctx, a) is None:
            raise ValueError(f"sample element {a} is not an MP-partial isometry")
        daggers.append(mp_inverse(ctx, a))
    closed_prod = closed_dag = anti = comp = True
    for a, ad in zip(sample, daggers):
        if is_mp_partial_isometry(ctx, ad) is None:
            closed_dag = False
            failures.append(("dagger", a))
    n = len(sample)
    table = np.full((n, n), -1, dtype=np.int64)
    for i, (a, ad) in enumerate(zip(sample, daggers)):
        for k, (b, bd) in enumerate(zip(sample, daggers)):
            ab = a * b
            if is_mp_partial_isometry(ctx, ab) is None:
                closed_prod = False
                failures.append(("product", i, k))
                continue
            if not mp_inverse(ctx, ab).close_to(bd * ad, tol):
                anti = False
                failures.append(("(ab)† = b†a†", i, k))
            table[i, k] = _find(sample, ab, tol)
    idem = hermitian_idempotents(ctx.g)
    for i, (a, ad) in enumerate(zip(sample, daggers)):
        for e in idem:
            x = ad * e * a
            if not (is_idempotent(x, tol) and structurally_hermitian(ctx, x, tol)):
                comp = False
                failures.append(("a†ea", i))
    members = all(normalizes(ctx, a, idem, tol) for a in sample)
    if not members:
        failures.append(("normalizer membership",))
    try:
        N = normalizer_semigroup(ctx, sample, idem, tol, bound=closure_bound)
    except ClosureBoundExceeded:
        # generic phases generate an infinite group; only membership is decidable
        normalizer_ok = None
    else:
        normalizer_ok = not verify_inverse_semigroup(N)
    return PIMPReport(closed_prod, closed_dag, anti, comp, members, normalizer_ok, failures,
                      table if (table >= 0).all() else None)


# ---------------------------------------------------------------- homotopy classes


def homotopy_rep(ctx: AlgebraContext, a: AlgElem) -> frozenset:
    """Canonical representative of the homotopy class of ``a``: its support bisection."""
    d = is_mp_partial_isometry(ctx, a)
    if d is None:
        raise ValueError(f"{a} is not an MP-partial isometry")
    return d.bisection


def homotopy_path(ctx: AlgebraContext, a: AlgElem, steps: int) -> list:
    """Samples ``h_{k/steps}`` of a path from ``a`` to ``1_{supp(a)}``.

    Each arrow's phase ``e^{iθ}`` with ``θ ∈ (-π, π]`` is rotated to 1 as
    ``e^{i(1-t)θ}``; consecutive samples are within ``π/steps`` in sup norm.
    """
    d = is_mp_partial_isometry(ctx, a)
    if d is None:
        raise ValueError(f"{a} is not an MP-partial isometry")
    g = ctx.g
    arrows = sorted(d.bisection)
    theta = np.angle(np.array([d.phase[x] for x in arrows]))
    path = []
    for k in range(steps + 1):
        t = k / steps
        c = np.zeros(g.n, dtype=np.complex128)
        c[arrows] = np.exp(1j * (1.0 - t) * theta)
        path.append(AlgElem(g, c))
    return path


@dataclass
class SpiSemigroup:
    """S_pi with its identification ``Φ(B) = [1_B]`` from the bisection semigroup."""

    semigroup: object
    bisections: list
    phi_bijective: bool
    phi_multiplicative: bool


def spi_semigroup(ctx: AlgebraContext) -> SpiSemigroup:
    """Build the inverse semigroup of homotopy classes of MP-partial isometries.

    Classes are indexed by their support bisections. Each ``1_B`` is checked
    to be an MP-partial isometry; the product of classes is computed by
    convolving representatives and reading off the support, then compared
    against setwise bisection multiplication.
    """
    from .semigroup import InvSemigroup

    ctx.require_structure()
    g = ctx.g
    bis = enumerate_bisections(g)
    index = {B: k for k, B in enumerate(bis)}
    reps = [cv.indicator(g, B) for B in bis]
    classes = []
    for a in reps:
        classes.append(homotopy_rep(ctx, a))
    bijective = len(set(classes)) == len(bis) and all(c == B for c, B in zip(classes, bis))
    n = len(bis)
    mul = np.empty((n, n), dtype=np.int64)
    multiplicative = True
    for i in range(n):
        for k in range(n):
            supp = (reps[i] * reps[k]).support(SUPPORT_TOL)
            mul[i, k] = index[supp]
            if supp != bisection_mul(g, bis[i], bis[k]):
                multiplicative = False
    dagger = np.array([index[frozenset((reps[i].star()).support(SUPPORT_TOL))] for i in range(n)])
    if any(bis[dagger[i]] != bisection_inv(g, bis[i]) for i in range(n)):
        multiplicative = False
    S = InvSemigroup(tuple(bis), mul, dagger, names=tuple(bisection_label(g, B) for B in bis))
    return SpiSemigroup(S, bis, bijective, multiplicative)


def random_phase_element(g: Groupoid, B, rng: np.random.Generator) -> AlgElem:
    """``e^{iθ(x)}`` on ``B`` with uniform random phases, 0 elsewhere."""
    c = np.zeros(g.n, dtype=np.complex128)
    B = sorted(B)
    c[B] = np.exp(1j * rng.uniform(-math.pi, math.pi, size=len(B)))
    return AlgElem(g, c)
