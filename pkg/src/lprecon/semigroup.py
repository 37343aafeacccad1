"""Finite inverse semigroups, filters on their idempotents, and the tight groupoid of germs."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .groupoid import Groupoid, bisection_inv, bisection_label, bisection_mul, enumerate_bisections, make_groupoid

#: Subset-enumeration guard for the brute-force filter search.
FILTER_WORK_BOUND = 1 << 22
CLOSURE_BOUND = 4096


class NotAnInverseSemigroup(ValueError):
    pass


class ClosureBoundExceeded(RuntimeError):
    pass


@dataclass(eq=False)
class InvSemigroup:
    """A finite semigroup given by its multiplication table.

    ``elements`` are arbitrary hashable payloads (bisections, matrices, ...),
    ``names`` their printable labels. ``dagger`` is derived when omitted.
    """

    elements: tuple
    mul: np.ndarray
    dagger: np.ndarray | None = None
    names: tuple | None = None
    zero_adjoined: bool = False

    def __post_init__(self):
        self.mul = np.asarray(self.mul, dtype=np.int64)
        if self.names is None:
            self.names = tuple(str(e) for e in self.elements)
        if self.dagger is None:
            self.dagger = derive_dagger(self.mul)
        else:
            self.dagger = np.asarray(self.dagger, dtype=np.int64)

    def __len__(self):
        return len(self.elements)

    @cached_property
    def idempotents(self) -> list:
        return [e for e in range(len(self)) if self.mul[e, e] == e]

    @cached_property
    def zero(self) -> int | None:
        n = len(self)
        for z in range(n):
            if (self.mul[z, :] == z).all() and (self.mul[:, z] == z).all():
                return z
        return None

    def semilattice(self) -> Semilattice:
        return Semilattice(self, tuple(self.idempotents))

    def to_json(self) -> dict:
        return {
            "format": 1,
            "elements": list(self.names),
            "mul": self.mul.tolist(),
            "dagger": self.dagger.tolist(),
        }


def derive_dagger(mul) -> np.ndarray:
    """For each ``s`` the first ``t`` with ``sts = s`` and ``tst = t`` (``-1`` if none)."""
    mul = np.asarray(mul)
    n = len(mul)
    out = np.full(n, -1, dtype=np.int64)
    for s in range(n):
        for t in range(n):
            if mul[mul[s, t], s] == s and mul[mul[t, s], t] == t:
                out[s] = t
                break
    return out


def from_json(obj) -> InvSemigroup:
    mul = np.asarray(obj["mul"], dtype=np.int64)
    names = tuple(obj["elements"])
    n = len(names)
    if mul.shape != (n, n) or (mul < 0).any() or (mul >= n).any():
        raise ValueError("mul must be a total n×n table of element indices")
    dagger = obj.get("dagger")
    return InvSemigroup(names, mul, dagger, names)


def verify_inverse_semigroup(S: InvSemigroup) -> list:
    """Return violated criteria (empty iff ``S`` is an inverse semigroup).

    Checks associativity, existence of generalized inverses, commuting
    idempotents and, if a dagger table was supplied, that it lists
    generalized inverses.
    """
    out = []
    M = S.mul
    n = len(S)
    if n == 0:
        return out
    # (ab)c vs a(bc) for all triples at once
    left = M[M, :]            # left[a, b, c] = M[M[a, b], c]
    right = M[:, M]           # right[a, b, c] = M[a, M[b, c]]
    bad = np.argwhere(left != right)
    if len(bad):
        a, b, c = bad[0]
        out.append(f"associativity fails at ({S.names[a]}, {S.names[b]}, {S.names[c]})")
        return out
    gi = derive_dagger(M)
    missing = [S.names[s] for s in range(n) if gi[s] < 0]
    if missing:
        out.append(f"no generalized inverse for {missing}")
    E = S.idempotents
    for e, f in itertools.combinations(E, 2):
        if M[e, f] != M[f, e]:
            out.append(f"idempotents do not commute: {S.names[e]}, {S.names[f]}")
            break
    D = S.dagger
    if len(D) != n:
        out.append("dagger table has wrong length")
    else:
        for s in range(n):
            t = D[s]
            if not (0 <= t < n and M[M[s, t], s] == s and M[M[t, s], t] == t):
                out.append(f"dagger of {S.names[s]} is not a generalized inverse")
                break
    return out


def from_bisections(g: Groupoid) -> InvSemigroup:
    bis = enumerate_bisections(g)
    index = {B: k for k, B in enumerate(bis)}
    n = len(bis)
    mul = np.empty((n, n), dtype=np.int64)
    for i, A in enumerate(bis):
        for k, B in enumerate(bis):
            mul[i, k] = index[bisection_mul(g, A, B)]
    dagger = [index[bisection_inv(g, A)] for A in bis]
    return InvSemigroup(tuple(bis), mul, dagger, tuple(bisection_label(g, B) for B in bis))


def symmetric_inverse_monoid(n: int) -> InvSemigroup:
    """All partial injections of ``{0..n-1}`` under composition ``(st)(x) = s(t(x))``."""
    pts = range(n)
    maps = []
    for k in range(n + 1):
        for dom in itertools.combinations(pts, k):
            for img in itertools.permutations(pts, k):
                maps.append(tuple(sorted(zip(dom, img))))
    index = {m: i for i, m in enumerate(maps)}
    N = len(maps)
    mul = np.empty((N, N), dtype=np.int64)
    for i, s in enumerate(maps):
        sd = dict(s)
        for k, t in enumerate(maps):
            comp = tuple(sorted((x, sd[y]) for x, y in t if y in sd))
            mul[i, k] = index[comp]
    names = tuple("{" + ",".join(f"{x}>{y}" for x, y in m) + "}" for m in maps)
    return InvSemigroup(tuple(maps), mul, None, names)


def left_zero_semigroup(n: int = 2) -> InvSemigroup:
    mul = np.array([[i] * n for i in range(n)])
    return InvSemigroup(tuple(range(n)), mul, None, tuple("ab"[:n]) if n <= 2 else None)


def group_with_zero(table, names=None) -> InvSemigroup:
    """Adjoin an absorbing zero to a group table; the zero gets the last index."""
    table = np.asarray(table, dtype=np.int64)
    n = len(table)
    mul = np.full((n + 1, n + 1), n, dtype=np.int64)
    mul[:n, :n] = table
    names = tuple(names) if names else tuple(str(i) for i in range(n))
    return InvSemigroup(tuple(range(n + 1)), mul, None, names + ("0",))


def adjoin_zero(S: InvSemigroup) -> InvSemigroup:
    n = len(S)
    mul = np.full((n + 1, n + 1), n, dtype=np.int64)
    mul[:n, :n] = S.mul
    dagger = np.append(S.dagger, n)
    return InvSemigroup(S.elements + ("0",), mul, dagger, S.names + ("0",), zero_adjoined=True)


# ---------------------------------------------------------------- semilattice and filters


@dataclass(eq=False)
class Semilattice:
    S: InvSemigroup
    elements: tuple

    def meet(self, e: int, f: int) -> int:
        return int(self.S.mul[e, f])

    def leq(self, e: int, f: int) -> bool:
        return self.S.mul[e, f] == e

    @cached_property
    def zero(self) -> int | None:
        for z in self.elements:
            if all(self.meet(z, e) == z for e in self.elements):
                return z
        return None

    @cached_property
    def nonzero(self) -> tuple:
        z = self.zero
        return tuple(e for e in self.elements if e != z)

    def up(self, e: int) -> frozenset:
        return frozenset(f for f in self.nonzero if self.leq(e, f))

    def down(self, e: int) -> tuple:
        return tuple(f for f in self.nonzero if self.leq(f, e))

    def is_filter(self, F) -> bool:
        F = frozenset(F)
        if not F or (self.zero in F):
            return False
        for e in F:
            if any(self.leq(e, f) and f not in F for f in self.nonzero):
                return False
        return all(self.meet(e, f) in F for e in F for f in F)


def all_filters(L: Semilattice) -> list:
    """Every filter, found by testing each subset of nonzero idempotents."""
    items = L.nonzero
    if (1 << len(items)) > FILTER_WORK_BOUND:
        raise RuntimeError(f"{len(items)} idempotents is too many for subset enumeration")
    out = []
    for k in range(1, len(items) + 1):
        for sub in itertools.combinations(items, k):
            if L.is_filter(sub):
                out.append(frozenset(sub))
    return out


def _sorted_filters(fs):
    return sorted(set(fs), key=lambda F: (len(F), sorted(F)))


def maximal_filters(L: Semilattice) -> list:
    fs = all_filters(L)
    return _sorted_filters(F for F in fs if not any(F < G for G in fs))


def minimal_principal_filters(L: Semilattice) -> list:
    """``↑e`` for each minimal nonzero idempotent ``e``."""
    mins = [e for e in L.nonzero if not any(f != e and L.leq(f, e) for f in L.nonzero)]
    return _sorted_filters(L.up(e) for e in mins)


def ultrafilters(L: Semilattice) -> list:
    """Maximal filters; checked against the principal filters of minimal idempotents."""
    a, b = maximal_filters(L), minimal_principal_filters(L)
    if a != b:
        raise AssertionError(f"ultrafilter characterizations disagree: {a} vs {b}")
    return a


def is_cover(L: Semilattice, e: int, C) -> bool:
    """``C`` (elements below ``e``) is an outer cover of ``e``: every nonzero ``g ≤ e`` meets some member."""
    z = L.zero
    return all(any(L.meet(g, f) != z for f in C) for g in L.down(e))


def is_tight(L: Semilattice, F) -> bool:
    for e in F:
        below = L.down(e)
        for k in range(1, len(below) + 1):
            for C in itertools.combinations(below, k):
                if not (set(C) & F) and is_cover(L, e, C):
                    return False
    return True


def tight_filters(L: Semilattice) -> list:
    """Filters satisfying the cover condition, computed from all filters independently of maximality."""
    return _sorted_filters(F for F in all_filters(L) if is_tight(L, F))


# ---------------------------------------------------------------- germs


@dataclass
class TightGroupoid:
    groupoid: Groupoid
    filters: list
    germs: list                    # (canonical s, filter index) per arrow
    zero_adjoined: bool = False
    notes: list = field(default_factory=list)


def _theta(S: InvSemigroup, L: Semilattice, s: int, F: frozenset) -> frozenset:
    """``θ_s(F)``: up-closure of ``{s f s† : f ∈ F, f ≤ s†s}``."""
    M, d = S.mul, S.dagger
    ss = M[d[s], s]
    imgs = {int(M[M[s, f], d[s]]) for f in F if L.leq(f, ss)}
    return frozenset(x for x in L.nonzero if any(L.leq(i, x) for i in imgs))


def tight_groupoid(S: InvSemigroup) -> TightGroupoid:
    """Groupoid of germs of the action of ``S`` on its tight filters.

    Arrows are classes ``[s, φ]`` with ``s†s ∈ φ``, where ``[s, φ] = [t, φ]``
    iff ``se = te`` for some ``e ∈ φ``; each class is stored under its least
    element index. Units are tight filters.
    """
    violations = verify_inverse_semigroup(S)
    if violations:
        raise NotAnInverseSemigroup("; ".join(violations))
    notes = []
    adjoined = False
    if S.zero is None:
        S = adjoin_zero(S)
        adjoined = True
        notes.append("zero adjoined before filter computation")
    L = S.semilattice()
    tight = tight_filters(L)
    if tight != ultrafilters(L):
        raise AssertionError("tight filters differ from ultrafilters on a finite semilattice")
    findex = {F: k for k, F in enumerate(tight)}
    M, d = S.mul, S.dagger
    n = len(S)

    germs = []
    gindex = {}
    for k, F in enumerate(tight):
        for s in range(n):
            if M[d[s], s] not in F:
                continue
            rep = next(t for t in range(n) if M[d[t], t] in F and any(M[s, e] == M[t, e] for e in F))
            if (rep, k) not in gindex:
                gindex[(rep, k)] = len(germs)
                germs.append((rep, k))

    def germ_of(s, k):
        F = tight[k]
        rep = next(t for t in range(n) if M[d[t], t] in F and any(M[s, e] == M[t, e] for e in F))
        return gindex[(rep, k)]

    rng_f = []
    for s, k in germs:
        Fr = _theta(S, L, s, tight[k])
        if Fr not in findex:
            raise AssertionError("θ_s does not map tight filters to tight filters")
        rng_f.append(findex[Fr])
    # unit germs: [e, φ] for an idempotent e ∈ φ
    unit_germ = []
    for k, F in enumerate(tight):
        e = min(F)
        unit_germ.append(germ_of(e, k))
    N = len(germs)
    source = [unit_germ[k] for (_, k) in germs]
    range_ = [unit_germ[r] for r in rng_f]
    C = np.full((N, N), -1, dtype=np.int64)
    for a, (s, ks) in enumerate(germs):
        for b, (t, kt) in enumerate(germs):
            if rng_f[b] == ks:
                C[a, b] = germ_of(int(M[s, t]), kt)
    inv = [germ_of(int(d[s]), rng_f[a]) for a, (s, k) in enumerate(germs)]
    names = [f"[{S.names[s]}@{k}]" for (s, k) in germs]
    g = make_groupoid(names, sorted(set(unit_germ)), source, range_, C, inv, label="G_tight")
    return TightGroupoid(g, tight, germs, adjoined, notes)


def germ_relation_transitive(S: InvSemigroup, F: frozenset) -> bool:
    """Check that ``s ~ t iff ∃e∈F: se = te`` is transitive on ``{s : s†s ∈ F}``."""
    M, d = S.mul, S.dagger
    dom = [s for s in range(len(S)) if M[d[s], s] in F]

    def rel(s, t):
        return any(M[s, e] == M[t, e] for e in F)

    return all(rel(a, c) for a in dom for b in dom for c in dom if rel(a, b) and rel(b, c))


# ---------------------------------------------------------------- normalizers


def _key(x, digits=8):
    c = np.round(x.coeffs, digits) + 0.0  # +0.0 folds -0.0 into 0.0
    return c.tobytes()


def _member(x, family, tol):
    return any(x.close_to(y, tol) for y in family)


def normalizes(ctx, a, E: list, tol: float = 1e-9) -> bool:
    """``a†a, aa† ∈ E`` and ``a†Ea, aEa† ⊆ E`` (membership up to ``tol``)."""
    from .structure import mp_inverse

    ad = mp_inverse(ctx, a)
    if ad is None:
        return False
    if not (_member(ad * a, E, tol) and _member(a * ad, E, tol)):
        return False
    return all(_member(ad * e * a, E, tol) and _member(a * e * ad, E, tol) for e in E)


def normalizer_semigroup(ctx, elements: list, E: list, tol: float = 1e-9,
                         bound: int = CLOSURE_BOUND) -> InvSemigroup:
    """Inverse semigroup of normalizers of the idempotent family ``E``.

    Keeps ``a`` with ``a†a, aa† ∈ E`` and ``a†Ea, aEa† ⊆ E``, then closes
    the kept set under products and daggers (deduplicated by rounding to
    8 decimals). Raises :class:`ClosureBoundExceeded` if the closure
    outgrows ``bound``.
    """
    from .structure import mp_inverse

    kept, index = [], {}

    def add(x):
        k = _key(x)
        if k in index:
            return False
        index[k] = len(kept)
        kept.append(x)
        if len(kept) > bound:
            raise ClosureBoundExceeded(f"normalizer closure exceeded {bound} elements")
        return True

    for a in elements:
        if normalizes(ctx, a, E, tol):
            add(a)
    frontier = list(kept)
    while frontier:
        new = []
        for a in frontier:
            cands = [mp_inverse(ctx, a)]
            for b in list(kept):
                cands += [a * b, b * a]
            for x in cands:
                if add(x):
                    new.append(x)
        frontier = new

    def find(x):
        k = index.get(_key(x))
        if k is None or not x.close_to(kept[k], tol):
            raise AssertionError("closure is not closed")
        return k

    n = len(kept)
    mul = np.empty((n, n), dtype=np.int64)
    for i, a in enumerate(kept):
        for k, b in enumerate(kept):
            mul[i, k] = find(a * b)
    dagger = [find(mp_inverse(ctx, a)) for a in kept]
    return InvSemigroup(tuple(kept), mul, np.array(dagger, dtype=np.int64),
                        tuple(f"n{i}" for i in range(n)))
