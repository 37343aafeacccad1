"""Finite groupoids stored as dense tables, their bisections, and isomorphism search."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import kernels

#: Default guard on ``2**len(arrows)`` for exhaustive bisection enumeration.
DEFAULT_WORK_BOUND = 1 << 20
#: Default node budget for the isomorphism backtracking search.
DEFAULT_SEARCH_BUDGET = 2_000_000

Bisection = frozenset


class WorkBoundExceeded(RuntimeError):
    pass


class SearchBudgetExceeded(RuntimeError):
    """The isomorphism search ran out of budget; says nothing about isomorphism."""


class GroupoidFormatError(ValueError):
    pass


class Violation(NamedTuple):
    axiom: str
    arrows: tuple

    def __str__(self):
        return f"{self.axiom}: {', '.join(map(str, self.arrows))}"


@dataclass(frozen=True, eq=False)
class Groupoid:
    """A finite groupoid on arrows ``0..n-1``.

    ``compose[x, y]`` is the id of ``xy`` or ``-1`` when undefined. Units
    are arrow ids; ``source``/``range`` map arrows to unit arrow ids.
    Instances are treated as immutable; build them through the constructors
    below or :func:`from_json`, then :func:`validate`.
    """

    names: tuple
    units: tuple
    source: np.ndarray
    range: np.ndarray
    compose: np.ndarray
    inv: np.ndarray
    label: str = field(default="")

    @property
    def n(self) -> int:
        return len(self.names)

    @cached_property
    def unit_index(self) -> dict:
        return {u: k for k, u in enumerate(self.units)}

    @cached_property
    def source_idx(self) -> np.ndarray:
        """Source map as positions in ``units`` rather than arrow ids."""
        return np.array([self.unit_index[int(s)] for s in self.source], dtype=np.int64)

    @cached_property
    def range_idx(self) -> np.ndarray:
        return np.array([self.unit_index[int(r)] for r in self.range], dtype=np.int64)

    @cached_property
    def composable(self) -> tuple:
        """Arrays ``(x, y, xy)`` over all composable pairs."""
        xs, ys = np.nonzero(self.compose >= 0)
        return xs, ys, self.compose[xs, ys]

    def source_fiber(self, u: int) -> list:
        """Arrows with source ``u`` (G_u), in id order."""
        return [x for x in range(self.n) if self.source[x] == u]

    def range_fiber(self, u: int) -> list:
        return [x for x in range(self.n) if self.range[x] == u]

    def is_unit(self, x: int) -> bool:
        return x in self.unit_index

    def mul(self, x: int, y: int) -> int | None:
        z = int(self.compose[x, y])
        return None if z < 0 else z

    def arrow(self, name) -> int:
        return self.names.index(name)

    def __repr__(self):
        tag = self.label or "Groupoid"
        return f"<{tag}: {self.n} arrows, {len(self.units)} units>"


def _derive_inverse(names, units, source, range_, compose):
    n = len(names)
    inv = np.full(n, -1, dtype=np.int64)
    for x in range(n):
        for y in range(n):
            if compose[x, y] == range_[x] and compose[y, x] == source[x]:
                inv[x] = y
                break
    return inv


def make_groupoid(names, units, source, range_, compose, inv=None, label="") -> Groupoid:
    """Assemble a :class:`Groupoid` from tables; derive ``inv`` when omitted.

    No validation is done here.
    """
    names = tuple(names)
    n = len(names)
    source = np.asarray(source, dtype=np.int64)
    range_ = np.asarray(range_, dtype=np.int64)
    compose = np.asarray(compose, dtype=np.int64).reshape(n, n)
    if inv is None:
        inv = _derive_inverse(names, units, source, range_, compose)
    inv = np.asarray(inv, dtype=np.int64)
    for arr in (source, range_, compose, inv):
        arr.setflags(write=False)
    return Groupoid(names, tuple(int(u) for u in units), source, range_, compose, inv, label)


def validate(g: Groupoid) -> list:
    """Check the groupoid axioms; return a list of :class:`Violation` (empty iff valid)."""
    out = []
    n = g.n
    units = set(g.units)
    nm = g.names
    for u in g.units:
        if not 0 <= u < n:
            out.append(Violation("unit is not an arrow", (u,)))
            return out
        if g.source[u] != u or g.range[u] != u:
            out.append(Violation("s(u) = r(u) = u fails for unit", (nm[u],)))
    for x in range(n):
        if int(g.source[x]) not in units or int(g.range[x]) not in units:
            out.append(Violation("source/range not a unit", (nm[x],)))
    if out:
        return out
    C = g.compose
    for x in range(n):
        for y in range(n):
            defined = C[x, y] >= 0
            if defined != (g.source[x] == g.range[y]):
                out.append(Violation("compose defined iff s(x) = r(y)", (nm[x], nm[y])))
            elif defined:
                z = C[x, y]
                if not 0 <= z < n:
                    out.append(Violation("product is not an arrow", (nm[x], nm[y])))
                elif g.source[z] != g.source[y] or g.range[z] != g.range[x]:
                    out.append(Violation("s(xy) = s(y), r(xy) = r(x) fails", (nm[x], nm[y])))
    if out:
        return out
    for x in range(n):
        if C[g.range[x], x] != x or C[x, g.source[x]] != x:
            out.append(Violation("unit law r(x)x = x = xs(x) fails", (nm[x],)))
    for x, y in zip(*np.nonzero(C >= 0)):
        xy = C[x, y]
        for z in range(n):
            if C[y, z] >= 0 and C[xy, z] != C[x, C[y, z]]:
                out.append(Violation("associativity", (nm[x], nm[y], nm[z])))
    for x in range(n):
        i = int(g.inv[x])
        if not 0 <= i < n:
            out.append(Violation("inverse missing", (nm[x],)))
            continue
        if C[x, i] != g.range[x]:
            out.append(Violation("x·inv(x) ≠ range", (nm[x], nm[i])))
        if C[i, x] != g.source[x]:
            out.append(Violation("inv·x ≠ source", (nm[x], nm[i])))
        if g.inv[i] != x:
            out.append(Violation("inv is not an involution", (nm[x], nm[i])))
    return out


def is_valid(g: Groupoid) -> bool:
    return not validate(g)


# ---------------------------------------------------------------- constructors


def from_group_table(table, names=None, label="") -> Groupoid:
    """One-unit groupoid from a group multiplication table; the identity is located by search."""
    table = np.asarray(table, dtype=np.int64)
    n = len(table)
    names = tuple(names) if names is not None else tuple(f"g{i}" for i in range(n))
    e = next(i for i in range(n) if all(table[i, j] == j for j in range(n)))
    return make_groupoid(names, [e], [e] * n, [e] * n, table, label=label)


def group_cyclic(n: int) -> Groupoid:
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return from_group_table(table, [f"{i}" for i in range(n)], label=f"Z_{n}")


def group_klein() -> Groupoid:
    elems = [(a, b) for a in range(2) for b in range(2)]
    table = [[elems.index(((a + c) % 2, (b + d) % 2)) for (c, d) in elems] for (a, b) in elems]
    return from_group_table(table, [f"{a}{b}" for a, b in elems], label="Z_2+Z_2")


def group_symmetric(n: int) -> Groupoid:
    perms = sorted(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    # (st)(k) = s(t(k))
    table = [[index[tuple(s[t[k]] for k in range(n))] for t in perms] for s in perms]
    names = ["".join(map(str, p)) for p in perms]
    return from_group_table(table, names, label=f"S_{n}")


def pair(n: int) -> Groupoid:
    """Pair groupoid on ``{1..n}``: arrow ``(i, j)`` goes from ``j`` to ``i``."""
    pts = range(1, n + 1)
    arrows = [(i, j) for i in pts for j in pts]
    idx = {a: k for k, a in enumerate(arrows)}
    units = [idx[(i, i)] for i in pts]
    source = [idx[(j, j)] for (_, j) in arrows]
    range_ = [idx[(i, i)] for (i, _) in arrows]
    C = np.full((len(arrows), len(arrows)), -1, dtype=np.int64)
    for (i, j), a in idx.items():
        for (k, l), b in idx.items():
            if j == k:
                C[a, b] = idx[(i, l)]
    names = [f"({i},{j})" for (i, j) in arrows]
    return make_groupoid(names, units, source, range_, C, label=f"P{n}")


def disjoint_union(g: Groupoid, h: Groupoid) -> Groupoid:
    n, m = g.n, h.n
    names = [f"L{a}" for a in g.names] + [f"R{b}" for b in h.names]
    units = list(g.units) + [u + n for u in h.units]
    source = np.concatenate([g.source, h.source + n])
    range_ = np.concatenate([g.range, h.range + n])
    C = np.full((n + m, n + m), -1, dtype=np.int64)
    C[:n, :n] = g.compose
    hc = h.compose.copy()
    hc[hc >= 0] += n
    C[n:, n:] = hc
    inv = np.concatenate([g.inv, h.inv + n])
    return make_groupoid(names, units, source, range_, C, inv, label=f"{g.label}⊔{h.label}")


def action_groupoid(perms, names=None, label="") -> Groupoid:
    """Transformation groupoid of a permutation group acting on ``{0..m-1}``.

    ``perms`` lists the group elements as tuples (identity included, closed
    under composition). Arrow ``(g, x)`` goes from ``x`` to ``g·x``.
    """
    perms = [tuple(p) for p in perms]
    m = len(perms[0])
    ident = tuple(range(m))
    if ident not in perms:
        raise ValueError("group must contain the identity permutation")
    gi = {p: i for i, p in enumerate(perms)}
    arrows = [(gk, x) for gk in range(len(perms)) for x in range(m)]
    idx = {a: k for k, a in enumerate(arrows)}
    e = gi[ident]
    units = [idx[(e, x)] for x in range(m)]
    source = [idx[(e, x)] for (_, x) in arrows]
    range_ = [idx[(e, perms[gk][x])] for (gk, x) in arrows]
    C = np.full((len(arrows), len(arrows)), -1, dtype=np.int64)
    for (hk, y), a in idx.items():
        for (gk, x), b in idx.items():
            if perms[gk][x] == y:
                hg = tuple(perms[hk][perms[gk][k]] for k in range(m))
                if hg not in gi:
                    raise ValueError("permutations are not closed under composition")
                C[a, b] = idx[(gi[hg], x)]
    if names is None:
        names = [f"({gk},{x})" for (gk, x) in arrows]
    return make_groupoid(names, units, source, range_, C, label=label or "action")


# ---------------------------------------------------------------- JSON


def to_json(g: Groupoid) -> dict:
    nm = g.names
    return {
        "format": 1,
        "arrows": list(nm),
        "units": [nm[u] for u in g.units],
        "source": {nm[x]: nm[int(g.source[x])] for x in range(g.n)},
        "range": {nm[x]: nm[int(g.range[x])] for x in range(g.n)},
        "compose": [[nm[x], nm[y], nm[int(z)]] for x, y, z in zip(*g.composable)],
        "inverse": {nm[x]: nm[int(g.inv[x])] for x in range(g.n)},
    }


def from_json(obj) -> Groupoid:
    """Parse the JSON groupoid format (a dict or a JSON string).

    The inverse map is always derived from the composition table. If the
    document carries an ``inverse`` map it is kept as given so that
    :func:`validate` can report disagreement.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        fmt = obj.get("format", 1)
        if fmt != 1:
            raise GroupoidFormatError(f"unsupported format {fmt!r}")
        names = [str(a) for a in obj["arrows"]]
        if len(set(names)) != len(names):
            raise GroupoidFormatError("duplicate arrow names")
        idx = {a: k for k, a in enumerate(names)}
        units = [idx[u] for u in obj["units"]]
        source = [idx[obj["source"][a]] for a in names]
        range_ = [idx[obj["range"][a]] for a in names]
        C = np.full((len(names), len(names)), -1, dtype=np.int64)
        for x, y, z in obj["compose"]:
            C[idx[x], idx[y]] = idx[z]
        inv = None
        if "inverse" in obj:
            inv = [idx[obj["inverse"][a]] for a in names]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, GroupoidFormatError):
            raise
        raise GroupoidFormatError(f"malformed groupoid document: {exc!r}") from exc
    g = make_groupoid(names, units, source, range_, C, label=obj.get("label", ""))
    if inv is not None and not np.array_equal(g.inv, inv):
        g = make_groupoid(names, units, source, range_, C, inv=inv, label=g.label)
    return g


# ---------------------------------------------------------------- bisections


def is_bisection(g: Groupoid, A) -> bool:
    A = list(A)
    return len({int(g.source[a]) for a in A}) == len(A) == len({int(g.range[a]) for a in A})


def _bisection_key(B):
    return (len(B), sorted(B))


def enumerate_bisections(g: Groupoid, work_bound: int = DEFAULT_WORK_BOUND) -> list:
    """All bisections of ``g`` (``∅`` included), ordered by size then arrow ids.

    Refuses with :class:`WorkBoundExceeded` when ``2**g.n > work_bound``.
    """
    if g.n >= 63 or (1 << g.n) > work_bound:
        raise WorkBoundExceeded(f"2^{g.n} subsets exceeds work bound {work_bound}")
    masks = kernels.enumerate_bisection_masks(g.source_idx, g.range_idx, work_bound)
    out = [frozenset(i for i in range(g.n) if (m >> i) & 1) for m in masks]
    out.sort(key=_bisection_key)
    return out


def bisection_mul(g: Groupoid, A, B) -> Bisection:
    C = g.compose
    return frozenset(int(C[a, b]) for a in A for b in B if C[a, b] >= 0)


def bisection_inv(g: Groupoid, A) -> Bisection:
    return frozenset(int(g.inv[a]) for a in A)


def source_set(g: Groupoid, A) -> frozenset:
    return frozenset(int(g.source[a]) for a in A)


def range_set(g: Groupoid, A) -> frozenset:
    return frozenset(int(g.range[a]) for a in A)


def bisection_label(g: Groupoid, B) -> str:
    return "{" + ",".join(g.names[b] for b in sorted(B)) + "}"


# ---------------------------------------------------------------- isomorphism


def _isotropy_order(g: Groupoid, x: int) -> int:
    """Order of ``x`` in its isotropy group, 0 if ``x`` is not a loop."""
    if g.source[x] != g.range[x]:
        return 0
    u, y, k = int(g.source[x]), x, 1
    while y != u:
        y = int(g.compose[y, x])
        k += 1
    return k


def _arrow_invariants(g: Groupoid) -> list:
    fiber = np.bincount(g.source_idx, minlength=len(g.units))
    iso = {u: sum(1 for x in g.source_fiber(u) if g.range[x] == u) for u in g.units}
    return [
        (
            g.is_unit(x),
            _isotropy_order(g, x),
            int(fiber[g.source_idx[x]]),
            iso[int(g.source[x])],
            g.source[x] == g.range[x],
        )
        for x in range(g.n)
    ]


def is_isomorphism(g: Groupoid, h: Groupoid, phi: dict) -> bool:
    """Check that ``phi`` (arrow id → arrow id) is a bijective groupoid homomorphism."""
    if g.n != h.n or sorted(phi) != list(range(g.n)) or sorted(phi.values()) != list(range(h.n)):
        return False
    for x, y, z in zip(*g.composable):
        w = h.compose[phi[int(x)], phi[int(y)]]
        if w < 0 or w != phi[int(z)]:
            return False
    # composable pairs must be reflected too, else phi is not an isomorphism
    return len(g.composable[0]) == len(h.composable[0])


def groupoid_isomorphic(g: Groupoid, h: Groupoid, budget: int = DEFAULT_SEARCH_BUDGET) -> dict | None:
    """Search for an isomorphism ``g → h`` by backtracking.

    Returns a dict of arrow ids, or ``None`` if none exists. Units are
    placed first, pruned by fiber size and isotropy size; other arrows must
    match the images of their endpoints and respect every product among
    already-placed arrows. Raises :class:`SearchBudgetExceeded` when more
    than ``budget`` nodes are visited.
    """
    if g.n != h.n or len(g.units) != len(h.units) or len(g.composable[0]) != len(h.composable[0]):
        return None
    ig, ih = _arrow_invariants(g), _arrow_invariants(h)
    if sorted(ig) != sorted(ih):
        return None
    # units first, then arrows grouped by rarity of their invariant
    freq = {}
    for inv_ in ig:
        freq[inv_] = freq.get(inv_, 0) + 1
    order = sorted(range(g.n), key=lambda x: (not g.is_unit(x), freq[ig[x]], x))
    cands = {x: [y for y in range(h.n) if ih[y] == ig[x]] for x in range(g.n)}
    phi: dict = {}
    used = set()
    nodes = 0
    Cg, Ch = g.compose, h.compose

    def consistent(x, y):
        if not g.is_unit(x):
            if h.source[y] != phi[int(g.source[x])] or h.range[y] != phi[int(g.range[x])]:
                return False
        for a, b in phi.items():
            for (l, r, lb, rb) in ((x, a, y, b), (a, x, b, y)):
                c = Cg[l, r]
                if c >= 0:
                    if Ch[lb, rb] < 0:
                        return False
                    if int(c) in phi and Ch[lb, rb] != phi[int(c)]:
                        return False
                    if int(c) == x and Ch[lb, rb] != y:
                        return False
                elif Ch[lb, rb] >= 0:
                    return False
        return True

    def products_into(x, y):
        for a, b in itertools.product(phi, repeat=2):
            if Cg[a, b] == x and Ch[phi[a], phi[b]] != y:
                return False
        return True

    def rec(k):
        nonlocal nodes
        if k == len(order):
            return True
        x = order[k]
        for y in cands[x]:
            if y in used:
                continue
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded(f"isomorphism search exceeded {budget} nodes")
            if not consistent(x, y) or not products_into(x, y):
                continue
            phi[x] = y
            used.add(y)
            if rec(k + 1):
                return True
            del phi[x]
            used.discard(y)
        return False

    if not rec(0):
        return None
    result = dict(phi)
    assert is_isomorphism(g, h, result)
    return result


def relabel(g: Groupoid, perm, names=None) -> Groupoid:
    """Copy of ``g`` with arrow ``x`` renamed to position ``perm[x]``."""
    perm = list(perm)
    n = g.n
    invp = [0] * n
    for x, px in enumerate(perm):
        invp[px] = x
    new_names = [None] * n
    for x in range(n):
        new_names[perm[x]] = (names[x] if names else g.names[x])
    source = [perm[int(g.source[invp[k]])] for k in range(n)]
    range_ = [perm[int(g.range[invp[k]])] for k in range(n)]
    C = np.full((n, n), -1, dtype=np.int64)
    for x, y, z in zip(*g.composable):
        C[perm[x], perm[y]] = perm[int(z)]
    units = sorted(perm[u] for u in g.units)
    return make_groupoid(new_names, units, source, range_, C, label=g.label + "'")
