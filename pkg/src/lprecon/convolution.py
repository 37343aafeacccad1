"""The convolution *-algebra C_c(G) of a finite groupoid."""
from __future__ import annotations

import numbers

import numpy as np

from .groupoid import Groupoid


class ContextMismatch(ValueError):
    pass


class AlgElem:
    """A function on the arrows of ``g``, stored as a dense complex vector.

    ``a * b`` is convolution when both operands are elements and scaling
    when one is a number; ``a.star()`` is the involution.
    """

    __slots__ = ("g", "coeffs")
    __array_priority__ = 100

    def __init__(self, g: Groupoid, coeffs):
        c = np.asarray(coeffs, dtype=np.complex128)
        if c.shape != (g.n,):
            raise ValueError(f"expected {g.n} coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        self.g = g
        self.coeffs = c

    def _check(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        if other.g is not self.g:
            raise ContextMismatch("elements belong to different groupoids")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgElem(self.g, self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgElem(self.g, self.coeffs - other.coeffs)

    def __neg__(self):
        return AlgElem(self.g, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return AlgElem(self.g, self.coeffs * other)
        if self._check(other) is NotImplemented:
            return NotImplemented
        return convolve(self.g, self, other)

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return AlgElem(self.g, other * self.coeffs)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return AlgElem(self.g, self.coeffs / other)
        return NotImplemented

    def star(self) -> AlgElem:
        return involution(self.g, self)

    def support(self, tol: float = 0.0) -> frozenset:
        return frozenset(int(x) for x in np.flatnonzero(np.abs(self.coeffs) > tol))

    def sup_norm(self) -> float:
        return float(np.abs(self.coeffs).max(initial=0.0))

    def close_to(self, other, tol: float = 1e-9) -> bool:
        self._check(other)
        return bool(np.abs(self.coeffs - other.coeffs).max(initial=0.0) <= tol)

    def __repr__(self):
        terms = [f"{complex(v):.4g}·{self.g.names[x]}" for x, v in enumerate(self.coeffs) if v != 0]
        return "AlgElem(" + (" + ".join(terms) or "0") + ")"


def convolve(g: Groupoid, f1: AlgElem, f2: AlgElem) -> AlgElem:
    """``(f1 ∗ f2)(x) = Σ_{y ∈ G_{s(x)}} f1(x y⁻¹) f2(y)``, summed over composable pairs."""
    if f1.g is not g or f2.g is not g:
        raise ContextMismatch("elements belong to a different groupoid")
    a, b, ab = g.composable
    out = np.zeros(g.n, dtype=np.complex128)
    np.add.at(out, ab, f1.coeffs[a] * f2.coeffs[b])
    return AlgElem(g, out)


def involution(g: Groupoid, f: AlgElem) -> AlgElem:
    """``f*(x) = conj(f(x⁻¹))``."""
    if f.g is not g:
        raise ContextMismatch("element belongs to a different groupoid")
    return AlgElem(g, np.conj(f.coeffs[g.inv]))


def i_norm(g: Groupoid, f: AlgElem) -> float:
    """Max over units of the source-fiber and range-fiber l^1 sums."""
    a = np.abs(f.coeffs)
    k = len(g.units)
    by_source = np.bincount(g.source_idx, weights=a, minlength=k)
    by_range = np.bincount(g.range_idx, weights=a, minlength=k)
    return float(max(by_source.max(initial=0.0), by_range.max(initial=0.0)))


def indicator(g: Groupoid, B) -> AlgElem:
    c = np.zeros(g.n, dtype=np.complex128)
    c[list(B)] = 1.0
    return AlgElem(g, c)


def delta(g: Groupoid, x: int, value: complex = 1.0) -> AlgElem:
    c = np.zeros(g.n, dtype=np.complex128)
    c[x] = value
    return AlgElem(g, c)


def zero(g: Groupoid) -> AlgElem:
    return AlgElem(g, np.zeros(g.n))


def unit(g: Groupoid) -> AlgElem:
    """``1_{G^(0)}``, the multiplicative identity."""
    return indicator(g, g.units)


def on_units(g: Groupoid, values) -> AlgElem:
    """Element supported on ``G^(0)`` with ``values[k]`` at ``g.units[k]``."""
    c = np.zeros(g.n, dtype=np.complex128)
    c[list(g.units)] = values
    return AlgElem(g, c)


def random_element(g: Groupoid, rng: np.random.Generator, support=None) -> AlgElem:
    """Complex Gaussian coefficients, optionally restricted to ``support``."""
    c = rng.normal(size=g.n) + 1j * rng.normal(size=g.n)
    if support is not None:
        mask = np.zeros(g.n, dtype=bool)
        mask[list(support)] = True
        c[~mask] = 0
    return AlgElem(g, c)


def to_json(f: AlgElem) -> dict:
    return {f.g.names[x]: [float(v.real), float(v.imag)] for x, v in enumerate(f.coeffs)}


def from_json(g: Groupoid, obj: dict) -> AlgElem:
    c = np.zeros(g.n, dtype=np.complex128)
    for name, val in obj.items():
        re, im = val
        c[g.arrow(name)] = complex(re, im)
    return AlgElem(g, c)
