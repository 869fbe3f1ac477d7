"""Truncated x-derivative jets.

A :class:`Jet` stores ``(q, q_x, q_xx, ..., q^(K))`` for a quantity q whose
coefficients may be scalars, numpy arrays, mpmath numbers or 2×2 matrices
(numpy object arrays). Arithmetic follows the Leibniz rule and truncates
to the lower order of the operands, so formulas that consume derivatives
of intermediate quantities (ε₁₁ₓ, ε₁₂ₓₓ, ...) are evaluated exactly.
"""

from math import comb
from typing import Sequence

import numpy as np


class Jet:
    __slots__ = ("coeffs",)
    # ndarray operands defer to Jet's reflected operators
    __array_ufunc__ = None

    def __init__(self, coeffs: Sequence):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ValueError("a jet needs at least its value")
        self.coeffs = coeffs

    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        zero = value * 0
        return cls((value,) + (zero,) * order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self):
        return self.coeffs[0]

    def derivative(self, n: int):
        return self.coeffs[n]

    def dx(self) -> "Jet":
        if self.order == 0:
            raise ValueError("jet has no derivative left to take")
        return Jet(self.coeffs[1:])

    def truncate(self, order: int) -> "Jet":
        return Jet(self.coeffs[: order + 1])

    def map(self, fn) -> "Jet":
        return Jet(fn(c) for c in self.coeffs)

    def diag_part(self) -> "Jet":
        """Diagonal part of a matrix-valued jet."""
        return self.map(_diag_part)

    def __getitem__(self, index) -> "Jet":
        return self.map(lambda c: c[index])

    # -- linear operations -------------------------------------------------

    def __neg__(self) -> "Jet":
        return self.map(lambda c: -c)

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            return Jet(a + b for a, b in zip(self.coeffs[: order + 1], other.coeffs))
        return Jet((self.coeffs[0] + other,) + self.coeffs[1:])

    def __radd__(self, other) -> "Jet":
        return Jet((other + self.coeffs[0],) + self.coeffs[1:])

    def __sub__(self, other) -> "Jet":
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            return Jet(a - b for a, b in zip(self.coeffs[: order + 1], other.coeffs))
        return Jet((self.coeffs[0] - other,) + self.coeffs[1:])

    def __rsub__(self, other) -> "Jet":
        return Jet((other - self.coeffs[0],) + tuple(-c for c in self.coeffs[1:]))

    # -- products ------------------------------------------------------------

    def _leibniz(self, other: "Jet", product) -> "Jet":
        order = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        return Jet(
            _sum(comb(n, k) * product(a[k], b[n - k]) for k in range(n + 1))
            for n in range(order + 1)
        )

    def __mul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self._leibniz(other, lambda p, q: p * q)
        return self.map(lambda c: c * other)

    def __rmul__(self, other) -> "Jet":
        return self.map(lambda c: other * c)

    def __matmul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self._leibniz(other, lambda p, q: p @ q)
        return self.map(lambda c: c @ other)

    def __rmatmul__(self, other) -> "Jet":
        return self.map(lambda c: other @ c)

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self.map(lambda c: c / other)
        # h = a / b  =>  h_n = (a_n − Σ_{k≥1} C(n,k) b_k h_{n−k}) / b_0
        order = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        h = []
        for n in range(order + 1):
            acc = a[n]
            for k in range(1, n + 1):
                acc = acc - comb(n, k) * b[k] * h[n - k]
            h.append(acc / b[0])
        return Jet(h)

    def __rtruediv__(self, other) -> "Jet":
        return Jet.constant(other + self.coeffs[0] * 0, self.order) / self

    def __pow__(self, exponent: int) -> "Jet":
        if not isinstance(exponent, int) or exponent < 1:
            raise ValueError("jets support positive integer powers only")
        result = self
        for _ in range(exponent - 1):
            result = result * self
        return result

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, value={self.value!r})"


def _sum(terms):
    terms = iter(terms)
    total = next(terms)
    for term in terms:
        total = total + term
    return total


def _diag_part(matrix):
    out = matrix * 0
    out[0, 0] = matrix[0, 0]
    out[1, 1] = matrix[1, 1]
    return out
