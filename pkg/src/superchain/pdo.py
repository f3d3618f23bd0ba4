"""Pseudo-differential operators ``Σ_r c_r(u) ∂^{p-r}``.

Coefficients only need ``+``, ``*`` and ``deriv(s)``.  Two coefficient
types are used: exact scalar :class:`~superchain.rational.RationalFunction`
and :class:`Jet`, a matrix-valued Taylor jet at a fixed point.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .rational import RationalFunction
from .transfer import gen_binomial


class Jet:
    """Derivatives ``f(u0), f'(u0), ..., f^{(J-1)}(u0)`` of a scalar or matrix function.

    Products follow the Leibniz rule and are truncated to the shorter jet,
    so every retained derivative is exact.
    """

    __slots__ = ("d",)

    def __init__(self, d: np.ndarray):
        self.d = np.asarray(d, dtype=complex)

    @classmethod
    def constant(cls, value, length: int) -> "Jet":
        value = np.asarray(value, dtype=complex)
        d = np.zeros((length,) + value.shape, dtype=complex)
        d[0] = value
        return cls(d)

    @property
    def length(self) -> int:
        return self.d.shape[0]

    @property
    def value(self) -> np.ndarray:
        return self.d[0]

    def deriv(self, s: int = 1) -> "Jet":
        if s >= self.length:
            raise ValueError("jet too short for this derivative")
        return Jet(self.d[s:])

    def __add__(self, other) -> "Jet":
        J = min(self.length, other.length)
        return Jet(self.d[:J] + other.d[:J])

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __neg__(self) -> "Jet":
        return Jet(-self.d)

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.d * other)
        J = min(self.length, other.length)
        matrix = self.d.ndim == 3
        terms = []
        for n in range(J):
            acc = 0
            for s in range(n + 1):
                f, g = self.d[s], other.d[n - s]
                acc = acc + math.comb(n, s) * (f @ g if matrix else f * g)
            terms.append(acc)
        return Jet(np.stack(terms))

    def __rmul__(self, c) -> "Jet":
        return Jet(self.d * c)

    def map(self, f) -> "Jet":
        """Apply a linear map to every derivative."""
        return Jet(np.stack([f(x) for x in self.d]))


def _deriv(c, s: int):
    return c if s == 0 else c.deriv(s)


def _add(x, y):
    if x is None:
        return y
    if y is None:
        return x
    return x + y


class PseudoDiffSeries:
    """``Σ_{r=0}^{R} c_r(u) ∂^{p-r}``; ``None`` marks a zero coefficient."""

    def __init__(self, p: int, coeffs: Sequence, order: int):
        if order < 0:
            raise ValueError("truncation order must be non-negative")
        c = list(coeffs[: order + 1])
        self.coeffs = c + [None] * (order + 1 - len(c))
        self.p = int(p)
        self.order = int(order)

    def __getitem__(self, r: int):
        return self.coeffs[r]

    def __matmul__(self, other: "PseudoDiffSeries") -> "PseudoDiffSeries":
        return pdo_mul(self, other)

    def __add__(self, other: "PseudoDiffSeries") -> "PseudoDiffSeries":
        p = max(self.p, other.p)
        bottom = max(self.p - self.order, other.p - other.order)
        out: list = [None] * (p - bottom + 1)
        for S in (self, other):
            for r, c in enumerate(S.coeffs):
                k = p - S.p + r
                if c is not None and k < len(out):
                    out[k] = _add(out[k], c)
        return PseudoDiffSeries(p, out, p - bottom)

    def scaled(self, c) -> "PseudoDiffSeries":
        return PseudoDiffSeries(self.p, [None if a is None else a * c for a in self.coeffs], self.order)

    def coefficient(self, power: int):
        """Coefficient of ``∂^{power}`` (``None`` if zero or beyond truncation)."""
        r = self.p - power
        return self.coeffs[r] if 0 <= r <= self.order else None

    def inverse(self, one) -> "PseudoDiffSeries":
        """Two-sided inverse for a series with leading coefficient ``one``.

        Solved order by order: with ``b_0 = 1`` the ``r``-th coefficient of
        ``A·B`` is ``b_r`` plus terms in ``b_{<r}``.
        """
        R = self.order
        b: list = [one] + [None] * R
        for r in range(1, R + 1):
            trial = pdo_mul(self, PseudoDiffSeries(-self.p, b, R))
            c = trial.coeffs[r]
            b[r] = None if c is None else -c
        return PseudoDiffSeries(-self.p, b, R)


def pdo_mul(A: PseudoDiffSeries, B: PseudoDiffSeries) -> PseudoDiffSeries:
    """``(a ∂^{α})(b ∂^{β}) = Σ_s C(α, s) a b^{[s]} ∂^{α+β-s}``, truncated at ``min`` order."""
    R = min(A.order, B.order)
    out: list = [None] * (R + 1)
    for i, a in enumerate(A.coeffs):
        if a is None:
            continue
        alpha = A.p - i
        for j, b in enumerate(B.coeffs):
            if b is None or i + j > R:
                continue
            for s in range(R - i - j + 1):
                c = gen_binomial(alpha, s)
                if c == 0:
                    continue
                out[i + j + s] = _add(out[i + j + s], (a * _deriv(b, s)) * c)
    return PseudoDiffSeries(A.p + B.p, out, R)


def rational_series(p: int, coeffs: Sequence, order: int) -> PseudoDiffSeries:
    """Scalar series from numbers or rational functions."""
    cs = [None if c is None else (c if isinstance(c, RationalFunction) else RationalFunction.constant(c)) for c in coeffs]
    return PseudoDiffSeries(p, cs, order)


def first_order(f: RationalFunction, order: int) -> PseudoDiffSeries:
    """``∂ - f``."""
    return rational_series(1, [1.0, -f], order)


def power_first_order(f: RationalFunction, kappa: int, order: int) -> PseudoDiffSeries:
    """``(∂ - f)^{κ}`` for ``κ = ±1``; the inverse is exact to the truncation order."""
    D = first_order(f, order)
    if kappa == 1:
        return D
    if kappa == -1:
        return D.inverse(RationalFunction.constant(1.0))
    raise ValueError("kappa must be +1 or -1")


def geometric_inverse(f: RationalFunction, order: int) -> PseudoDiffSeries:
    """``(∂ - f)^{-1} = Σ_k ∂^{-1} (f ∂^{-1})^k``, an independent route to the inverse."""
    dinv = rational_series(-1, [1.0], order)
    step = pdo_mul(rational_series(0, [f], order), dinv)
    total = dinv
    power = rational_series(0, [1.0], order)
    for _ in range(order):
        power = pdo_mul(power, step)
        total = total + pdo_mul(dinv, power)
    return total


def series_gap(A: PseudoDiffSeries, B: PseudoDiffSeries, points: Sequence[complex]) -> float:
    """Largest coefficient difference of two scalar series at sample points."""
    if A.p != B.p:
        raise ValueError("leading exponents differ")
    worst = 0.0
    for a, b in zip(A.coeffs[: min(A.order, B.order) + 1], B.coeffs):
        for u in points:
            va = 0j if a is None else complex(a(u))
            vb = 0j if b is None else complex(b(u))
            worst = max(worst, abs(va - vb) / max(1.0, abs(va)))
    return worst
