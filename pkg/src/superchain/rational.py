"""Rational functions of one spectral variable with explicitly tracked poles."""

from __future__ import annotations

from typing import Iterable

import numpy as np
from numpy.polynomial import polynomial as P

POLE_MERGE = 1e-12


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)


class RationalFunction:
    """``num(u) / prod_p (u - p)^{k_p}`` with complex coefficients.

    Poles are kept as a factored list so evaluation near them stays stable
    and shifts ``u -> u - s`` move them exactly.
    """

    __slots__ = ("num", "poles")

    def __init__(self, num: Iterable[complex], poles: dict[complex, int] | None = None):
        self.num = _trim(np.asarray(list(num) if not isinstance(num, np.ndarray) else num, dtype=complex))
        self.poles: dict[complex, int] = {}
        for p, k in (poles or {}).items():
            if k > 0:
                self._add_pole(complex(p), k)

    def _add_pole(self, p: complex, k: int):
        for q in self.poles:
            if abs(q - p) <= POLE_MERGE * (1 + abs(p)):
                self.poles[q] += k
                return
        self.poles[p] = k

    # constructors

    @classmethod
    def constant(cls, c: complex) -> "RationalFunction":
        return cls([c])

    @classmethod
    def from_factors(cls, const: complex = 1.0, zeros: Iterable[complex] = (), poles: Iterable[complex] = ()) -> "RationalFunction":
        zs = list(zeros)
        num = P.polyfromroots(zs) * const if zs else np.array([const], dtype=complex)
        out = cls(num)
        for p in poles:
            out._add_pole(complex(p), 1)
        return out

    # arithmetic

    def _over(self, poles: dict[complex, int]) -> np.ndarray:
        """Numerator rewritten over a common pole multiset containing ours."""
        extra = []
        for p, k in poles.items():
            have = 0
            for q, kq in self.poles.items():
                if abs(q - p) <= POLE_MERGE * (1 + abs(p)):
                    have = kq
                    break
            extra += [p] * (k - have)
        return P.polymul(self.num, P.polyfromroots(extra)) if extra else self.num

    def _union(self, other: "RationalFunction") -> dict[complex, int]:
        out = dict(self.poles)
        for p, k in other.poles.items():
            for q in out:
                if abs(q - p) <= POLE_MERGE * (1 + abs(p)):
                    out[q] = max(out[q], k)
                    break
            else:
                out[p] = k
        return out

    def __add__(self, other) -> "RationalFunction":
        if not isinstance(other, RationalFunction):
            other = RationalFunction.constant(other)
        if not other.poles:
            return RationalFunction(P.polyadd(self.num, P.polymul(other.num, self._denominator())), self.poles)
        if not self.poles:
            return other + self
        poles = self._union(other)
        return RationalFunction(P.polyadd(self._over(poles), other._over(poles)), poles)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.poles)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-other if isinstance(other, RationalFunction) else -complex(other))

    def __rsub__(self, other) -> "RationalFunction":
        return (-self) + other

    def __mul__(self, other) -> "RationalFunction":
        if not isinstance(other, RationalFunction):
            return RationalFunction(self.num * complex(other), self.poles)
        out = RationalFunction(P.polymul(self.num, other.num), self.poles)
        for p, k in other.poles.items():
            out._add_pole(p, k)
        return out

    __rmul__ = __mul__

    def __truediv__(self, c) -> "RationalFunction":
        if isinstance(c, RationalFunction):
            raise TypeError("division by a rational function is not supported; build it from factors")
        return RationalFunction(self.num / complex(c), self.poles)

    def _denominator(self) -> np.ndarray:
        roots = [p for p, k in self.poles.items() for _ in range(k)]
        return P.polyfromroots(roots) if roots else np.array([1.0 + 0j])

    def shift(self, s: complex) -> "RationalFunction":
        """``u -> f(u - s)``."""
        if s == 0:
            return self
        num = np.array([0j])
        base = np.array([-s, 1.0], dtype=complex)
        power = np.array([1.0 + 0j])
        for c in self.num:
            num = P.polyadd(num, c * power)
            power = P.polymul(power, base)
        return RationalFunction(num, {p + s: k for p, k in self.poles.items()})

    def deriv(self, order: int = 1) -> "RationalFunction":
        out = self
        for _ in range(order):
            out = out._deriv1()
        return out

    def _deriv1(self) -> "RationalFunction":
        if not self.poles:
            return RationalFunction(P.polyder(self.num) if self.num.size > 1 else [0.0])
        ps = list(self.poles)
        simple = P.polyfromroots(ps)
        term = P.polymul(P.polyder(self.num) if self.num.size > 1 else [0.0], simple)
        for i, p in enumerate(ps):
            others = ps[:i] + ps[i + 1 :]
            q = P.polyfromroots(others) if others else np.array([1.0 + 0j])
            term = P.polysub(term, self.poles[p] * P.polymul(self.num, q))
        return RationalFunction(term, {p: k + 1 for p, k in self.poles.items()})

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        val = P.polyval(u, self.num)
        for p, k in self.poles.items():
            val = val / (u - p) ** k
        return val

    def is_zero(self) -> bool:
        return not np.any(self.num)

    def __repr__(self) -> str:
        return f"RationalFunction(deg {self.num.size - 1}, poles {self.poles})"


def simple_poles(points: Iterable[complex], weight: complex = 1.0) -> RationalFunction:
    """``Σ_p weight / (u - p)``."""
    out = RationalFunction.constant(0.0)
    for p in points:
        out = out + RationalFunction.from_factors(weight, poles=[p])
    return out


class RationalMatrixFunction:
    """Matrix polynomial divided by a scalar polynomial, ``N(u) / d(u)``.

    ``num`` has shape ``(deg + 1, rows, cols)`` with the constant term first;
    ``den`` holds scalar coefficients, constant term first.
    """

    def __init__(self, num: np.ndarray, den: Iterable[complex] = (1.0,)):
        self.num = np.asarray(num, dtype=complex)
        if self.num.ndim != 3:
            raise ValueError("numerator must be a stack of matrices")
        self.den = _trim(np.asarray(list(den), dtype=complex))
        if not np.any(self.den):
            raise ValueError("zero denominator")

    @property
    def shape(self) -> tuple[int, int]:
        return self.num.shape[1:]

    def __call__(self, u: complex) -> np.ndarray:
        acc = np.zeros(self.shape, dtype=complex)
        for c in self.num[::-1]:
            acc = acc * u + c
        d = P.polyval(u, self.den)
        if abs(d) == 0:
            raise ZeroDivisionError(f"evaluation at a pole u={u}")
        return acc / d

    def __matmul__(self, other: "RationalMatrixFunction") -> "RationalMatrixFunction":
        da, db = self.num.shape[0], other.num.shape[0]
        num = np.zeros((da + db - 1, self.shape[0], other.shape[1]), dtype=complex)
        for i in range(da):
            for j in range(db):
                num[i + j] += self.num[i] @ other.num[j]
        return RationalMatrixFunction(num, P.polymul(self.den, other.den))

    def __mul__(self, c) -> "RationalMatrixFunction":
        return RationalMatrixFunction(self.num * c, self.den)

    __rmul__ = __mul__

    def __add__(self, other: "RationalMatrixFunction") -> "RationalMatrixFunction":
        a = _polymat_mul_scalar(self.num, other.den)
        b = _polymat_mul_scalar(other.num, self.den)
        n = max(a.shape[0], b.shape[0])
        out = np.zeros((n,) + self.shape, dtype=complex)
        out[: a.shape[0]] += a
        out[: b.shape[0]] += b
        return RationalMatrixFunction(out, P.polymul(self.den, other.den))

    def __sub__(self, other: "RationalMatrixFunction") -> "RationalMatrixFunction":
        return self + other * -1.0

    def reduce(self) -> "RationalMatrixFunction":
        """Normalize to a monic denominator and drop vanishing top coefficients."""
        lead = self.den[-1]
        num = self.num / lead
        keep = num.shape[0]
        scale = max(np.abs(num).max(initial=0.0), 1.0)
        while keep > 1 and np.abs(num[keep - 1]).max() <= 1e-14 * scale:
            keep -= 1
        return RationalMatrixFunction(num[:keep], self.den / lead)

    def block(self, rows: slice | np.ndarray, cols: slice | np.ndarray) -> "RationalMatrixFunction":
        return RationalMatrixFunction(self.num[:, rows][:, :, cols], self.den)

    def equals(self, other: "RationalMatrixFunction", tol: float = 1e-10) -> bool:
        """Coefficient-wise test of ``N_1 d_2 == N_2 d_1``."""
        a = _polymat_mul_scalar(self.num, other.den)
        b = _polymat_mul_scalar(other.num, self.den)
        n = max(a.shape[0], b.shape[0])
        diff = np.zeros((n,) + self.shape, dtype=complex)
        diff[: a.shape[0]] += a
        diff[: b.shape[0]] -= b
        scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0), 1.0)
        return bool(np.abs(diff).max(initial=0.0) <= tol * scale)


def _polymat_mul_scalar(num: np.ndarray, c: np.ndarray) -> np.ndarray:
    out = np.zeros((num.shape[0] + len(c) - 1,) + num.shape[1:], dtype=complex)
    for i in range(num.shape[0]):
        for j, cj in enumerate(c):
            out[i + j] += cj * num[i]
    return out
