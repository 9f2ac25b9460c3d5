"""Truncated formal power series in hbar with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

DEFAULT_ORDER = 3


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class HbarSeries:
    """Element of Q[[hbar]] / hbar^(order+1), stored sparsely.

    Coefficients are keyed by exponent; zero coefficients and exponents above
    ``order`` are never stored.
    """

    __slots__ = ("_c", "order")

    def __init__(self, coeffs=None, order: int = DEFAULT_ORDER):
        if order < 0:
            raise ValueError("truncation order must be >= 0")
        self.order = order
        c = {}
        if coeffs:
            items = coeffs.items() if isinstance(coeffs, dict) else enumerate(coeffs)
            for k, v in items:
                if k < 0:
                    raise ValueError("negative hbar exponent")
                if k > order:
                    continue
                v = _frac(v)
                if v:
                    c[k] = c.get(k, 0) + v
            c = {k: v for k, v in c.items() if v}
        self._c = c

    # -- constructors -----------------------------------------------------
    @classmethod
    def const(cls, x, order: int = DEFAULT_ORDER) -> "HbarSeries":
        return cls({0: x}, order)

    @classmethod
    def hbar(cls, power: int = 1, coeff=1, order: int = DEFAULT_ORDER) -> "HbarSeries":
        return cls({power: coeff}, order)

    @classmethod
    def coerce(cls, x, order: int = DEFAULT_ORDER) -> "HbarSeries":
        if isinstance(x, HbarSeries):
            return x
        return cls.const(x, order)

    # -- inspection -------------------------------------------------------
    @property
    def coeffs(self) -> dict:
        return dict(self._c)

    def __getitem__(self, k: int) -> Fraction:
        return self._c.get(k, Fraction(0))

    def items(self):
        return sorted(self._c.items())

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self):
        return bool(self._c)

    def valuation(self) -> float:
        """Lowest exponent with nonzero coefficient (inf for zero)."""
        return min(self._c) if self._c else float("inf")

    def truncate(self, order: int) -> "HbarSeries":
        return HbarSeries(self._c, min(order, self.order))

    # -- arithmetic -------------------------------------------------------
    def _other(self, other):
        if isinstance(other, HbarSeries):
            return other
        return HbarSeries.const(other, self.order)

    def __add__(self, other):
        other = self._other(other)
        n = min(self.order, other.order)
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0) + v
        return HbarSeries(c, n)

    __radd__ = __add__

    def __neg__(self):
        return HbarSeries({k: -v for k, v in self._c.items()}, self.order)

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        if not isinstance(other, HbarSeries):
            s = _frac(other)
            return HbarSeries({k: v * s for k, v in self._c.items()}, self.order)
        n = min(self.order, other.order)
        c: dict[int, Fraction] = {}
        for i, a in self._c.items():
            for j, b in other._c.items():
                if i + j <= n:
                    c[i + j] = c.get(i + j, 0) + a * b
        return HbarSeries(c, n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, HbarSeries):
            return self * other.inverse()
        return self * (1 / _frac(other))

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = HbarSeries.const(1, self.order)
        for _ in range(n):
            out = out * self
        return out

    def inverse(self) -> "HbarSeries":
        a0 = self[0]
        if a0 == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        # geometric series in the augmentation part
        x = (self * (1 / a0)) - 1
        out = HbarSeries.const(1, self.order)
        term = HbarSeries.const(1, self.order)
        for _ in range(self.order):
            term = term * (-x)
            out = out + term
        return out * (1 / a0)

    def __eq__(self, other):
        if isinstance(other, HbarSeries):
            return self._c == other._c
        try:
            return self == HbarSeries.const(other, self.order)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __repr__(self):
        if not self._c:
            return "0"
        parts = []
        for k, v in self.items():
            parts.append(f"{v}" if k == 0 else f"{v}*h^{k}")
        return " + ".join(parts)

    # -- serialization ----------------------------------------------------
    def to_json(self) -> list:
        return [{"pow": k, "num": v.numerator, "den": v.denominator} for k, v in self.items()]

    @classmethod
    def from_json(cls, data, order: int = DEFAULT_ORDER) -> "HbarSeries":
        return cls({int(t["pow"]): Fraction(int(t["num"]), int(t.get("den", 1))) for t in data}, order)
