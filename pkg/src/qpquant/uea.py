"""PBW model of U(g) and sparse elements of U(g)^{(x)n}[[hbar]].

A PBW monomial is a weakly increasing tuple of generator indices (odd
generators appear at most once).  An element of U^{(x)n} truncated at
hbar^(order+1) is stored as ``{(k, (m_1, ..., m_n)): Fraction}`` where k is
the hbar exponent.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .graded import BlockPartition, InvalidInput, insertion, koszul_sign, sort_sign
from .lie import LieAlgebra
from .series import DEFAULT_ORDER, HbarSeries

ONE = ()


class FiltrationOverflow(ArithmeticError):
    def __init__(self, monomial, bound):
        super().__init__(f"PBW monomial {monomial} exceeds filtration bound {bound}")
        self.monomial = monomial
        self.bound = bound


def _acc(d: dict, key, val) -> None:
    v = d.get(key, 0) + val
    if v:
        d[key] = v
    else:
        d.pop(key, None)


class UEA:
    """Universal enveloping algebra of a (graded) Lie algebra, PBW basis."""

    def __init__(self, lie: LieAlgebra):
        self.lie = lie
        self._deg = lie.degrees
        self.straighten = lru_cache(maxsize=None)(self._straighten)
        self.mul_mono = lru_cache(maxsize=None)(self._mul_mono)
        self.coproduct_mono = lru_cache(maxsize=None)(self._coproduct_mono)

    def __repr__(self):
        return f"UEA({', '.join(self.lie.names)})"

    def mono_degree(self, m: tuple) -> int:
        return sum(self._deg[g] for g in m)

    def is_pbw(self, m: tuple) -> bool:
        return all(a < b or (a == b and self._deg[a] % 2 == 0) for a, b in zip(m, m[1:]))

    def _descent(self, w: tuple, strategy: str):
        rng = range(len(w) - 1)
        if strategy == "right":
            rng = reversed(rng)
        for p in rng:
            a, b = w[p], w[p + 1]
            if a > b or (a == b and self._deg[a] % 2):
                return p
        return None

    def _straighten(self, w: tuple, strategy: str = "left") -> tuple:
        """Rewrite a word into PBW form; returns a tuple of (monomial, coeff)."""
        p = self._descent(w, strategy)
        if p is None:
            return ((w, Fraction(1)),)
        x, y = w[p], w[p + 1]
        out: dict = {}
        head, tail = w[:p], w[p + 2:]
        if x == y:
            for k, c in self.lie.bracket_gen(x, x).items():
                for m, cm in self.straighten(head + (k,) + tail, strategy):
                    _acc(out, m, c * cm / 2)
        else:
            s = koszul_sign([2, 1], [self._deg[x], self._deg[y]])
            for m, cm in self.straighten(head + (y, x) + tail, strategy):
                _acc(out, m, s * cm)
            for k, c in self.lie.bracket_gen(x, y).items():
                for m, cm in self.straighten(head + (k,) + tail, strategy):
                    _acc(out, m, c * cm)
        return tuple(sorted(out.items()))

    def _mul_mono(self, a: tuple, b: tuple) -> tuple:
        return self.straighten(a + b)

    def _coproduct_mono(self, m: tuple, n: int) -> tuple:
        """Iterated coproduct Delta^{(n)} of a PBW monomial (generators primitive)."""
        if n < 1:
            raise InvalidInput("iterated coproduct needs n >= 1")
        if n == 1:
            return (((m,), Fraction(1)),)
        degs = [self._deg[g] for g in m]
        out: dict = {}
        for assign in itertools.product(range(n), repeat=len(m)):
            order = sorted(range(len(m)), key=lambda i: assign[i])
            sign = koszul_sign([i + 1 for i in order], degs)
            slots = tuple(tuple(m[i] for i in range(len(m)) if assign[i] == s) for s in range(n))
            _acc(out, slots, Fraction(sign))
        return tuple(sorted(out.items()))

    def counit(self, m: tuple) -> int:
        return 1 if not m else 0

    # convenient constructors
    def gen(self, name_or_index, order: int = DEFAULT_ORDER) -> "UTensor":
        i = self.lie.index(name_or_index) if isinstance(name_or_index, str) else name_or_index
        return UTensor(self, 1, {(0, ((i,),)): Fraction(1)}, order)

    def unit(self, n: int = 1, order: int = DEFAULT_ORDER) -> "UTensor":
        return UTensor(self, n, {(0, (ONE,) * n): Fraction(1)}, order)

    def zero(self, n: int = 1, order: int = DEFAULT_ORDER) -> "UTensor":
        return UTensor(self, n, {}, order)

    def element(self, terms: Iterable, n: int, order: int = DEFAULT_ORDER) -> "UTensor":
        """Build from ``[(slot words, coeff)]``; slot words may use names and
        need not be PBW ordered; coeff may be an int/Fraction or HbarSeries."""
        out = self.zero(n, order)
        for words, coeff in terms:
            if len(words) != n:
                raise InvalidInput(f"expected {n} tensor slots, got {len(words)}")
            piece = self.unit(n, order)
            for pos, word in enumerate(words):
                if isinstance(word, str):
                    word = (word,)
                word = tuple(self.lie.index(g) if isinstance(g, str) else g for g in word)
                slot = [ONE] * n
                acc = self.unit(n, order)
                for g in word:
                    slot[pos] = (g,)
                    acc = acc * UTensor(self, n, {(0, tuple(slot)): Fraction(1)}, order)
                piece = piece * acc
            out = out + piece * coeff
        return out


class UTensor:
    """Element of U^{(x)n} tensored with Q[[hbar]]/hbar^(order+1)."""

    __slots__ = ("uea", "n", "terms", "order")

    def __init__(self, uea: UEA, n: int, terms: Mapping, order: int = DEFAULT_ORDER):
        self.uea = uea
        self.n = n
        self.order = order
        self.terms = {k: Fraction(v) for k, v in terms.items() if v and k[0] <= order}

    # -- structure --------------------------------------------------------
    def _like(self, terms, n=None, order=None) -> "UTensor":
        return UTensor(self.uea, self.n if n is None else n, terms, self.order if order is None else order)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def hbar_valuation(self) -> float:
        return min((k for k, _ in self.terms), default=float("inf"))

    def max_length(self) -> int:
        return max((len(m) for _, ms in self.terms for m in ms), default=0)

    def hbar_coefficient(self, k: int) -> "UTensor":
        return self._like({(0, ms): c for (j, ms), c in self.terms.items() if j == k})

    def series(self) -> dict:
        """Basis tuple -> HbarSeries."""
        out: dict = {}
        for (k, ms), c in self.terms.items():
            out.setdefault(ms, {})[k] = c
        return {ms: HbarSeries(cs, self.order) for ms, cs in out.items()}

    def truncate(self, order: int) -> "UTensor":
        return self._like(self.terms, order=min(order, self.order))

    def degree_of(self, ms: tuple) -> int:
        return sum(self.uea.mono_degree(m) for m in ms)

    def check_filtration(self, bound) -> "UTensor":
        if bound is not None:
            for _, ms in self.terms:
                for m in ms:
                    if len(m) > bound:
                        raise FiltrationOverflow(m, bound)
        return self

    def filtration_truncate(self, bound: int) -> "UTensor":
        return self._like({(k, ms): c for (k, ms), c in self.terms.items() if all(len(m) <= bound for m in ms)})

    # -- linear structure -------------------------------------------------
    def _check(self, other: "UTensor"):
        if other.uea is not self.uea:
            raise InvalidInput("tensors over different enveloping algebras")
        if other.n != self.n:
            raise InvalidInput(f"arity mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, UTensor):
            if other == 0:
                return self
            return self + self.uea.unit(self.n, self.order) * other
        self._check(other)
        order = min(self.order, other.order)
        out = dict(self.terms)
        for key, c in other.terms.items():
            _acc(out, key, c)
        return self._like(out, order=order)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "UTensor":
        if isinstance(s, HbarSeries):
            out: dict = {}
            order = min(self.order, s.order)
            for (k, ms), c in self.terms.items():
                for j, a in s.items():
                    if k + j <= order:
                        _acc(out, (k + j, ms), c * a)
            return self._like(out, order=order)
        s = Fraction(s)
        return self._like({k: c * s for k, c in self.terms.items()})

    def hbar_shift(self, power: int = 1) -> "UTensor":
        return self._like({(k + power, ms): c for (k, ms), c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, UTensor):
            return self.scale(other)
        return self.product(other)

    def __rmul__(self, other):
        return self.scale(other)

    def product(self, other: "UTensor", bound=None) -> "UTensor":
        """Slotwise product (a_1(x)...)(b_1(x)...) with Koszul signs."""
        self._check(other)
        order = min(self.order, other.order)
        u = self.uea
        out: dict = {}
        for (ka, ma), ca in self.terms.items():
            da = [u.mono_degree(m) for m in ma]
            for (kb, mb), cb in other.terms.items():
                k = ka + kb
                if k > order:
                    continue
                sign = 1
                if any(d % 2 for d in da):
                    db = [u.mono_degree(m) for m in mb]
                    par = 0
                    for i in range(self.n):
                        for j in range(i + 1, self.n):
                            par += db[i] * da[j]
                    sign = -1 if par % 2 else 1
                partial = [((), ca * cb * sign)]
                for x, y in zip(ma, mb):
                    prods = u.mul_mono(x, y)
                    partial = [(acc + (m,), c * cm) for acc, c in partial for m, cm in prods]
                for ms, c in partial:
                    _acc(out, (k, ms), c)
        return self._like(out, order=order).check_filtration(bound)

    def __eq__(self, other):
        if not isinstance(other, UTensor):
            if other == 0:
                return self.is_zero()
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        names = self.uea.lie.names
        parts = []
        for (k, ms), c in sorted(self.terms.items()):
            slots = "(x)".join("*".join(names[g] for g in m) or "1" for m in ms)
            h = f"h^{k} " if k else ""
            parts.append(f"{c} {h}{slots}")
        return " + ".join(parts)

    # -- Hopf structure ---------------------------------------------------
    def tensor(self, other: "UTensor") -> "UTensor":
        """Outer tensor product U^{(x)n} (x) U^{(x)m} -> U^{(x)(n+m)}."""
        order = min(self.order, other.order)
        out: dict = {}
        for (ka, ma), ca in self.terms.items():
            for (kb, mb), cb in other.terms.items():
                if ka + kb <= order:
                    _acc(out, (ka + kb, ma + mb), ca * cb)
        return UTensor(self.uea, self.n + other.n, out, order)

    def insert(self, partition: BlockPartition) -> "UTensor":
        """Coproduct insertion a^{I_1,...,I_m}."""
        if len(partition.blocks) != self.n:
            raise InvalidInput(f"partition has {len(partition.blocks)} blocks for a {self.n}-fold tensor")
        u = self.uea
        by_k: dict = {}
        for (k, ms), c in self.terms.items():
            by_k.setdefault(k, {})[ms] = c
        out: dict = {}
        for k, terms in by_k.items():
            res = insertion(terms, partition, u.coproduct_mono, u.mono_degree, ONE)
            for ms, c in res.items():
                _acc(out, (k, ms), c)
        return UTensor(u, partition.n, out, self.order)

    def ins(self, *blocks, n: int | None = None) -> "UTensor":
        """Shorthand: ``x.ins((1, 2), 3)`` is x^{12,3}."""
        return self.insert(BlockPartition.of(*blocks, n=n))

    def permute(self, perm) -> "UTensor":
        """Slot permutation: output slot i is input slot perm[i] (1-based)."""
        return self.insert(BlockPartition(tuple((perm.index(i + 1) + 1,) for i in range(self.n)), self.n))

    def counit_slot(self, slot: int) -> "UTensor":
        """Apply the counit in one slot (1-based), lowering arity by one."""
        out: dict = {}
        for (k, ms), c in self.terms.items():
            if not ms[slot - 1]:
                _acc(out, (k, ms[:slot - 1] + ms[slot:]), c)
        return UTensor(self.uea, self.n - 1, out, self.order)

    def inverse(self) -> "UTensor":
        """Inverse of an element of the form c*1 + O(hbar), by geometric series."""
        one = self.uea.unit(self.n, self.order)
        c0 = self.terms.get((0, (ONE,) * self.n), 0)
        if not c0 or (self - one * c0).hbar_valuation() < 1:
            raise ZeroDivisionError("only elements c*1 + O(hbar), c != 0, are inverted")
        x = self * Fraction(1, c0) - one
        out, term = one, one
        for _ in range(self.order):
            term = term * (-x)
            out = out + term
        return out * Fraction(1, c0)


# -- Hopf maps on single elements -----------------------------------------

def uea_product(a: UTensor, b: UTensor, bound=None) -> UTensor:
    return a.product(b, bound)


def uea_coproduct(a: UTensor, n: int = 2) -> UTensor:
    """Iterated coproduct Delta^{(n)} of an element of U (arity 1)."""
    if a.n != 1:
        raise InvalidInput("coproduct expects an element of U")
    if n == 0:
        return counit(a)
    return a.insert(BlockPartition((tuple(range(1, n + 1)),), n))


def counit(a: UTensor) -> UTensor:
    return a.counit_slot(1)


def delta_n(a: UTensor, n: int) -> UTensor:
    """delta^{(n)} = (id - eps)^{(x)n} o Delta^{(n)}; delta^{(0)} = eps."""
    if n == 0:
        return counit(a)
    d = uea_coproduct(a, n)
    return d._like({(k, ms): c for (k, ms), c in d.terms.items() if all(ms)})


def delta_sigma(a: UTensor, n: int) -> UTensor:
    """Inclusion-exclusion form: sum over subsets S of {1..n} of (-1)^(n-|S|) Delta_S."""
    out = a.uea.zero(n, a.order)
    for size in range(n + 1):
        for S in itertools.combinations(range(1, n + 1), size):
            if size == 0:
                eps = counit(a)
                term = a.uea.unit(n, a.order).scale(HbarSeries(
                    {k: c for (k, _), c in eps.terms.items()}, a.order))
            else:
                term = a.insert(BlockPartition((S,), n))
            out = out + term * ((-1) ** (n - size))
    return out


def uprime_valuation(a: UTensor, n_max: int) -> dict:
    """Truncated membership witness for Drinfeld's U'.

    Returns ``{"passes_up_to": n, "failed_at": m or None, "valuations": {...}}``
    where ``passes_up_to`` is the largest n <= n_max such that
    hbar-valuation(delta^{(j)}(a)) >= j for every j <= n.
    """
    if a.order < n_max:
        raise InvalidInput("truncation order must be >= n_max")
    vals = {}
    failed = None
    passes = 0
    for n in range(0, n_max + 1):
        v = delta_n(a, n).hbar_valuation()
        vals[n] = v
        if v >= n:
            if failed is None:
                passes = n
        elif failed is None:
            failed = n
    return {"passes_up_to": passes, "failed_at": failed, "valuations": vals}
