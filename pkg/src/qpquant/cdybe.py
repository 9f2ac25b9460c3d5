"""The modified classical dynamical Yang-Baxter equation.

A dynamical r-matrix is a map from h* to Lambda^2 g whose coefficients are
rational functions of the dual coordinates lambda_1..lambda_l.  Wedges embed
as alternating sums over permutations, e_i ^ e_j = e_i (x) e_j - e_j (x) e_i,
and exterior coordinates are read off at increasing index words.
"""

from __future__ import annotations

import itertools
import keyword
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import sympy
from sympy import QQ

from .graded import InvalidInput, GradedTensor
from .lie import LieAlgebra, RejectedPrecondition, adjoint_invariance, wedge


class Unsupported(NotImplementedError):
    pass


def _perm_sign(p: Sequence[int]) -> int:
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


@dataclass(frozen=True)
class RationalField:
    """Q(lambda_1, ..., lambda_l) with canonical gcd-reduced elements."""

    names: tuple

    @property
    def symbols(self):
        return sympy.symbols(self.names) if self.names else ()

    @property
    def K(self):
        syms = self.symbols
        if isinstance(syms, sympy.Symbol):
            syms = (syms,)
        return QQ.frac_field(*syms) if syms else QQ.frac_field(sympy.Symbol("_unused"))

    def __post_init__(self):
        for n in self.names:
            if not isinstance(n, str) or not n.isidentifier() or keyword.iskeyword(n):
                raise InvalidInput(f"coordinate name {n!r} is not a plain identifier")

    def parse(self, x):
        if isinstance(x, bool) or isinstance(x, float):
            raise InvalidInput(f"not an exact coefficient: {x!r}")
        if isinstance(x, (int, Fraction)):
            x = sympy.Rational(Fraction(x).numerator, Fraction(x).denominator)
        elif isinstance(x, str):
            try:
                x = sympy.sympify(x, locals={n: sympy.Symbol(n) for n in self.names})
            except (sympy.SympifyError, SyntaxError, TypeError) as err:
                raise InvalidInput(f"cannot parse {x!r}") from err
            if any(isinstance(a, sympy.Float) for a in sympy.preorder_traversal(x)):
                raise InvalidInput("floating point coefficient")
        elif isinstance(x, Mapping):
            num = self.parse(x["numerator"])
            den = self.parse(x.get("denominator", "1"))
            if not den:
                raise InvalidInput("zero denominator")
            return num / den
        if isinstance(x, sympy.Basic):
            bad = x.free_symbols - {sympy.Symbol(n) for n in self.names}
            if bad:
                raise InvalidInput(f"unknown variables {sorted(map(str, bad))}")
            if any(isinstance(a, sympy.Float) for a in sympy.preorder_traversal(x)):
                raise InvalidInput("floating point coefficient")
            return self.K.from_sympy(sympy.together(x))
        if self.K.of_type(x):
            return x
        raise InvalidInput(f"unsupported coefficient type {type(x).__name__}")

    def diff(self, f, i: int):
        return f.diff(self.K.gens[i])

    def to_json(self, f) -> dict:
        e = self.K.to_sympy(f)
        num, den = sympy.fraction(sympy.together(e))
        return {"numerator": str(sympy.expand(num)), "denominator": str(sympy.expand(den))}


@dataclass(frozen=True)
class TensorMap:
    """Rational-function-valued full tensor in g^(x)k: {index word: element}."""

    field: RationalField
    arity: int
    terms: Mapping

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out[w] + c if w in out else c
        return TensorMap(self.field, self.arity, {w: c for w, c in out.items() if c})

    def scale(self, s):
        s = self.field.parse(s)
        return TensorMap(self.field, self.arity, {w: c * s for w, c in self.terms.items() if c * s})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, TensorMap) and dict(self.terms) == dict(other.terms)

    def is_alternating(self) -> bool:
        for w, c in self.terms.items():
            for p in itertools.permutations(range(self.arity)):
                if self.terms.get(tuple(w[i] for i in p)) != c * _perm_sign(p):
                    return False
        return True

    def wedge_coords(self) -> dict:
        """Coefficients on increasing words of an alternating tensor."""
        return {w: c for w, c in self.terms.items() if list(w) == sorted(set(w)) and len(set(w)) == len(w)}

    def is_constant(self) -> bool:
        K = self.field.K
        return all(all(not self.field.diff(c, i) for i in range(len(self.field.names)))
                   for c in self.terms.values()) if self.field.names else True

    def to_json(self, lie: LieAlgebra) -> list:
        return [{"word": [lie.names[i] for i in w], "coeff": self.field.to_json(c)}
                for w, c in sorted(self.wedge_coords().items())]


def alternating(field: RationalField, coords: Mapping, arity: int) -> TensorMap:
    """Full tensor of sum coords[w] e_w over wedge words (any order of indices)."""
    out: dict = {}
    for w, c in coords.items():
        c = field.parse(c)
        if len(w) != arity:
            raise InvalidInput(f"word {w} is not of arity {arity}")
        for p in itertools.permutations(range(arity)):
            key = tuple(w[i] for i in p)
            v = c * _perm_sign(p)
            out[key] = out[key] + v if key in out else v
    return TensorMap(field, arity, {w: c for w, c in out.items() if c})


@dataclass(frozen=True)
class DynamicalRMatrix:
    lie: LieAlgebra
    base: tuple  # indices h_1..h_l of the abelian subalgebra
    field: RationalField
    value: TensorMap
    complement: tuple | None = None

    @classmethod
    def build(cls, lie: LieAlgebra, base: Sequence, coords: Mapping, names: Sequence[str] | None = None,
              complement: Sequence | None = None) -> "DynamicalRMatrix":
        base = tuple(lie.index(b) if isinstance(b, str) else b for b in base)
        names = tuple(names) if names is not None else tuple(f"lambda{i + 1}" for i in range(len(base)))
        if len(names) != len(base):
            raise InvalidInput("one coordinate per base element")
        fld = RationalField(names)
        conv = {}
        for w, c in coords.items():
            w = tuple(lie.index(g) if isinstance(g, str) else g for g in w)
            if len(w) != 2:
                raise InvalidInput("r-matrix words have two slots")
            conv[w] = c
        value = alternating(fld, conv, 2)
        if complement is not None:
            complement = tuple(lie.index(b) if isinstance(b, str) else b for b in complement)
            _check_reductive(lie, base, complement)
        return cls(lie, base, fld, value, complement)

    def at(self, k: int, slots: tuple) -> TensorMap:
        """Embed the value into slots ``slots`` of a k-fold tensor (1 elsewhere is not allowed)."""
        out = {}
        for w, c in self.value.terms.items():
            key = [None] * k
            for s, g in zip(slots, w):
                key[s] = g
            out[tuple(key)] = c
        return TensorMap(self.field, k, out)


def _check_reductive(lie: LieAlgebra, base: tuple, complement: tuple) -> None:
    if sorted(base + complement) != list(range(lie.dim)):
        raise InvalidInput("base and complement must partition the basis")
    for h in base:
        for m in complement:
            out = {k: c for k, c in lie.bracket_gen(h, m).items() if k not in complement}
            if out:
                raise RejectedPrecondition(f"[{lie.names[h]}, {lie.names[m]}] leaves the complement",
                                           {lie.names[k]: str(c) for k, c in out.items()})


def _bracket_tensor(lie: LieAlgebra, fld: RationalField, a: Mapping, b: Mapping, sa: int, sb: int, k: int) -> dict:
    """[a, b] for k-tensors a, b whose only shared slot is sa == sb."""
    out: dict = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            key = list(wa)
            for i in range(k):
                if i != sa and wb[i] is not None:
                    if key[i] is not None:
                        raise InvalidInput("overlapping slots")
                    key[i] = wb[i]
            for g, cg in lie.bracket_gen(wa[sa], wb[sb]).items():
                key[sa] = g
                t = tuple(key)
                v = ca * cb * fld.parse(cg)
                out[t] = out[t] + v if t in out else v
    return {w: c for w, c in out.items() if c}


def _add(acc: dict, terms: Mapping) -> None:
    for w, c in terms.items():
        acc[w] = acc[w] + c if w in acc else c


def cyb(rho: DynamicalRMatrix) -> TensorMap:
    """[rho12, rho13] + [rho12, rho23] + [rho13, rho23] as a full 3-tensor."""
    L, f = rho.lie, rho.field
    r12, r13, r23 = rho.at(3, (0, 1)).terms, rho.at(3, (0, 2)).terms, rho.at(3, (1, 2)).terms
    acc: dict = {}
    _add(acc, _bracket_tensor(L, f, r12, r13, 0, 0, 3))
    _add(acc, _bracket_tensor(L, f, r12, r23, 1, 1, 3))
    _add(acc, _bracket_tensor(L, f, r13, r23, 2, 2, 3))
    return TensorMap(f, 3, {w: c for w, c in acc.items() if c})


def alt_d(rho: DynamicalRMatrix) -> TensorMap:
    """sum_i h_i^1 d_i rho^23 - h_i^2 d_i rho^13 + h_i^3 d_i rho^12."""
    f = rho.field
    acc: dict = {}
    for i, h in enumerate(rho.base):
        for sign, slot, rest in ((1, 0, (1, 2)), (-1, 1, (0, 2)), (1, 2, (0, 1))):
            for w, c in rho.value.terms.items():
                dc = f.diff(c, i)
                if not dc:
                    continue
                key = [None] * 3
                key[slot] = h
                key[rest[0]], key[rest[1]] = w
                _add(acc, {tuple(key): dc * sign})
    return TensorMap(f, 3, {w: c for w, c in acc.items() if c})


def constant_tensor(rho: DynamicalRMatrix, Z) -> TensorMap:
    """Z as a full 3-tensor; Z is a wedge GradedTensor or a word -> coeff mapping."""
    if isinstance(Z, GradedTensor):
        coords = {}
        for w, c in Z.terms.items():
            if c.valuation() < 1 and any(k for k, _ in c.items()):
                raise InvalidInput("Z must be hbar-independent")
            coords[w] = c[0]
        return alternating(rho.field, coords, 3)
    if isinstance(Z, TensorMap):
        return Z
    conv = {tuple(rho.lie.index(g) if isinstance(g, str) else g for g in w): c for w, c in (Z or {}).items()}
    return alternating(rho.field, conv, 3)


def _check_invariant(rho: DynamicalRMatrix, Zt: TensorMap) -> None:
    if not Zt.is_constant():
        raise InvalidInput("Z must be constant")
    coords = {w: Fraction(str(rho.field.K.to_sympy(c))) for w, c in Zt.wedge_coords().items()}
    rep = adjoint_invariance(rho.lie, wedge(rho.lie, coords))
    if rep:
        raise RejectedPrecondition("Z is not g-invariant", rep)


def cdybe_residual(rho: DynamicalRMatrix, Z=None) -> TensorMap:
    """-Alt(d rho) + CYB(rho) - Z."""
    Zt = constant_tensor(rho, Z)
    _check_invariant(rho, Zt)
    return cyb(rho) - alt_d(rho) - Zt


def solve_constant_Z(rho: DynamicalRMatrix):
    """The constant invariant Z with zero residual, or None when there is none."""
    R = cyb(rho) - alt_d(rho)
    if not R.is_constant():
        return None
    try:
        _check_invariant(rho, R)
    except RejectedPrecondition:
        return None
    return R


def h_equivariance_residual(rho: DynamicalRMatrix) -> dict:
    """{base generator name: ad_h rho(lambda)} for the nonzero ones.

    For abelian h the coadjoint term vanishes and equivariance is weight zero.
    """
    L = rho.lie
    for a in rho.base:
        for b in rho.base:
            if L.bracket_gen(a, b):
                raise Unsupported("h must be abelian")
    out = {}
    for h in rho.base:
        acc: dict = {}
        for w, c in rho.value.terms.items():
            for pos in range(2):
                for g, cg in L.bracket_gen(h, w[pos]).items():
                    key = list(w)
                    key[pos] = g
                    _add(acc, {tuple(key): c * rho.field.parse(cg)})
        acc = {w: c for w, c in acc.items() if c}
        if acc:
            out[L.names[h]] = TensorMap(rho.field, 2, acc)
    return out


def alt3(t: TensorMap) -> TensorMap:
    """Sum over the six permutations with signs, no normalization."""
    out: dict = {}
    for w, c in t.terms.items():
        for p in itertools.permutations(range(3)):
            _add(out, {tuple(w[i] for i in p): c * _perm_sign(p)})
    return TensorMap(t.field, 3, {w: c for w, c in out.items() if c})
