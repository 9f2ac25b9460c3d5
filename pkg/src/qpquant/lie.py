"""Finite-dimensional graded Lie algebras given by structure constants.

Elements of the exterior algebra Lambda(g) are :class:`GradedTensor` values of
exterior kind whose generator ids are the integer indices of the algebra.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .graded import GradedTensor, InvalidInput, SymmetryKind, koszul_sign
from .series import DEFAULT_ORDER, HbarSeries

Vector = dict  # generator index -> Fraction


def _add_into(acc: dict, key, val) -> None:
    v = acc.get(key, 0) + val
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


@dataclass(frozen=True)
class LieAlgebra:
    """Graded Lie algebra on named generators.

    ``brackets[(i, j)]`` for ``i < j`` (or ``i == j`` for odd generators)
    is the bracket of generators i and j as a sparse vector; the reversed
    pairs follow from graded antisymmetry.  PBW order is declaration order.
    """

    names: tuple
    degrees: tuple
    brackets: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if len(self.names) != len(self.degrees):
            raise InvalidInput("names and degrees differ in length")
        if len(set(self.names)) != len(self.names):
            raise InvalidInput("duplicate generator names")
        clean = {}
        n = len(self.names)
        for (i, j), vec in self.brackets.items():
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidInput(f"bracket index out of range: {(i, j)}")
            if i > j:
                raise InvalidInput(f"bracket pairs must be stored with i <= j, got {(i, j)}")
            if i == j and self.degrees[i] % 2 == 0:
                raise InvalidInput(f"[x,x] of even generator {self.names[i]} must vanish")
            vec = {k: Fraction(c) for k, c in vec.items() if c}
            for k in vec:
                if self.degrees[k] != self.degrees[i] + self.degrees[j]:
                    raise InvalidInput(
                        f"bracket [{self.names[i]},{self.names[j]}] not homogeneous: {self.names[k]} has wrong degree"
                    )
            if vec:
                clean[(i, j)] = vec
        object.__setattr__(self, "brackets", clean)

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def bracket_gen(self, i: int, j: int) -> Vector:
        if i <= j:
            return dict(self.brackets.get((i, j), {}))
        sign = -koszul_sign([2, 1], [self.degrees[i], self.degrees[j]])
        return {k: sign * c for k, c in self.brackets.get((j, i), {}).items()}

    def bracket(self, u: Vector, v: Vector) -> Vector:
        out: Vector = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.bracket_gen(i, j).items():
                    _add_into(out, k, a * b * c)
        return out

    def vec(self, **coeffs) -> Vector:
        return {self.index(k): Fraction(v) for k, v in coeffs.items() if v}

    def with_bracket(self, i: int, j: int, vec: Vector) -> "LieAlgebra":
        br = dict(self.brackets)
        br[(i, j)] = vec
        return LieAlgebra(self.names, self.degrees, br)


# -- standard algebras ----------------------------------------------------

def sl2() -> LieAlgebra:
    """sl_2 with generators e, f, h: [h,e]=2e, [h,f]=-2f, [e,f]=h."""
    return LieAlgebra(
        ("e", "f", "h"),
        (0, 0, 0),
        {(0, 1): {2: 1}, (0, 2): {0: -2}, (1, 2): {1: 2}},
    )


def abelian(dim: int, prefix: str = "x") -> LieAlgebra:
    return LieAlgebra(tuple(f"{prefix}{i + 1}" for i in range(dim)), (0,) * dim, {})


def random_solvable(dim: int, rng: random.Random, bound: int = 3) -> LieAlgebra:
    """Semidirect product R x_A R^(dim-1) with a random integer matrix A."""
    br = {}
    for j in range(1, dim):
        col = {i: Fraction(rng.randint(-bound, bound)) for i in range(1, dim)}
        col = {i: c for i, c in col.items() if c}
        if col:
            br[(0, j)] = col
    return LieAlgebra(tuple(f"y{i}" for i in range(dim)), (0,) * dim, br)


# -- Jacobi ---------------------------------------------------------------

def jacobiator(L: LieAlgebra, i: int, j: int, k: int) -> Vector:
    """(-1)^{|x||z|}[x,[y,z]] + cyclic, for generators x=i, y=j, z=k."""
    d = L.degrees
    out: Vector = {}
    for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
        s = -1 if (d[a] * d[c]) % 2 else 1
        for key, val in L.bracket({a: 1}, L.bracket_gen(b, c)).items():
            _add_into(out, key, s * val)
    return out


def check_jacobi(L: LieAlgebra) -> list:
    """Nonzero Jacobiator components as ``((i, j, k), vector)`` pairs."""
    report = []
    n = L.dim
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                r = jacobiator(L, i, j, k)
                if r:
                    report.append(((i, j, k), r))
    return report


# -- exterior algebra -----------------------------------------------------

def wedge(L: LieAlgebra, terms, order: int = DEFAULT_ORDER) -> GradedTensor:
    """Exterior tensor from ``{(i1, ..., ik): coeff}`` or name words."""
    items = terms.items() if isinstance(terms, Mapping) else terms
    conv = []
    for word, c in items:
        word = tuple(L.index(g) if isinstance(g, str) else g for g in word)
        conv.append((word, c))
    return GradedTensor.build(conv, dict(enumerate(L.degrees)), SymmetryKind.EXTERIOR, order)


def zero_tensor(L: LieAlgebra, order: int = DEFAULT_ORDER) -> GradedTensor:
    return wedge(L, {}, order)


def _sdeg(L: LieAlgebra, word: tuple) -> int:
    """Suspended degree of a wedge word."""
    return sum(L.degrees[g] + 1 for g in word)


def _schouten_words(L: LieAlgebra, u: tuple, v: tuple) -> dict:
    """[u, v] on wedge words as a dict word -> Fraction (non-canonical words)."""
    if not u or not v:
        return {}
    if len(u) == 1 and len(v) == 1:
        return {(k,): c for k, c in L.bracket_gen(u[0], v[0]).items()}
    if len(v) > 1:
        v1, rest = v[:1], v[1:]
        out: dict = {}
        for w, c in _schouten_words(L, u, v1).items():
            _add_into(out, w + rest, c)
        s = -1 if ((_sdeg(L, u) - 1) * _sdeg(L, v1)) % 2 else 1
        for w, c in _schouten_words(L, u, rest).items():
            _add_into(out, v1 + w, s * c)
        return out
    s = -1 if ((_sdeg(L, u) - 1) * (_sdeg(L, v) - 1)) % 2 else 1
    return {w: -s * c for w, c in _schouten_words(L, v, u).items()}


def schouten_algebraic(L: LieAlgebra, a: GradedTensor, b: GradedTensor) -> GradedTensor:
    """Algebraic Schouten bracket on Lambda(g) extending the Lie bracket."""
    order = min(a.order, b.order)
    terms = []
    for u, cu in a.terms.items():
        for v, cv in b.terms.items():
            for w, c in _schouten_words(L, u, v).items():
                terms.append((w, cu * cv * c))
    return wedge(L, terms, order)


def wedge_product(L: LieAlgebra, a: GradedTensor, b: GradedTensor) -> GradedTensor:
    terms = [(u + v, cu * cv) for u, cu in a.terms.items() for v, cv in b.terms.items()]
    return wedge(L, terms, min(a.order, b.order))


def ad_action(L: LieAlgebra, x: int, t: GradedTensor) -> GradedTensor:
    """Adjoint action of generator x on a wedge tensor, slot by slot."""
    terms = []
    dx = L.degrees[x]
    for word, c in t.terms.items():
        before = 0
        for pos, g in enumerate(word):
            s = -1 if (dx * before) % 2 else 1
            for k, ck in L.bracket_gen(x, g).items():
                terms.append((word[:pos] + (k,) + word[pos + 1:], c * (s * ck)))
            before += L.degrees[g] + 1
    return wedge(L, terms, t.order)


def adjoint_invariance(L: LieAlgebra, t: GradedTensor) -> list:
    """Generators whose adjoint action does not kill ``t``, with the residual."""
    report = []
    for x in range(L.dim):
        r = ad_action(L, x, t)
        if not r.is_zero():
            report.append((L.names[x], r))
    return report


def coboundary_cobracket(L: LieAlgebra, r: GradedTensor) -> dict:
    """delta_r(x) = ad_x(r) for every generator x."""
    return {x: ad_action(L, x, r) for x in range(L.dim)}


def _extend_cobracket(L: LieAlgebra, delta: Mapping, t: GradedTensor) -> GradedTensor:
    """Extend delta from generators to Lambda(g) as an odd derivation."""
    terms = []
    for word, c in t.terms.items():
        before = 0
        for pos, g in enumerate(word):
            s = -1 if before % 2 else 1
            for w, cw in delta[g].terms.items():
                terms.append((word[:pos] + w + word[pos + 1:], c * cw * s))
            before += L.degrees[g] + 1
    return wedge(L, terms, t.order)


def cojacobi_residual(L: LieAlgebra, delta: Mapping) -> dict:
    """Generator -> (delta extended) applied to delta(x); zero iff co-Jacobi holds."""
    out = {}
    for x in range(L.dim):
        r = _extend_cobracket(L, delta, delta[x])
        if not r.is_zero():
            out[x] = r
    return out


# -- the graded Lie bialgebra R + V[1] + V* + g ---------------------------

@dataclass(frozen=True)
class HeisenbergConvention:
    """Bracket convention for E = R c + V[1] + V*: [w_i, v_j] = delta_ij c.

    V[1] sits in degree ``v_degree`` and V* in ``w_degree``; the central
    generator gets the sum so that the pairing is homogeneous.
    """

    v_degree: int = -1
    w_degree: int = 0

    @property
    def central_degree(self) -> int:
        return self.v_degree + self.w_degree


@dataclass(frozen=True)
class TildeG:
    algebra: LieAlgebra
    cobracket: dict
    r: GradedTensor


class RejectedPrecondition(ValueError):
    """Input data failed a checked precondition; ``residual`` is the witness."""

    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


def build_tilde_g(V_dim: int, g: LieAlgebra, r: GradedTensor,
                  convention: HeisenbergConvention = HeisenbergConvention()) -> TildeG:
    """Direct sum of the Heisenberg algebra on V and the Lie bialgebra (g, [r,-])."""
    Z = schouten_algebraic(g, r, r)
    res = adjoint_invariance(g, Z)
    if res:
        raise RejectedPrecondition("[r,r] is not ad-invariant", res)
    names = ["c"] + [f"v{i + 1}" for i in range(V_dim)] + [f"w{i + 1}" for i in range(V_dim)]
    degrees = [convention.central_degree] + [convention.v_degree] * V_dim + [convention.w_degree] * V_dim
    off = len(names)
    names += [f"g.{n}" for n in g.names]
    degrees += list(g.degrees)
    br = {}
    for i in range(V_dim):
        v, w = 1 + i, 1 + V_dim + i
        # stored with the lower index first: [v, w] = -(-1)^{|v||w|} [w, v]
        sign = -koszul_sign([2, 1], [convention.v_degree, convention.w_degree])
        br[(v, w)] = {0: Fraction(sign)}
    for (i, j), vec in g.brackets.items():
        br[(i + off, j + off)] = {k + off: c for k, c in vec.items()}
    L = LieAlgebra(tuple(names), tuple(degrees), br)
    r_big = wedge(L, [(tuple(k + off for k in w), c) for w, c in r.terms.items()], r.order)
    delta = {x: zero_tensor(L, r.order) for x in range(off)}
    for x, t in coboundary_cobracket(g, r).items():
        delta[x + off] = wedge(L, [(tuple(k + off for k in w), c) for w, c in t.terms.items()], r.order)
    return TildeG(L, delta, r_big)
