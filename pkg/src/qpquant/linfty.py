"""L-infinity structures and morphisms in the shifted symmetric picture.

A graded space has a basis with degrees; the shifted degree of basis vector i
is ``deg_i - 1``.  A structure is a family of maps d_k : S^k(A[1]) -> A[1] of
degree +1, a morphism a family phi_k : S^k(A_1[1]) -> A_2[1] of degree 0.
Maps are stored on canonical words (nondecreasing index tuples, odd entries
not repeated) as {word: {output index: coeff}}.  Element coefficients may be
Fractions, HbarSeries or :class:`TPoly`.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Mapping, Sequence

from .graded import InvalidInput, koszul_sign
from .lie import LieAlgebra, RejectedPrecondition
from .series import DEFAULT_ORDER, HbarSeries


def _nz(c) -> bool:
    return bool(c)


def _acc(d: dict, key, val) -> None:
    if key in d:
        v = d[key] + val
        if _nz(v):
            d[key] = v
        else:
            del d[key]
    elif _nz(val):
        d[key] = val


class TPoly:
    """Polynomial in an auxiliary time variable t over any coefficient ring."""

    __slots__ = ("c",)

    def __init__(self, c: Mapping | None = None):
        self.c = {k: v for k, v in (c or {}).items() if _nz(v)}

    @classmethod
    def const(cls, x) -> "TPoly":
        return cls({0: x})

    def __bool__(self):
        return bool(self.c)

    def __add__(self, other):
        if not isinstance(other, TPoly):
            other = TPoly.const(other)
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out[k] + v if k in out else v
        return TPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return TPoly({k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, TPoly) else TPoly.const(-other))

    def __mul__(self, other):
        if not isinstance(other, TPoly):
            return TPoly({k: v * other for k, v in self.c.items()})
        out: dict = {}
        for i, a in self.c.items():
            for j, b in other.c.items():
                out[i + j] = out[i + j] + a * b if i + j in out else a * b
        return TPoly(out)

    def __rmul__(self, other):
        return TPoly({k: other * v for k, v in self.c.items()})

    def __eq__(self, other):
        if not isinstance(other, TPoly):
            other = TPoly.const(other) if other != 0 else TPoly()
        return self.c == other.c

    def integrate(self) -> "TPoly":
        return TPoly({k + 1: v * Fraction(1, k + 1) for k, v in self.c.items()})

    def at_one(self):
        out = 0
        for v in self.c.values():
            out = v + out
        return out

    def __repr__(self):
        return " + ".join(f"({v})t^{k}" for k, v in sorted(self.c.items())) or "0"


@dataclass(frozen=True)
class GradedSpace:
    names: tuple
    degrees: tuple

    def __post_init__(self):
        if len(self.names) != len(self.degrees):
            raise InvalidInput("one degree per basis vector")

    @property
    def dim(self) -> int:
        return len(self.names)

    def sdeg(self, i: int) -> int:
        return self.degrees[i] - 1

    def words(self, k: int) -> list:
        out = []
        for w in itertools.combinations_with_replacement(range(self.dim), k):
            if any(w[a] == w[a + 1] and self.sdeg(w[a]) % 2 for a in range(k - 1)):
                continue
            out.append(w)
        return out

    def canonical(self, word: Sequence[int]) -> tuple:
        """(sorted word, Koszul sign) or (None, 0) when an odd vector repeats."""
        order = sorted(range(len(word)), key=lambda i: word[i])
        w = tuple(word[i] for i in order)
        for a in range(len(w) - 1):
            if w[a] == w[a + 1] and self.sdeg(w[a]) % 2:
                return None, 0
        return w, koszul_sign([i + 1 for i in order], [self.sdeg(g) for g in word])

    def word_degree(self, word) -> int:
        return sum(self.sdeg(g) for g in word)


def _unshuffles(n: int):
    """Pairs (I, J) of complementary increasing index tuples, I nonempty."""
    idx = range(n)
    for k in range(1, n + 1):
        for I in itertools.combinations(idx, k):
            J = tuple(i for i in idx if i not in I)
            yield I, J


def _set_partitions(items: tuple):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [(first,)] + part
        for i in range(len(part)):
            yield part[:i] + [(first,) + part[i]] + part[i + 1:]


@dataclass(frozen=True)
class LInftyStructure:
    space: GradedSpace
    maps: Mapping  # k -> {word: {out: coeff}}

    def component(self, k: int) -> Mapping:
        return self.maps.get(k, {})

    def apply(self, word: Sequence[int]) -> dict:
        """d_k on a possibly non-canonical word of basis vectors."""
        w, s = self.space.canonical(word)
        if w is None:
            return {}
        img = self.component(len(w)).get(w, {})
        return {o: c * s for o, c in img.items()} if s == -1 else dict(img)


@dataclass(frozen=True)
class LInftyMorphism:
    source: GradedSpace
    target: GradedSpace
    maps: Mapping  # k -> {word: {out: coeff}}

    def component(self, k: int) -> Mapping:
        return self.maps.get(k, {})

    def apply(self, word: Sequence[int]) -> dict:
        w, s = self.source.canonical(word)
        if w is None:
            return {}
        img = self.component(len(w)).get(w, {})
        return {o: c * s for o, c in img.items()} if s == -1 else dict(img)


# -- coderivation and morphism extensions ------------------------------------

def _sym_mul(space: GradedSpace, a: dict, b: dict) -> dict:
    """Product in S(A[1]) of {word: coeff} combinations."""
    out: dict = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            w, s = space.canonical(wa + wb)
            if w is not None:
                _acc(out, w, ca * cb * s if s == -1 else ca * cb)
    return out


def coderivation_apply(S: LInftyStructure, word: tuple) -> dict:
    """Q(x_1 ... x_n) = sum_{I,J} eps d(x_I) x_J, as {word: coeff}."""
    space = S.space
    degs = [space.sdeg(g) for g in word]
    out: dict = {}
    for I, J in _unshuffles(len(word)):
        s = koszul_sign([i + 1 for i in I + J], degs)
        img = S.apply(tuple(word[i] for i in I))
        rest = {tuple(word[j] for j in J): Fraction(s)}
        for o, c in img.items():
            for w, cw in _sym_mul(space, {(o,): c}, rest).items():
                _acc(out, w, cw)
    return out


def _project(S: LInftyStructure, combo: dict) -> dict:
    """Apply the cogenerator projection of Q to a combination of words."""
    out: dict = {}
    for w, c in combo.items():
        for o, co in S.apply(w).items():
            _acc(out, o, co * c)
    return out


def check_structure(S: LInftyStructure, K: int = 3) -> dict:
    """{(word): residual vector} for (Q o Q) projected to A[1], words of length <= K."""
    report = {}
    for k in range(1, K + 1):
        for w in S.space.words(k):
            r = _project(S, coderivation_apply(S, w))
            if r:
                report[w] = r
    return report


def morphism_extension(phi: LInftyMorphism, word: tuple) -> dict:
    """Phi(x_1 ... x_n) = sum over set partitions of the signed product of components."""
    src, tgt = phi.source, phi.target
    degs = [src.sdeg(g) for g in word]
    out: dict = {}
    for part in _set_partitions(tuple(range(len(word)))):
        part = sorted(part)
        flat = [i for block in part for i in block]
        s = koszul_sign([i + 1 for i in flat], degs)
        acc = {(): Fraction(s)}
        for block in part:
            img = phi.apply(tuple(word[i] for i in block))
            if not img:
                acc = {}
                break
            acc = _sym_mul(tgt, acc, {(o,): c for o, c in img.items()})
        for w, c in acc.items():
            _acc(out, w, c)
    return out


def check_morphism(phi: LInftyMorphism, S1: LInftyStructure, S2: LInftyStructure, K: int = 3) -> dict:
    """{word: residual} of (Phi o Q_1 - Q_2 o Phi) projected to A_2[1]."""
    report = {}
    for k in range(1, K + 1):
        for w in S1.space.words(k):
            lhs: dict = {}
            for w2, c in coderivation_apply(S1, w).items():
                for o, co in phi.apply(w2).items():
                    _acc(lhs, o, co * c)
            rhs = _project(S2, morphism_extension(phi, w))
            for o, c in rhs.items():
                _acc(lhs, o, -c)
            if lhs:
                report[w] = lhs
    return report


# -- DGLAs -------------------------------------------------------------------

@dataclass(frozen=True)
class DGLA:
    """Graded Lie algebra on a basis with a differential, both as structure constants."""

    space: GradedSpace
    bracket: Mapping  # (i, j) with i <= j -> {k: coeff}; [j, i] by graded antisymmetry
    differential: Mapping  # i -> {k: coeff}

    def br(self, i: int, j: int) -> dict:
        if (i, j) in self.bracket:
            return dict(self.bracket[(i, j)])
        if (j, i) in self.bracket:
            s = -1 if (self.space.degrees[i] * self.space.degrees[j]) % 2 == 0 else 1
            return {k: c * s for k, c in self.bracket[(j, i)].items()}
        return {}


def from_dgla(g: DGLA) -> LInftyStructure:
    """d_1(sx) = -s(dx), d_2(sx, sy) = (-1)^{|x|} s[x, y]."""
    sp = g.space
    d1 = {}
    for i, v in g.differential.items():
        img = {k: -Fraction(c) for k, c in v.items() if c}
        if img:
            d1[(i,)] = img
    d2 = {}
    for w in sp.words(2):
        i, j = w
        s = -1 if sp.degrees[i] % 2 else 1
        img = {k: Fraction(c) * s for k, c in g.br(i, j).items() if c}
        if img:
            d2[w] = img
    return LInftyStructure(sp, {1: d1, 2: d2})


def random_dgla(rng: random.Random, lie: LieAlgebra | None = None, c: int | None = None) -> DGLA:
    """L (x) C with C = span{1, x, y}, dx = c y, all products with x, y zero.

    L is a random change of basis of ``lie`` (a random solvable algebra when None).
    """
    from .lie import random_solvable

    L = lie if lie is not None else random_solvable(3, rng)
    n = L.dim
    # random invertible change of basis: unipotent times diagonal
    P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            P[i][j] = Fraction(rng.randint(-2, 2))
        P[i][i] = Fraction(rng.choice([1, 2, -1, 3]))
    Pinv = _inverse(P)

    def bracket_new(a: int, b: int) -> dict:
        # new basis vector a = sum_i P[i][a] old_i
        out: dict = {}
        for i in range(n):
            for j in range(n):
                cij = P[i][a] * P[j][b]
                if not cij:
                    continue
                for k, v in L.bracket_gen(i, j).items():
                    for m in range(n):
                        _acc(out, m, cij * v * Pinv[m][k])
        return out

    cval = Fraction(c if c is not None else rng.choice([1, 2, -1, 3]))
    names, degrees, parts = [], [], (("1", 0), ("x", 0), ("y", 1))
    for a in range(n):
        for p, dp in parts:
            names.append(f"{L.names[a]}{p}")
            degrees.append(dp)
    sp = GradedSpace(tuple(names), tuple(degrees))
    br = {}
    for i in range(3 * n):
        for j in range(i, 3 * n):
            (a, p), (b, q) = divmod(i, 3), divmod(j, 3)
            if p and q:
                continue
            v = bracket_new(a, b)
            r = p or q
            if v:
                br[(i, j)] = {3 * k + r: cc for k, cc in v.items()}
    diff = {3 * a + 1: {3 * a + 2: cval} for a in range(n)}
    return DGLA(sp, br, diff)


def _inverse(P):
    n = len(P)
    M = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(P)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col])
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def dgla_map(source: DGLA, target: DGLA, matrix: Mapping) -> LInftyMorphism:
    """Strict morphism with phi_1 = matrix (source index -> {target index: coeff})."""
    comp = {}
    for i, img in matrix.items():
        img = {k: Fraction(c) for k, c in img.items() if c}
        if img:
            comp[(i,)] = img
    return LInftyMorphism(source.space, target.space, {1: comp})


def identity_morphism(space: GradedSpace) -> LInftyMorphism:
    return LInftyMorphism(space, space, {1: {(i,): {i: Fraction(1)} for i in range(space.dim)}})


def break_jacobi(g: DGLA, rng: random.Random, tries: int = 50) -> DGLA:
    """Perturb one bracket among degree-0 vectors so that Jacobi fails.

    Only pairs closed under the differential's kernel are touched, so the
    Leibniz rule survives and the defect sits in arity three.
    """
    sp = g.space
    zero = [i for i in range(sp.dim) if sp.degrees[i] == 0 and i not in g.differential]
    for _ in range(tries):
        i, j = sorted(rng.sample(zero, 2))
        k = rng.choice(zero)
        br = {key: dict(v) for key, v in g.bracket.items()}
        v = br.setdefault((i, j), {})
        v[k] = v.get(k, 0) + rng.choice([1, 2, -1])
        if not v[k]:
            del v[k]
        h = DGLA(sp, br, g.differential)
        if check_structure(from_dgla(h), 3):
            return h
    raise RejectedPrecondition("no Jacobi-breaking perturbation found")


def report_by_length(report: Mapping) -> dict:
    """Group a residual report by word length: {k: number of failing words}."""
    out: dict = {}
    for w in report:
        out[len(w)] = out.get(len(w), 0) + 1
    return out


# -- deformation of a morphism along a homotopy ------------------------------

def _component_apply(comps: Mapping, space: GradedSpace, word: tuple) -> dict:
    w, s = space.canonical(word)
    if w is None:
        return {}
    img = comps.get(len(w), {}).get(w, {})
    return {o: c * s for o, c in img.items()} if s == -1 else dict(img)


def _phi_coderivation(phi_comps: Mapping, V: Mapping, m: int, src: GradedSpace,
                      tgt: GradedSpace, word: tuple) -> dict:
    """V extended as a coderivation along the coalgebra map with components phi.

    V(x_B) * Phi(x_rest) summed over m-element subsets B, V placed first.
    """
    degs = [src.sdeg(g) for g in word]
    n = len(word)
    out: dict = {}
    rest_phi = LInftyMorphism(src, tgt, phi_comps)
    for B in itertools.combinations(range(n), m):
        R = tuple(i for i in range(n) if i not in B)
        s = koszul_sign([i + 1 for i in B + R], degs)
        vimg = _component_apply({m: V}, src, tuple(word[i] for i in B))
        if not vimg:
            continue
        rest = morphism_extension(rest_phi, tuple(word[i] for i in R)) if R else {(): Fraction(1)}
        for w, c in _sym_mul(tgt, {(o,): cv * s for o, cv in vimg.items()}, rest).items():
            _acc(out, w, c)
    return out


def deform_morphism(phi: LInftyMorphism, V: Mapping, m: int, S1: LInftyStructure,
                    S2: LInftyStructure, K: int = 3) -> LInftyMorphism:
    """Time-one flow of d phi_t / dt = Q_2 V_t + V_t Q_1 on components up to arity K.

    V maps canonical source words of length m to target vectors and lowers the
    shifted degree by one.  Components below arity m are untouched; the
    arity-m component moves by d_2 V + V d_1.  The flow preserves the morphism
    equation, so a valid input yields a valid output.
    """
    src, tgt = phi.source, phi.target
    for w, img in V.items():
        if len(w) != m:
            raise InvalidInput(f"V component {w} is not of arity {m}")
        for o, c in img.items():
            if c and tgt.sdeg(o) != src.word_degree(w) - 1:
                raise InvalidInput(f"V{w} -> {o} has the wrong degree")
    comps = {k: {w: {o: TPoly.const(c) for o, c in img.items()} for w, img in phi.component(k).items()}
             for k in range(1, K + 1)}
    for n in range(m, K + 1):
        new = {w: dict(img) for w, img in comps[n].items()}
        lower = {k: comps[k] for k in range(1, n)}
        for w in src.words(n):
            rate: dict = {}
            for w2, c in _phi_coderivation(lower, V, m, src, tgt, w).items():
                for o, co in S2.apply(w2).items():
                    _acc(rate, o, c * co)
            for w2, c in coderivation_apply(S1, w).items():
                if len(w2) == m:
                    for o, co in _component_apply({m: V}, src, w2).items():
                        _acc(rate, o, c * co)
            if rate:
                img = new.setdefault(w, {})
                for o, r in rate.items():
                    r = r if isinstance(r, TPoly) else TPoly.const(r)
                    _acc(img, o, r.integrate())
                if not img:
                    del new[w]
        comps[n] = new
    final = {}
    for k, cs in comps.items():
        out = {}
        for w, img in cs.items():
            v = {o: c.at_one() for o, c in img.items()}
            v = {o: c for o, c in v.items() if c}
            if v:
                out[w] = v
        final[k] = out
    return LInftyMorphism(src, tgt, final)


def random_homotopy(src: GradedSpace, tgt: GradedSpace, m: int, rng: random.Random,
                    bound: int = 2, density: float = 0.3) -> dict:
    V = {}
    for w in src.words(m):
        d = src.word_degree(w) - 1
        img = {o: Fraction(rng.randint(-bound, bound)) for o in range(tgt.dim)
               if tgt.sdeg(o) == d and rng.random() < density}
        img = {o: c for o, c in img.items() if c}
        if img:
            V[w] = img
    return V


# -- Maurer-Cartan elements --------------------------------------------------

def _check_mc_degree(space: GradedSpace, x: Mapping, sdeg: int, what: str) -> None:
    for i, c in x.items():
        if c and space.sdeg(i) != sdeg:
            raise InvalidInput(f"{what} has a component {space.names[i]} of the wrong degree")


def _powers(space: GradedSpace, x: Mapping, k: int):
    """Pairs (word, coeff) with x^k / k! = sum coeff * word over canonical words."""
    items = sorted((i, c) for i, c in x.items() if c)
    for combo in itertools.combinations_with_replacement(items, k):
        word = tuple(i for i, _ in combo)
        coeff = Fraction(1)
        mult: dict = {}
        for i in word:
            mult[i] = mult.get(i, 0) + 1
        for v in mult.values():
            coeff /= factorial(v)
        prod = None
        for _, c in combo:
            prod = c if prod is None else prod * c
        yield word, coeff if prod is None else prod * coeff


def mc_residual(S: LInftyStructure, pi: Mapping, K: int = 3) -> dict:
    """sum_k 1/k! d_k(pi, ..., pi) for pi of shifted degree zero."""
    _check_mc_degree(S.space, pi, 0, "MC candidate")
    out: dict = {}
    for k in range(1, K + 1):
        for w, c in _powers(S.space, pi, k):
            for o, co in S.apply(w).items():
                _acc(out, o, c * co)
    return out


def mc_transport(phi: LInftyMorphism, pi: Mapping, S1: LInftyStructure | None = None,
                 N: int = DEFAULT_ORDER, K: int = 3) -> dict:
    """sum_k 1/k! phi_k(pi, ..., pi), for pi with hbar-valuation at least one."""
    _check_mc_degree(phi.source, pi, 0, "MC candidate")
    for c in pi.values():
        if not isinstance(c, HbarSeries) or c.valuation() < 1:
            raise InvalidInput("MC candidate must have hbar-valuation >= 1")
    if S1 is not None and mc_residual(S1, pi, K):
        raise RejectedPrecondition("source MC residual is nonzero", mc_residual(S1, pi, K))
    out: dict = {}
    for k in range(1, min(N, K) + 1):
        for w, c in _powers(phi.source, pi, k):
            for o, co in phi.apply(w).items():
                _acc(out, o, c * co)
    return out


def gauge_transform(pi: Mapping, g: Mapping, S: LInftyStructure, N: int = DEFAULT_ORDER,
                    K: int = 3) -> dict:
    """Time-one flow of d pi / dt = sum_k 1/k! d_{k+1}(g, pi, ..., pi).

    g has shifted degree -1 and hbar-valuation >= 1, so Picard iteration
    stabilizes after N + 1 rounds modulo hbar^(N+1).
    """
    sp = S.space
    _check_mc_degree(sp, pi, 0, "MC element")
    _check_mc_degree(sp, g, -1, "gauge generator")
    for c in g.values():
        if not isinstance(c, HbarSeries) or c.valuation() < 1:
            raise InvalidInput("gauge generator must have hbar-valuation >= 1")
    if not any(g.values()):
        return dict(pi)
    start = {i: TPoly.const(c) for i, c in pi.items() if c}
    gt = {i: TPoly.const(c) for i, c in g.items() if c}
    cur = dict(start)
    for _ in range(N + 1):
        rate: dict = {}
        for k in range(0, K):
            for w, c in _powers(sp, cur, k):
                for gi, gc in gt.items():
                    for o, co in S.apply((gi,) + w).items():
                        _acc(rate, o, gc * c * co)
        nxt = dict(start)
        for o, r in rate.items():
            _acc(nxt, o, r.integrate())
        cur = nxt
    out = {}
    for i, c in cur.items():
        v = c.at_one()
        if v:
            out[i] = v
    return out


def bch_generator(g1: Mapping, g2: Mapping, S: LInftyStructure) -> dict:
    """Gauge generator of g1 followed by g2, through second order in the bracket."""
    out: dict = {}
    for g in (g1, g2):
        for i, c in g.items():
            _acc(out, i, c)
    half = Fraction(1, 2)
    for i, a in g2.items():
        for j, b in g1.items():
            for o, c in S.apply((i, j)).items():
                _acc(out, o, a * b * c * half)
    return out


# -- globalization side-conditions -------------------------------------------

def equivariance_predicate(U: Callable, act_in: Callable, act_out: Callable) -> Callable:
    """True when U(n, A.args) == A.U(n, args) for the given linear change A."""
    def check(n: int, args: Sequence) -> bool:
        return U(n, [act_in(a) for a in args]) == act_out(U(n, list(args)))
    return check


def vector_field_pair_predicate(U: Callable) -> Callable:
    """True when U_2 vanishes on a pair of vector fields."""
    def check(xi, eta) -> bool:
        return not U(2, [xi, eta])
    return check


def linear_field_predicate(U: Callable) -> Callable:
    """True when U_n(xi, ...) = 0 for a linear vector field xi and n >= 2."""
    def check(xi, others: Sequence) -> bool:
        if len(others) < 1:
            raise InvalidInput("need n >= 2 arguments")
        return not U(len(others) + 1, [xi, *others])
    return check
