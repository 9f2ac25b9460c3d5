"""The cofree tensor coalgebra over T_+U with braces, star product and differential.

A word is a tuple of letters; a letter is one PBW basis tensor of U^{(x)a},
stored as a tuple of ``a`` monomials.  Letters have degree ``a - 1`` plus the
internal degree.  Coefficients carry an hbar power and a nu power.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Mapping

from .cochain import hochschild_diff
from .graded import BlockPartition, GradedTensor, InvalidInput
from .lie import (
    LieAlgebra,
    RejectedPrecondition,
    _extend_cobracket,
    check_jacobi,
    cojacobi_residual,
    schouten_algebraic,
    wedge,
    wedge_product,
)
from . import linsolve
from .series import DEFAULT_ORDER, HbarSeries
from .uea import UEA, UTensor


class BoundOverflow(ArithmeticError):
    pass


def _acc(d: dict, key, val) -> None:
    v = d.get(key, 0) + val
    if v:
        d[key] = v
    else:
        d.pop(key, None)


@dataclass
class BraceModel:
    """U model plus truncation bounds and the sign convention switch."""

    uea: UEA
    order: int = DEFAULT_ORDER
    outer: int = 3
    arity: int = 3
    eps_sign: int = 1  # -1 selects the mutated sign (-1)^{sum k_s i_s}
    _cache: dict = field(default_factory=dict, repr=False)

    def letter_degree(self, letter: tuple) -> int:
        return len(letter) - 1 + sum(self.uea.mono_degree(m) for m in letter)

    def word_degree(self, word: tuple) -> int:
        return sum(self.letter_degree(x) for x in word)

    def tensor(self, letter: tuple) -> UTensor:
        return UTensor(self.uea, len(letter), {(0, letter): Fraction(1)}, self.order)

    def element(self, terms: Mapping | None = None) -> "BraceElement":
        return BraceElement(self, dict(terms or {}))

    def word(self, *letters, coeff=1) -> "BraceElement":
        return BraceElement(self, {(tuple(letters), 0, 0): Fraction(coeff)})

    def from_tensor(self, t: UTensor) -> "BraceElement":
        out = {}
        for (k, ms), c in t.terms.items():
            _acc(out, ((ms,), k, 0), c)
        return BraceElement(self, out)

    def unit(self) -> "BraceElement":
        return BraceElement(self, {((), 0, 0): Fraction(1)})

    def m0(self) -> "BraceElement":
        """The multiplication 1(x)1 as a one-letter word."""
        return self.word(((), ()))

    # -- cogenerator operations -------------------------------------------
    def b1n(self, alpha: tuple, betas: tuple) -> dict:
        """B^{1,n}(alpha; beta_1 ... beta_n) as {(letter, hbar power): coeff}."""
        key = ("b1n", alpha, betas)
        if key in self._cache:
            return self._cache[key]
        a = len(alpha)
        ks = [len(b) for b in betas]
        m = len(betas)
        n_out = a + sum(ks) - m
        if n_out > self.arity:
            raise BoundOverflow(f"brace output arity {n_out} exceeds bound {self.arity}")
        out: dict = {}
        A = self.tensor(alpha)
        # choose which alpha slots receive the betas (in order)
        for slots in itertools.combinations(range(a), m):
            blocks, pos, starts, s = [], 1, [], 0
            for j in range(a):
                if s < m and slots[s] == j:
                    starts.append(pos - 1)
                    blocks.append(tuple(range(pos, pos + ks[s])))
                    pos += ks[s]
                    s += 1
                else:
                    blocks.append((pos,))
                    pos += 1
            if self.eps_sign == 1:
                eps = sum((k - 1) * i for k, i in zip(ks, starts))
            else:
                eps = sum(k * i for k, i in zip(ks, starts))
            t = A.insert(BlockPartition(tuple(blocks), n_out))
            placed = self.uea.unit(n_out, self.order)
            for b, i in zip(betas, starts):
                bt = self.tensor(b)
                placed = placed * bt.insert(BlockPartition(tuple((i + 1 + q,) for q in range(len(b))), n_out))
            t = t * placed
            sign = -1 if eps % 2 else 1
            for (k, ms), c in t.terms.items():
                _acc(out, (ms, k), c * sign)
        self._cache[key] = out
        return out

    def b1(self, alpha: tuple) -> dict:
        key = ("b1", alpha)
        if key not in self._cache:
            if len(alpha) + 1 > self.arity:
                raise BoundOverflow(f"coboundary arity {len(alpha) + 1} exceeds bound {self.arity}")
            t = hochschild_diff(self.tensor(alpha))[len(alpha) + 1]
            self._cache[key] = {(ms, k): c for (k, ms), c in t.terms.items()}
        return self._cache[key]

    def b2(self, alpha: tuple, beta: tuple) -> dict:
        """alpha (x) beta with the sign (-1)^{a(b-1)} of M{alpha, beta}."""
        a, b = len(alpha), len(beta)
        if a + b > self.arity:
            raise BoundOverflow(f"product arity {a + b} exceeds bound {self.arity}")
        sign = -1 if (a * (b - 1)) % 2 else 1
        return {(alpha + beta, 0): Fraction(sign)}

    # -- product on basis words -------------------------------------------
    def star_words(self, x: tuple, y: tuple, nu: bool = False) -> dict:
        """x * y as {(word, hbar power, nu power): coeff}."""
        key = ("star", x, y, nu)
        if key in self._cache:
            return self._cache[key]
        if not x:
            res = {(y, 0, 0): Fraction(1)}
        elif not y:
            res = {(x, 0, 0): Fraction(1)}
        else:
            res = {}
            dx = self.word_degree(x)
            # first letter is y_1 alone
            s = -1 if (self.letter_degree(y[0]) * dx) % 2 else 1
            for (w, k, v), c in self.star_words(x, y[1:], nu).items():
                _acc(res, ((y[0],) + w, k, v), c * s)
            # first letter is B^{1,j}(x_1; y_1..y_j)
            dxr = self.word_degree(x[1:])
            for j in range(0, len(y) + 1):
                s = -1 if (self.word_degree(y[:j]) * dxr) % 2 else 1
                head = {(x[0], 0): Fraction(1)} if j == 0 else self.b1n(x[0], y[:j])
                if not head:
                    continue
                tail = self.star_words(x[1:], y[j:], nu)
                wnu = j if nu else 0
                for (letter, kh), ch in head.items():
                    for (w, k, v), c in tail.items():
                        if kh + k <= self.order:
                            _acc(res, ((letter,) + w, kh + k, v + wnu), ch * c * s)
        for (w, _, _) in res:
            if len(w) > self.outer:
                raise BoundOverflow(f"word length {len(w)} exceeds outer bound {self.outer}")
        self._cache[key] = res
        return res

    def diff_word(self, w: tuple, nu: bool = False) -> dict:
        key = ("d", w, nu)
        if key in self._cache:
            return self._cache[key]
        res: dict = {}
        before = 0
        for i, x in enumerate(w):
            s = -1 if before % 2 else 1
            for (letter, k), c in self.b1(x).items():
                _acc(res, (w[:i] + (letter,) + w[i + 1:], k, 0), c * s)
            if i + 1 < len(w):
                for (letter, k), c in self.b2(x, w[i + 1]).items():
                    _acc(res, (w[:i] + (letter,) + w[i + 2:], k, 1 if nu else 0), c * s)
            before += self.letter_degree(x)
        self._cache[key] = res
        return res


def brace_b(model: BraceModel, p: int, q: int | None, *args) -> BraceElement:
    """The cogenerator operations B^p (q is None) and B^{p,q}.

    B^p takes one word of length p; B^{p,q} takes two words of lengths p and q.
    The result is a combination of one-letter words.
    """
    if q is None:
        (w,) = args
        if len(w) != p:
            raise InvalidInput(f"B^{p} expects a word of length {p}")
        if p == 1:
            items = model.b1(w[0])
        elif p == 2:
            items = model.b2(w[0], w[1])
        else:
            items = {}
        return BraceElement(model, {((letter,), k, 0): c for (letter, k), c in items.items()})
    x, y = args
    if len(x) != p or len(y) != q:
        raise InvalidInput(f"B^{{{p},{q}}} expects words of lengths {p} and {q}")
    if (p, q) in ((0, 1), (1, 0)):
        return BraceElement(model, {(x + y, 0, 0): Fraction(1)})
    if p == 1 and q >= 1:
        items = model.b1n(x[0], y)
        return BraceElement(model, {((letter,), k, 0): c for (letter, k), c in items.items()})
    return BraceElement(model, {})


class BraceElement:
    """Sparse combination {(word, hbar power, nu power): coeff}."""

    __slots__ = ("model", "terms")

    def __init__(self, model: BraceModel, terms: Mapping):
        self.model = model
        clean: dict = {}
        for (w, k, v), c in terms.items():
            if k <= model.order:
                _acc(clean, (tuple(w), k, v), Fraction(c))
        self.terms = clean

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other: "BraceElement") -> "BraceElement":
        t = dict(self.terms)
        for key, c in other.terms.items():
            _acc(t, key, c)
        return BraceElement(self.model, t)

    def __neg__(self):
        return BraceElement(self.model, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "BraceElement":
        return BraceElement(self.model, {k: c * s for k, c in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, BraceElement):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*h^{k}*nu^{v}*{list(w)}" for (w, k, v), c in sorted(self.terms.items(), key=str))

    def degree_parts(self) -> dict:
        out: dict = {}
        for key, c in self.terms.items():
            d = self.model.word_degree(key[0])
            out.setdefault(d, {})[key] = c
        return {d: BraceElement(self.model, t) for d, t in out.items()}

    def lengths(self) -> set:
        return {len(w) for (w, _, _) in self.terms}


def _bilinear(x: BraceElement, y: BraceElement, f) -> BraceElement:
    model = x.model
    out: dict = {}
    for (wx, kx, vx), cx in x.terms.items():
        for (wy, ky, vy), cy in y.terms.items():
            if kx + ky > model.order:
                continue
            for (w, k, v), c in f(wx, wy).items():
                if kx + ky + k <= model.order:
                    _acc(out, (w, kx + ky + k, vx + vy + v), cx * cy * c)
    return BraceElement(model, out)


def deformed_product(x: BraceElement, y: BraceElement, nu: bool = False) -> BraceElement:
    return _bilinear(x, y, lambda a, b: x.model.star_words(a, b, nu))


def deformed_diff(x: BraceElement, nu: bool = False) -> BraceElement:
    model = x.model
    out: dict = {}
    for (w, k, v), c in x.terms.items():
        for (w2, k2, v2), c2 in model.diff_word(w, nu).items():
            if k + k2 <= model.order:
                _acc(out, (w2, k + k2, v + v2), c * c2)
    return BraceElement(model, out)


def shuffle_product(x: BraceElement, y: BraceElement) -> BraceElement:
    """Signed shuffle product (the product with every B^{1,n}, n >= 1, set to 0)."""
    model = x.model

    @lru_cache(maxsize=None)
    def sh(a: tuple, b: tuple) -> tuple:
        if not a:
            return (((b, 0, 0), Fraction(1)),)
        if not b:
            return (((a, 0, 0), Fraction(1)),)
        res: dict = {}
        for (w, k, v), c in sh(a[1:], b):
            _acc(res, ((a[0],) + w, k, v), c)
        s = -1 if (model.letter_degree(b[0]) * model.word_degree(a)) % 2 else 1
        for (w, k, v), c in sh(a, b[1:]):
            _acc(res, ((b[0],) + w, k, v), c * s)
        return tuple(res.items())

    return _bilinear(x, y, lambda a, b: dict(sh(a, b)))


def ad_m(x: BraceElement) -> BraceElement:
    """M * x - (-1)^{|x|} x * M for M = 1(x)1."""
    M = x.model.m0()
    out = BraceElement(x.model, {})
    for d, part in x.degree_parts().items():
        out = out + deformed_product(M, part) - deformed_product(part, M).scale(-1 if d % 2 else 1)
    return out


# -- tensor squares ---------------------------------------------------------

def coproduct(x: BraceElement) -> dict:
    """Deconcatenation {(left word, right word, hbar, nu): coeff}."""
    out: dict = {}
    for (w, k, v), c in x.terms.items():
        for i in range(len(w) + 1):
            _acc(out, (w[:i], w[i:], k, v), c)
    return out


def _tensor_star(model: BraceModel, A: dict, B: dict) -> dict:
    """(a' (x) a'') * (b' (x) b'') with sign (-1)^{|a''||b'|}."""
    out: dict = {}
    for (a1, a2, ka, va), ca in A.items():
        for (b1, b2, kb, vb), cb in B.items():
            s = -1 if (model.word_degree(a2) * model.word_degree(b1)) % 2 else 1
            left = model.star_words(a1, b1)
            right = model.star_words(a2, b2)
            for (w1, k1, v1), c1 in left.items():
                for (w2, k2, v2), c2 in right.items():
                    k = ka + kb + k1 + k2
                    if k <= model.order:
                        _acc(out, (w1, w2, k, va + vb + v1 + v2), ca * cb * c1 * c2 * s)
    return out


def _tensor_d(model: BraceModel, A: dict) -> dict:
    out: dict = {}
    for (a1, a2, k, v), c in A.items():
        for (w, k1, v1), c1 in model.diff_word(a1).items():
            if k + k1 <= model.order:
                _acc(out, (w, a2, k + k1, v + v1), c * c1)
        s = -1 if model.word_degree(a1) % 2 else 1
        for (w, k1, v1), c1 in model.diff_word(a2).items():
            if k + k1 <= model.order:
                _acc(out, (a1, w, k + k1, v + v1), c * c1 * s)
    return out


# -- nu rescaling -----------------------------------------------------------

def rescale_nu(x: BraceElement) -> BraceElement:
    """I_nu: multiply each word by nu^{-length}."""
    return BraceElement(x.model, {(w, k, v - len(w)): c for (w, k, v), c in x.terms.items()})


# -- axiom suite ------------------------------------------------------------

def random_letter(model: BraceModel, rng: random.Random, max_arity: int = 2, filtration: int = 3) -> tuple:
    a = rng.randint(1, max_arity)
    budget = filtration
    slots = []
    for _ in range(a):
        n = rng.randint(0, min(2, budget))
        budget -= n
        slots.append(tuple(sorted(rng.randrange(model.uea.lie.dim) for _ in range(n))))
    return tuple(slots)


def random_element(model: BraceModel, rng: random.Random, max_len: int = 2, terms: int = 2,
                   max_arity: int = 2, filtration: int = 3) -> BraceElement:
    out: dict = {}
    for _ in range(terms):
        n = rng.randint(1, max_len)
        w = tuple(random_letter(model, rng, max_arity, filtration) for _ in range(n))
        _acc(out, (w, 0, 0), Fraction(rng.choice([-2, -1, 1, 2, 3])))
    return BraceElement(model, out)


AXIOMS = ("associativity", "coassociativity", "compatibility", "d_squared", "coderivation", "leibniz")


def bialgebra_axiom_suite(uea: UEA, trials: int = 100, seed: int = 0, max_len: int = 2, max_arity: int = 2,
                          filtration: int = 3, eps_sign: int = 1, order: int = DEFAULT_ORDER) -> dict:
    """Random-trial check of the differential bialgebra axioms.

    Returns {axiom: {"pass": bool, "failures": count, "witness": residual or None}}.
    """
    model = BraceModel(uea, order=order, outer=3 * max_len + 1, arity=3 * max_arity + 2, eps_sign=eps_sign)
    rng = random.Random(seed)
    report = {a: {"pass": True, "failures": 0, "witness": None} for a in AXIOMS}

    def record(name, residual):
        if residual:
            r = report[name]
            r["pass"] = False
            r["failures"] += 1
            if r["witness"] is None:
                r["witness"] = residual

    for _ in range(trials):
        a, b, c = (random_element(model, rng, max_len, 1, max_arity, filtration) for _ in range(3))
        ab = deformed_product(a, b)
        record("associativity", deformed_product(ab, c) - deformed_product(a, deformed_product(b, c)))
        # deconcatenation is coassociative on words; checked on a
        D = coproduct(a)
        left, right = {}, {}
        for (w1, w2, k, v), cc in D.items():
            for i in range(len(w1) + 1):
                _acc(left, (w1[:i], w1[i:], w2, k, v), cc)
            for i in range(len(w2) + 1):
                _acc(right, (w1, w2[:i], w2[i:], k, v), cc)
        if left != right:
            record("coassociativity", a)
        lhs = coproduct(ab)
        rhs = _tensor_star(model, coproduct(a), coproduct(b))
        diff = dict(lhs)
        for key, val in rhs.items():
            _acc(diff, key, -val)
        if diff:
            record("compatibility", ab)
        da = deformed_diff(a)
        record("d_squared", deformed_diff(da))
        lhs = coproduct(da)
        rhs = _tensor_d(model, coproduct(a))
        diff = dict(lhs)
        for key, val in rhs.items():
            _acc(diff, key, -val)
        if diff:
            record("coderivation", da)
        res = deformed_diff(ab) - deformed_product(da, b)
        for d, part in a.degree_parts().items():
            res = res - deformed_product(part, deformed_diff(b)).scale(-1 if d % 2 else 1)
        record("leibniz", res)
    return report


def nu_square_residuals(uea: UEA, trials: int = 50, seed: int = 0, max_len: int = 2,
                        order: int = DEFAULT_ORDER) -> dict:
    """Residuals of I(a*b) - I(a)*_nu I(b) and I(da) - d_nu I(a) on random elements."""
    model = BraceModel(uea, order=order, outer=2 * max_len + 1, arity=6)
    rng = random.Random(seed)
    out = {"star": [], "d": []}
    for _ in range(trials):
        a = random_element(model, rng, max_len)
        b = random_element(model, rng, max_len)
        r = rescale_nu(deformed_product(a, b)) - deformed_product(rescale_nu(a), rescale_nu(b), nu=True)
        if r:
            out["star"].append(r)
        r = rescale_nu(deformed_diff(a)) - deformed_diff(rescale_nu(a), nu=True)
        if r:
            out["d"].append(r)
    return out


# -- Chevalley-Eilenberg model ----------------------------------------------

@dataclass(frozen=True)
class CEModel:
    """C(h) = S(h[-1]) with the extended bracket, wedge and d + delta."""

    lie: LieAlgebra
    cobracket: Mapping  # generator -> Lambda^2 tensor
    differential: Mapping  # generator -> vector {index: coeff}
    order: int = DEFAULT_ORDER

    def generator_image(self, g: int) -> GradedTensor:
        terms = [((k,), c) for k, c in self.differential.get(g, {}).items()]
        t = wedge(self.lie, terms, self.order)
        if g in self.cobracket:
            t = t + self.cobracket[g]
        return t

    def D(self, t: GradedTensor) -> GradedTensor:
        """d + delta extended as an odd derivation of the wedge product."""
        images = {g: self.generator_image(g) for g in range(self.lie.dim)}
        return _extend_cobracket(self.lie, images, t)

    def bracket(self, a: GradedTensor, b: GradedTensor) -> GradedTensor:
        return schouten_algebraic(self.lie, a, b)

    def product(self, a: GradedTensor, b: GradedTensor) -> GradedTensor:
        return wedge_product(self.lie, a, b)

    def shifted_degree(self, word: tuple) -> int:
        return sum(self.lie.degrees[g] + 1 for g in word)

    def basis(self, max_len: int) -> list:
        """Canonical words of length <= max_len (odd generators not repeated)."""
        out = [()]
        for k in range(1, max_len + 1):
            for w in itertools.combinations_with_replacement(range(self.lie.dim), k):
                t = wedge(self.lie, [(w, 1)], self.order)
                if not t.is_zero():
                    out.extend(word for word in t.terms if word not in out)
        return out

    def element(self, word: tuple, c=1) -> GradedTensor:
        return wedge(self.lie, [(word, c)], self.order)


def lg_functor(lie: LieAlgebra, cobracket: Mapping | None = None, differential: Mapping | None = None,
               order: int = DEFAULT_ORDER) -> CEModel:
    """Validate a differential Lie bialgebra and build its CE model.

    Raises RejectedPrecondition carrying the first nonzero residual.
    """
    cobracket = {g: t for g, t in (cobracket or {}).items() if not t.is_zero()}
    differential = {g: v for g, v in (differential or {}).items() if v}
    bad = check_jacobi(lie)
    if bad:
        raise RejectedPrecondition("Jacobi identity fails", bad)
    bad = cojacobi_residual(lie, {g: cobracket.get(g, wedge(lie, [], order)) for g in range(lie.dim)})
    if bad:
        raise RejectedPrecondition("co-Jacobi identity fails", bad)
    model = CEModel(lie, cobracket, differential, order)
    for word in model.basis(2):
        x = model.element(word)
        if word and model.D(model.D(x)).terms:
            raise RejectedPrecondition("(d + delta)^2 is nonzero", (word, model.D(model.D(x))))
    # compatibility: D is a derivation of the bracket on generators
    for i in range(lie.dim):
        for j in range(lie.dim):
            r = gerstenhaber_residuals(model, model.element((i,)), model.element((j,)))
            if r:
                raise RejectedPrecondition("differential is not a derivation of the bracket", r)
    return model


def gerstenhaber_residuals(model: CEModel, a: GradedTensor, b: GradedTensor, c: GradedTensor | None = None) -> dict:
    """Residuals of D-compatibility with the bracket, and Leibniz when c is given."""
    out = {}
    L = model.lie

    def deg(t):
        degs = {model.shifted_degree(w) for w in t.terms}
        if len(degs) > 1:
            raise InvalidInput("homogeneous element expected")
        return degs.pop() if degs else 0

    da = deg(a)
    # D[a,b] = [Da,b] + (-1)^{|a|-1}[a,Db]
    s = -1 if (da - 1) % 2 else 1
    r = model.D(model.bracket(a, b)) - model.bracket(model.D(a), b) - model.bracket(a, model.D(b)).scale(s)
    if not r.is_zero():
        out["derivation_of_bracket"] = r
    if c is not None:
        s = -1 if ((da - 1) * deg(b)) % 2 else 1
        r = model.bracket(a, model.product(b, c)) - model.product(model.bracket(a, b), c) \
            - model.product(b, model.bracket(a, c)).scale(s)
        if not r.is_zero():
            out["leibniz"] = r
    return out


def ce_map_residual(source: CEModel, target: CEModel, matrix: Mapping) -> list:
    """Extend a linear map h -> h' (gen -> {gen': coeff}) to wedge words.

    Returns (kind, input, residual) for every failure to commute with D
    on words of length <= 2 or with the bracket on pairs of generators.
    """
    def extend(t: GradedTensor) -> GradedTensor:
        terms = []
        for word, c in t.terms.items():
            for choice in itertools.product(*[list(matrix.get(g, {}).items()) for g in word]):
                coeff = c
                for _, v in choice:
                    coeff = coeff * v
                terms.append((tuple(k for k, _ in choice), coeff))
        return wedge(target.lie, terms, target.order)

    bad = []
    for word in source.basis(2):
        x = source.element(word)
        r = target.D(extend(x)) - extend(source.D(x))
        if not r.is_zero():
            bad.append(("differential", word, r))
    for i, j in itertools.combinations(range(source.lie.dim), 2):
        a, b = source.element((i,)), source.element((j,))
        r = target.bracket(extend(a), extend(b)) - extend(source.bracket(a, b))
        if not r.is_zero():
            bad.append(("bracket", (i, j), r))
    return bad


def _const(c) -> Fraction:
    if isinstance(c, HbarSeries):
        if c.truncate(0) != c:
            raise InvalidInput("hbar-independent coefficients expected")
        return c[0]
    return Fraction(c)


def ce_cohomology_dims(model: CEModel, max_len: int) -> dict:
    """Cohomology dimensions of (C(h), d) by (word length, degree), delta = 0 only."""
    if model.cobracket:
        raise InvalidInput("length grading needs a zero cobracket")
    words = model.basis(max_len)
    groups: dict = {}
    for w in words:
        groups.setdefault((len(w), model.shifted_degree(w)), []).append(w)
    rank = {}
    for (n, d), ws in groups.items():
        cols = []
        for w in ws:
            img = model.D(model.element(w)).terms
            cols.append({w2: _const(c) for w2, c in img.items()})
        rank[(n, d)] = linsolve.rank(cols)
    out = {}
    for (n, d), ws in groups.items():
        dim = len(ws) - rank[(n, d)] - rank.get((n, d - 1), 0)
        if dim:
            out[(n, d)] = dim
    return out


# -- lift to the cofree Lie coalgebra -----------------------------------------

def _cobracket_letter(delta: Mapping, g: int) -> dict:
    out: dict = {}
    t = delta.get(g)
    if t is None:
        return out
    for (i, j), c in t.terms.items():
        _acc(out, (i, j), _const(c))
        _acc(out, (j, i), -_const(c))
    return out


def cofree_colie_lift(x: Mapping, delta: Mapping, k_max: int = 3) -> dict:
    """x + sum_{k=2}^{k_max} bar-delta_k(x) as {word: coeff}.

    ``x`` is {generator: coeff}.  bar-delta_k is (1/k!) times the sum over all
    orders of applying delta to one letter at a time, k-1 times.  This is
    exact for k <= 3; from k = 4 on the lift is only defined modulo shuffle
    products and no closed iterate formula is offered.
    """
    if k_max > 3:
        raise BoundOverflow("the cofree Lie lift is implemented up to k = 3")
    out: dict = {}
    level = {(g,): Fraction(c) for g, c in x.items() if c}
    for g, c in level.items():
        _acc(out, g, c)
    for k in range(2, k_max + 1):
        nxt: dict = {}
        for w, c in level.items():
            for pos, g in enumerate(w):
                for ab, cc in _cobracket_letter(delta, g).items():
                    _acc(nxt, w[:pos] + ab + w[pos + 1:], c * cc)
        level = nxt
        for w, c in level.items():
            _acc(out, w, c / factorial(k))
    return out


def colie_lift_residual(x: Mapping, delta: Mapping, k_max: int = 3) -> dict:
    """delta_T(F x) - (F (x) F) delta(x) on pairs of total length <= k_max,
    with delta_T the antisymmetrized deconcatenation."""
    F = cofree_colie_lift(x, delta, k_max)
    lhs: dict = {}
    for w, c in F.items():
        for i in range(1, len(w)):
            _acc(lhs, (w[:i], w[i:]), c)
            _acc(lhs, (w[i:], w[:i]), -c)
    for g, cg in x.items():
        for (a, b), c in _cobracket_letter(delta, g).items():
            Fa = cofree_colie_lift({a: 1}, delta, k_max)
            Fb = cofree_colie_lift({b: 1}, delta, k_max)
            for u, cu in Fa.items():
                for v, cv in Fb.items():
                    if len(u) + len(v) <= k_max:
                        _acc(lhs, (u, v), -Fraction(cg) * c * cu * cv)
    return lhs
