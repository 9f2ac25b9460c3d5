"""Star products in the invariant-operator encoding and in coordinates.

An invariant star product is ``M = 1(x)1 + hbar m_1 + ...`` in U^{(x)2}; it acts
on functions through an action (or, for an abelian algebra, through
coordinate derivatives) and multiplies the results.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Mapping, Sequence

from .cochain import (
    Associator,
    Cochain,
    UNDEFORMED,
    as_cochain,
    hochschild_diff,
    lie_tensor_to_u,
    pentagon_residual,
)
from .graded import BlockPartition, InvalidInput
from .lie import RejectedPrecondition, schouten_algebraic
from .polyvector import ActionMap, PolyVector
from .series import DEFAULT_ORDER
from .uea import ONE, UEA, UTensor
from . import linsolve


def swap(t: UTensor) -> UTensor:
    return t.permute((2, 1))


@dataclass(frozen=True)
class StarProduct:
    """m_star in U^{(x)2}, with the bivector its skew part must reproduce."""

    M: UTensor
    pi: UTensor | None = None

    def __post_init__(self):
        if self.M.n != 2:
            raise InvalidInput("a star product lives in arity 2")
        if self.M.hbar_coefficient(0) != self.M.uea.unit(2, self.M.order).hbar_coefficient(0):
            raise InvalidInput("order-zero term must be 1(x)1")
        if self.pi is not None and self.skew_defect():
            raise RejectedPrecondition("m1 - m1^{21} differs from the designated bivector", self.skew_defect())

    @property
    def uea(self) -> UEA:
        return self.M.uea

    @property
    def order(self) -> int:
        return self.M.order

    def m(self, k: int) -> UTensor:
        return self.M.hbar_coefficient(k)

    def skew_defect(self) -> UTensor:
        m1 = self.m(1)
        return m1 - swap(m1) - self.pi

    def apply(self, f: PolyVector, g: PolyVector, act: ActionMap) -> PolyVector:
        return apply_invariant(self.M, (f, g), act)


def apply_invariant(t: UTensor, fs: Sequence[PolyVector], act: ActionMap) -> PolyVector:
    """Act with each tensor slot on the matching function and multiply."""
    if len(fs) != t.n:
        raise InvalidInput("one function per tensor slot expected")
    m = fs[0].m
    order = min([t.order] + [f.order for f in fs])
    out = PolyVector(m, {}, order)
    for (k, monos), c in t.terms.items():
        term = PolyVector.constant(m, c, order).hbar_shift(k)
        for word, f in zip(monos, fs):
            g = f
            for x in reversed(word):
                g = act.fields[x].evaluate(g)
            term = term.wedge(g)
        out = out + term
    return out


def coordinate_action(uea: UEA) -> ActionMap:
    """Generator i acts as d/dx_i; needs an abelian algebra."""
    if any(uea.lie.brackets.values()):
        raise InvalidInput("coordinate derivatives model only an abelian algebra")
    m = uea.lie.dim
    return ActionMap(uea.lie, m, tuple(PolyVector.partial(m, i) for i in range(m)))


# -- associativity ---------------------------------------------------------

def phi_assoc_residual(m, phi) -> UTensor:
    """M^{12,3} M^{1,2} - M^{1,23} M^{2,3} Phi."""
    M = m.M if isinstance(m, StarProduct) else m
    P = phi.phi if isinstance(phi, Associator) else phi
    if P is None:
        P = M.uea.unit(3, M.order)
    return M.ins((1, 2), 3) * M.ins(1, 2, n=3) - M.ins(1, (2, 3)) * M.ins(2, 3) * P


def moyal(uea: UEA, pi: UTensor, order: int = DEFAULT_ORDER) -> StarProduct:
    """exp(hbar pi / 2) for a constant bivector tensor pi (abelian algebra)."""
    if any(uea.lie.brackets.values()):
        raise InvalidInput("the exponential formula needs commuting generators")
    half = pi.hbar_shift(1) * Fraction(1, 2)
    out = uea.unit(2, order)
    power = uea.unit(2, order)
    for k in range(1, order + 1):
        power = power * half
        out = out + power * Fraction(1, factorial(k))
    return StarProduct(out.truncate(order), pi)


@dataclass
class Obstruction(Exception):
    """The linear equation at ``order`` has no solution."""

    order: int
    cochain: UTensor
    cocycle_defect: UTensor | None = None

    def __str__(self):
        return f"obstruction at order hbar^{self.order}"


def _monomials(dim: int, max_len: int):
    for k in range(max_len + 1):
        yield from itertools.combinations_with_replacement(range(dim), k)


def _pair_basis(uea: UEA, max_total: int):
    """PBW monomial pairs ordered by total degree, then lexicographically."""
    monos = list(_monomials(uea.lie.dim, max_total))
    basis = [(a, b) for a in monos for b in monos if len(a) + len(b) <= max_total]
    basis.sort(key=lambda ab: (len(ab[0]) + len(ab[1]), ab))
    return basis


def _vector(t: UTensor, k: int = 0) -> dict:
    return {ms: c for (j, ms), c in t.terms.items() if j == k}


def solve_star_order(pi, phi: Associator | None, N: int = DEFAULT_ORDER, uea: UEA | None = None,
                     Z=None, degree_bound: Callable[[int], int] | None = None) -> StarProduct:
    """Order-by-order solution of the Phi-associativity equation.

    ``pi`` is a skew bivector, either a :class:`GradedTensor` over g or a
    UTensor of arity 2.  At each order the minimal-degree solution is kept.
    Raises :class:`Obstruction` when an order cannot be solved and
    :class:`RejectedPrecondition` when the inputs are inconsistent.
    """
    if not isinstance(pi, UTensor):
        if uea is None:
            raise InvalidInput("a UEA is required for a Lie-tensor bivector")
        if Z is not None:
            lhs = schouten_algebraic(uea.lie, pi, pi)
            if lhs != Z:
                raise RejectedPrecondition("[pi, pi] differs from Z", lhs - Z)
        pi = lie_tensor_to_u(pi, uea, N)
    uea = pi.uea
    if pi + swap(pi):
        raise InvalidInput("bivector must be skew")
    if phi is None:
        phi = Associator.trivial(uea, N)
    if pentagon_residual(phi).truncate(N):
        raise RejectedPrecondition("associator fails the pentagon", pentagon_residual(phi).truncate(N))
    degree_bound = degree_bound or (lambda k: 2 * k)
    M = uea.unit(2, N) + pi.hbar_shift(1) * Fraction(1, 2)
    M = M.truncate(N)
    for k in range(1, N + 1):
        O = phi_assoc_residual(M, phi).hbar_coefficient(k)
        if k == 1 and not O:
            continue
        if not O:
            continue
        basis = _pair_basis(uea, degree_bound(k))
        cols = []
        for a, b in basis:
            unit = UTensor(uea, 2, {(0, (a, b)): Fraction(1)}, N)
            cols.append(_vector(hochschild_diff(unit)[3]))
        sol = linsolve.solve(cols, {key: -v for key, v in _vector(O).items()})
        if sol is None:
            raise Obstruction(k, O, hochschild_diff(O)[4])
        mk = UTensor(uea, 2, {(k, ab): c for ab, c in zip(basis, sol) if c}, N)
        M = M + mk
    return StarProduct(M, pi)


# -- gauge ------------------------------------------------------------------

def _require_abelian(uea: UEA):
    if any(uea.lie.brackets.values()):
        raise InvalidInput("gauge normal forms are implemented for abelian algebras")


def star_gauge_transform(M, T: UTensor) -> StarProduct | UTensor:
    """Delta(T) M (T^{-1} (x) T^{-1}) for T = 1 + O(hbar) in U."""
    star = M if isinstance(M, StarProduct) else None
    M = M.M if star else M
    if T.n != 1 or (T - T.uea.unit(1, T.order)).hbar_valuation() < 1:
        raise InvalidInput("gauge element must be 1 + O(hbar) in arity 1")
    Ti = T.inverse()
    out = T.ins((1, 2)) * M * Ti.tensor(Ti)
    return StarProduct(out.truncate(M.order), star.pi) if star else out


def _log(M: UTensor) -> UTensor:
    X = M - M.uea.unit(M.n, M.order)
    out = M.uea.zero(M.n, M.order)
    power = M.uea.unit(M.n, M.order)
    for k in range(1, M.order + 1):
        power = power * X
        out = out + power * Fraction((-1) ** (k + 1), k)
    return out


def star_normal_form(M) -> UTensor:
    """log M reduced modulo coboundaries Delta(t) - t(x)1 - 1(x)t, abelian case.

    Two abelian star products are gauge equivalent exactly when their
    normal forms agree.
    """
    M = M.M if isinstance(M, StarProduct) else M
    uea = M.uea
    _require_abelian(uea)
    L = _log(M)
    top = max((sum(len(w) for w in ms) for (_, ms) in L.terms), default=0)
    basis = [w for w in _monomials(uea.lie.dim, top) if w]
    cols = []
    for w in basis:
        t = UTensor(uea, 1, {(0, (w,)): Fraction(1)}, M.order)
        cols.append(_vector(t.ins((1, 2)) - t.tensor(uea.unit(1)) - uea.unit(1).tensor(t)))
    terms = {}
    for k in range(1, M.order + 1):
        red = linsolve.reduce_modulo(_vector(L, k), cols)
        terms.update({(k, ms): c for ms, c in red.items()})
    return UTensor(uea, 2, terms, M.order)


# -- bidifferential operators in coordinates --------------------------------

@dataclass(frozen=True)
class BiDiff:
    """sum hbar^k x^c d^alpha(f) d^beta(g) on polynomial functions of R^m."""

    m: int
    terms: Mapping  # (k, c, alpha, beta) -> Fraction
    order: int = DEFAULT_ORDER

    @classmethod
    def pointwise(cls, m: int, order: int = DEFAULT_ORDER) -> "BiDiff":
        z = (0,) * m
        return cls(m, {(0, z, z, z): Fraction(1)}, order)

    @classmethod
    def from_invariant(cls, M: UTensor, coords: Sequence[int] | None = None, m: int | None = None) -> "BiDiff":
        """Constant-coefficient operator from an abelian invariant tensor.

        Generator i differentiates in coordinate ``coords[i]``.
        """
        _require_abelian(M.uea)
        coords = list(range(M.uea.lie.dim)) if coords is None else list(coords)
        m = max(coords) + 1 if m is None else m
        z = (0,) * m
        terms: dict = {}
        for (k, (a, b)), c in M.terms.items():
            al, be = [0] * m, [0] * m
            for g in a:
                al[coords[g]] += 1
            for g in b:
                be[coords[g]] += 1
            key = (k, z, tuple(al), tuple(be))
            terms[key] = terms.get(key, 0) + c
        return cls(m, {k: v for k, v in terms.items() if v}, M.order)

    def __call__(self, f: PolyVector, g: PolyVector) -> PolyVector:
        order = min(self.order, f.order, g.order)
        out = PolyVector(self.m, {}, order)
        for (k, c, al, be), v in self.terms.items():
            df, dg = f, g
            for i, p in enumerate(al):
                for _ in range(p):
                    df = df.d_x(i)
            for i, p in enumerate(be):
                for _ in range(p):
                    dg = dg.d_x(i)
            coeff = PolyVector(self.m, {(k, c, ()): v}, order)
            out = out + coeff.wedge(df).wedge(dg)
        return out


def poisson_bracket(pi: PolyVector, f: PolyVector, g: PolyVector) -> PolyVector:
    return pi.evaluate(f, g)


def test_functions(m: int, variables: Sequence[int] | None = None, max_degree: int = 2,
                   order: int = DEFAULT_ORDER) -> list[PolyVector]:
    """All monomials of degree <= max_degree in the given coordinates."""
    variables = list(range(m)) if variables is None else list(variables)
    out = []
    for d in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(variables, d):
            e = [0] * m
            for i in combo:
                e[i] += 1
            out.append(PolyVector(m, {(0, tuple(e), ()): Fraction(1)}, order))
    return out


def momentum_residual(star: Callable, images: Mapping, mu: Mapping, pi: PolyVector,
                      brackets: Mapping | None = None, samples: Sequence[PolyVector] | None = None,
                      order: int | None = None) -> dict:
    """Strong invariance check for a quantized momentum map.

    ``star(f, g)`` is the product, ``images[x]`` the function M(x),
    ``mu[x]`` the classical function mu*x and ``pi`` the Poisson bivector.
    ``brackets[(x, y)]`` gives [x,y] in h as {z: coeff}; M must satisfy
    M(x)*M(y) - M(y)*M(x) = hbar M([x,y]).  Returns the nonzero residuals
    keyed by ("commutator", x, index of f) or ("morphism", x, y), truncated
    at ``order``.
    """
    gens = list(images)
    out: dict = {}
    if not gens:
        return out
    m = pi.m
    samples = test_functions(m) if samples is None else samples

    def cut(p):
        return p if order is None else PolyVector(p.m, {k: v for k, v in p.terms.items() if k[0] <= order}, p.order)

    for x in gens:
        for j, f in enumerate(samples):
            lhs = star(images[x], f) - star(f, images[x])
            rhs = poisson_bracket(pi, mu[x], f).hbar_shift(1)
            r = cut(lhs - rhs)
            if r:
                out[("commutator", x, j)] = r
    for x, y in itertools.combinations(gens, 2):
        lhs = star(images[x], images[y]) - star(images[y], images[x])
        rhs = PolyVector(m, {}, pi.order)
        for z, c in (brackets or {}).get((x, y), {}).items():
            rhs = rhs + images[z].scale(c)
        r = cut(lhs - rhs.hbar_shift(1))
        if r:
            out[("morphism", x, y)] = r
    return out


@dataclass(frozen=True)
class XuSplitting:
    """Local model h* x G: lambda coordinates, group coordinates, h-action on G."""

    m: int
    lam: tuple
    y: tuple
    fields: tuple  # vector field h_i on the y coordinates, one per lambda_i
    h_star: Callable | None = None  # product on h*-functions; pointwise when None

    def __post_init__(self):
        if len(self.fields) != len(self.lam):
            raise InvalidInput("one h-field per lambda coordinate expected")
        if set(self.lam) & set(self.y):
            raise InvalidInput("lambda and y coordinates overlap")


def _shift_formula(split: XuSplitting, f: PolyVector, g: PolyVector, order: int) -> PolyVector:
    """sum_k hbar^k/k! sum_{i_1..i_k} d^k f/dlambda_{i_1}..dlambda_{i_k} h_{i_1}...h_{i_k} g."""
    out = f.wedge(g)
    n = len(split.lam)
    for k in range(1, order + 1):
        acc = PolyVector(split.m, {}, order)
        for idx in itertools.product(range(n), repeat=k):
            df = f
            for i in idx:
                df = df.d_x(split.lam[i])
            if not df:
                continue
            hg = g
            for i in reversed(idx):
                hg = split.fields[i].evaluate(hg)
            acc = acc + df.wedge(hg)
        out = out + acc.hbar_shift(k).scale(Fraction(1, factorial(k)))
    return PolyVector(split.m, {key: v for key, v in out.terms.items() if key[0] <= order}, order)


def xu_conditions_check(star: BiDiff, split: XuSplitting, max_degree: int = 2) -> dict:
    """Per-condition verdicts on polynomial test functions.

    Returns {"1": {...}, "2": {...}, "3": {...}, "4": {...}} where the first
    three carry ``pass`` and the failing witnesses, and "4" carries the
    extracted G-G block R as a BiDiff restricted to y-derivatives.
    """
    order = star.order
    lam_fns = test_functions(split.m, split.lam, max_degree, order)
    y_fns = test_functions(split.m, split.y, max_degree, order)
    h_star = split.h_star or (lambda f, g: f.wedge(g))
    report: dict = {}

    fails = [(i, j, star(f, g) - h_star(f, g)) for i, f in enumerate(lam_fns) for j, g in enumerate(lam_fns)]
    report["1"] = _verdict(fails)
    fails = [(i, j, star(g, f) - g.wedge(f)) for i, f in enumerate(lam_fns) for j, g in enumerate(y_fns)]
    report["2"] = _verdict(fails)
    fails = [(i, j, star(f, g) - _shift_formula(split, f, g, order))
             for i, f in enumerate(lam_fns) for j, g in enumerate(y_fns)]
    report["3"] = _verdict(fails)
    lam = set(split.lam)
    R = {key: v for key, v in star.terms.items()
         if not any(key[2][i] or key[3][i] or key[1][i] for i in lam)}
    report["4"] = {"pass": bool(R), "R": BiDiff(star.m, R, order)}
    return report


def _verdict(items) -> dict:
    bad = [(i, j, r) for i, j, r in items if r]
    return {"pass": not bad, "witnesses": bad[:5]}
