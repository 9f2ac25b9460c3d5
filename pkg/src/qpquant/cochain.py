"""Cochains in T_+U, Gerstenhaber and Phi-deformed brackets, twists, star products.

A cochain is a :class:`Cochain`: a map arity -> element of U^{(x)n}[[hbar]].
In the invariant-operator encoding an element of U^{(x)n} acts on n
functions and the results are multiplied together, the leftmost tensor
factor acting last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping

from .graded import BlockPartition, InvalidInput
from .lie import LieAlgebra, RejectedPrecondition, schouten_algebraic
from .series import DEFAULT_ORDER, HbarSeries
from .uea import ONE, UEA, UTensor


class ArityOverflow(ArithmeticError):
    pass


class Cochain:
    """Finite sum of homogeneous components of different arities."""

    __slots__ = ("uea", "comps", "order")

    def __init__(self, uea: UEA, comps: Mapping[int, UTensor] = (), order: int = DEFAULT_ORDER):
        self.uea = uea
        self.order = order
        clean = {}
        items = comps.items() if isinstance(comps, Mapping) else comps
        for n, t in items:
            if t.n != n:
                raise InvalidInput(f"component stored at arity {n} has arity {t.n}")
            if n < 1:
                raise InvalidInput("cochains have arity >= 1")
            t = t.truncate(order)
            if t:
                clean[n] = clean[n] + t if n in clean else t
        self.comps = clean

    @classmethod
    def of(cls, *tensors: UTensor) -> "Cochain":
        order = min(t.order for t in tensors)
        c: dict = {}
        for t in tensors:
            c[t.n] = c[t.n] + t if t.n in c else t
        return cls(tensors[0].uea, c, order)

    def is_zero(self) -> bool:
        return not self.comps

    def __bool__(self):
        return bool(self.comps)

    def __getitem__(self, n: int) -> UTensor:
        return self.comps.get(n, self.uea.zero(n, self.order))

    def arities(self):
        return sorted(self.comps)

    def __add__(self, other: "Cochain") -> "Cochain":
        if not isinstance(other, Cochain) and other == 0:
            return self
        comps = dict(self.comps)
        for n, t in other.comps.items():
            comps[n] = comps[n] + t if n in comps else t
        return Cochain(self.uea, comps, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return Cochain(self.uea, {n: -t for n, t in self.comps.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "Cochain":
        return Cochain(self.uea, {n: t.scale(s) for n, t in self.comps.items()}, self.order)

    __mul__ = scale
    __rmul__ = scale

    def truncate(self, order: int) -> "Cochain":
        return Cochain(self.uea, self.comps, min(order, self.order))

    def __eq__(self, other):
        if isinstance(other, Cochain):
            return self.comps == other.comps
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.comps.items()))

    def __repr__(self):
        return " | ".join(f"[{n}] {t!r}" for n, t in sorted(self.comps.items())) or "0"


def as_cochain(x) -> Cochain:
    if isinstance(x, Cochain):
        return x
    return Cochain(x.uea, {x.n: x}, x.order)


# -- coproduct models -----------------------------------------------------

class Coproduct:
    """Undeformed cocommutative coproduct of the PBW model."""

    def insert(self, x: UTensor, partition: BlockPartition) -> UTensor:
        return x.insert(partition)


@dataclass
class TwistedCoproduct(Coproduct):
    """Delta_J(a) = J Delta_0(a) J^{-1}, iterated on the last factor."""

    J: UTensor
    _cache: dict = field(default_factory=dict, repr=False)

    def iterated_twist(self, k: int) -> tuple[UTensor, UTensor]:
        """J_k with Delta_J^{(k)} = J_k Delta_0^{(k)} J_k^{-1}, and its inverse."""
        if k not in self._cache:
            u = self.J.uea
            if k == 1:
                Jk = u.unit(1, self.J.order)
            else:
                prev, _ = self.iterated_twist(k - 1)
                blocks = [(i,) for i in range(1, k - 1)] + [(k - 1, k)]
                last = self.J.insert(BlockPartition(((k - 1,), (k,)), k))
                Jk = last * prev.insert(BlockPartition(tuple(blocks), k))
            self._cache[k] = (Jk, Jk.inverse())
        return self._cache[k]

    def insert(self, x: UTensor, partition: BlockPartition) -> UTensor:
        base = x.insert(partition)
        u = x.uea
        left = u.unit(partition.n, x.order)
        right = u.unit(partition.n, x.order)
        for block in partition.blocks:
            if len(block) < 2:
                continue
            Jk, Jk_inv = self.iterated_twist(len(block))
            p = BlockPartition(tuple((i,) for i in block), partition.n)
            left = left * Jk.insert(p)
            right = Jk_inv.insert(p) * right
        return left * base * right


UNDEFORMED = Coproduct()


# -- braces ---------------------------------------------------------------

def _place(E: UTensor, i: int, n: int) -> UTensor:
    """1^{(x)i} (x) E (x) 1^{(x)(n-i-e)}."""
    return E.insert(BlockPartition(tuple((i + 1 + s,) for s in range(E.n)), n))


def brace_term(D: UTensor, E: UTensor, i: int, coproduct: Coproduct = UNDEFORMED) -> UTensor:
    """D^{1,...,i,(i+1...i+e),...} * (1^i (x) E (x) 1^...), no sign, no reassociation."""
    d, e = D.n, E.n
    n = d + e - 1
    blocks = [(s + 1,) for s in range(i)] + [tuple(range(i + 1, i + e + 1))]
    blocks += [(s + e,) for s in range(i + 1, d)]
    return coproduct.insert(D, BlockPartition(tuple(blocks), n)) * _place(E, i, n)


def _left_comb(items):
    t = items[0]
    for x in items[1:]:
        t = (t, x)
    return t


def _size(tree) -> int:
    return 1 if isinstance(tree, int) else _size(tree[0]) + _size(tree[1])


def reassociator(tree, phi_inv: UTensor) -> UTensor:
    """Psi with m_tree = m_leftcomb o Psi, built from Phi^{-1} insertions."""
    u = phi_inv.uea

    @lru_cache(maxsize=None)
    def merge(n1: int, n2: int) -> UTensor:
        n = n1 + n2
        if n2 == 1:
            return u.unit(n, phi_inv.order)
        inner = merge(n1, n2 - 1).tensor(u.unit(1, phi_inv.order))
        blocks = (tuple(range(1, n1 + 1)), tuple(range(n1 + 1, n)), (n,))
        return inner * phi_inv.insert(BlockPartition(blocks, n))

    def norm(t) -> UTensor:
        if isinstance(t, int):
            return u.unit(1, phi_inv.order)
        a, b = t
        return merge(_size(a), _size(b)) * norm(a).tensor(norm(b))

    return norm(tree)


def brace(D: UTensor, E: UTensor, phi: UTensor | None = None, coproduct: Coproduct = UNDEFORMED,
          eps_sign: int = 1) -> UTensor:
    """{D|E}_Phi = sum_i (-1)^{(e-1)i} Phi~_i D^{..(i+1..i+e)..} E^{i+1..i+e}.

    ``phi=None`` is the undeformed brace.  ``eps_sign=-1`` swaps in the
    wrong sign (-1)^{e i}; it exists only for mutation tests.
    """
    d, e = D.n, E.n
    n = d + e - 1
    out = D.uea.zero(n, min(D.order, E.order))
    phi_inv = phi.inverse() if phi is not None else None
    for i in range(d):
        t = brace_term(D, E, i, coproduct)
        if phi_inv is not None:
            items = list(range(1, i + 1)) + [_left_comb(list(range(i + 1, i + e + 1)))]
            items += list(range(i + e + 1, n + 1))
            t = reassociator(_left_comb(items), phi_inv) * t
        exponent = (e - 1) * i if eps_sign == 1 else e * i
        s = -1 if exponent % 2 else 1
        out = out + t * s
    return out


def _bilinear(f: Callable, D, E, arity_bound=None) -> Cochain:
    D, E = as_cochain(D), as_cochain(E)
    order = min(D.order, E.order)
    out = Cochain(D.uea, {}, order)
    for d, Dt in D.comps.items():
        for e, Et in E.comps.items():
            if arity_bound is not None and d + e - 1 > arity_bound:
                raise ArityOverflow(f"result arity {d + e - 1} exceeds bound {arity_bound}")
            out = out + as_cochain(f(Dt, Et))
    return out


def _sym_sign(D: UTensor, E: UTensor) -> int:
    return -1 if ((D.n - 1) * (E.n - 1)) % 2 else 1


def gerstenhaber_bracket(D, E, arity_bound=None, coproduct: Coproduct = UNDEFORMED) -> Cochain:
    """[D,E]_G = {D|E} - (-1)^{(d-1)(e-1)} {E|D}."""
    return _bilinear(lambda a, b: brace(a, b, None, coproduct) - brace(b, a, None, coproduct) * _sym_sign(a, b),
                     D, E, arity_bound)


def multiplication(uea: UEA, order: int = DEFAULT_ORDER) -> UTensor:
    return uea.unit(2, order)


def hochschild_diff(D, arity_bound=None, coproduct: Coproduct = UNDEFORMED) -> Cochain:
    """b(D) = [1(x)1, D]_G."""
    D = as_cochain(D)
    return gerstenhaber_bracket(multiplication(D.uea, D.order), D, arity_bound, coproduct)


# -- associators and twists ------------------------------------------------

def diagonal_invariance(t: UTensor) -> list:
    """Generators x with [Delta^{(n)}(x), t] != 0."""
    u = t.uea
    rep = []
    for x in range(u.lie.dim):
        dx = u.gen(x, t.order).insert(BlockPartition((tuple(range(1, t.n + 1)),), t.n))
        r = dx * t - t * dx
        if r:
            rep.append((u.lie.names[x], r))
    return rep


@dataclass(frozen=True)
class Associator:
    """Phi = 1 + hbar^2 phi_2 + ... in U^{(x)3}, with its invariance certificate."""

    phi: UTensor
    certificate: tuple = ()

    @classmethod
    def build(cls, phi: UTensor, check_invariance: bool = True) -> "Associator":
        if phi.n != 3:
            raise InvalidInput("an associator lives in arity 3")
        one = phi.uea.unit(3, phi.order)
        if (phi - one).hbar_valuation() < 2:
            raise InvalidInput("associator must be 1 + O(hbar^2)")
        cert = ()
        if check_invariance:
            res = diagonal_invariance(phi)
            if res:
                raise RejectedPrecondition("associator is not invariant", res)
            cert = tuple(phi.uea.lie.names)
        return cls(phi, cert)

    @classmethod
    def trivial(cls, uea: UEA, order: int = DEFAULT_ORDER) -> "Associator":
        return cls(uea.unit(3, order), tuple(uea.lie.names))

    @property
    def invariant(self) -> bool:
        return bool(self.certificate) or self.phi.uea.lie.dim == 0


def lie_tensor_to_u(t, uea: UEA, order: int | None = None) -> UTensor:
    """Alternating embedding Lambda^k g -> U^{(x)k}: x1^...^xk -> sum_sigma sgn x_sigma."""
    import itertools

    from .graded import koszul_sign

    order = t.order if order is None else order
    arities = t.arities()
    if len(arities) > 1:
        raise InvalidInput("homogeneous tensor expected")
    k = arities.pop() if arities else 1
    out = uea.zero(k, order)
    for word, c in t.terms.items():
        degs = [uea.lie.degrees[g] + 1 for g in word]
        for p in itertools.permutations(range(k)):
            s = koszul_sign([i + 1 for i in p], degs)
            piece = UTensor(uea, k, {(0, tuple((word[i],) for i in p)): Fraction(s)}, order)
            out = out + piece.scale(c)
    return out


def associator_from_Z(Z, uea: UEA, order: int = DEFAULT_ORDER, check_invariance: bool = True) -> Associator:
    """Phi = 1 + hbar^2/6 Z with Z embedded alternatingly."""
    z = lie_tensor_to_u(Z, uea, order)
    return Associator.build(uea.unit(3, order) + z.hbar_shift(2) * Fraction(1, 6), check_invariance)


def pentagon_residual(phi) -> UTensor:
    """Phi^{1,2,34} Phi^{12,3,4} - Phi^{2,3,4} Phi^{1,23,4} Phi^{1,2,3}."""
    P = phi.phi if isinstance(phi, Associator) else phi
    lhs = P.ins(1, 2, (3, 4)) * P.ins((1, 2), 3, 4)
    rhs = P.ins(2, 3, 4) * P.ins(1, (2, 3), 4) * P.ins(1, 2, 3, n=4)
    return lhs - rhs


@dataclass(frozen=True)
class Twist:
    """J = 1 + O(hbar) in U^{(x)2}."""

    J: UTensor

    def __post_init__(self):
        if self.J.n != 2:
            raise InvalidInput("a twist lives in arity 2")
        one = self.J.uea.unit(2, self.J.order)
        if (self.J - one).hbar_valuation() < 1:
            raise RejectedPrecondition("twist must be 1 + O(hbar)")

    @classmethod
    def from_r(cls, r, uea: UEA, order: int = DEFAULT_ORDER, factor=Fraction(1, 2)) -> "Twist":
        """J = 1 + factor * hbar * r, r embedded alternatingly."""
        return cls(uea.unit(2, order) + lie_tensor_to_u(r, uea, order).hbar_shift(1) * factor)

    def inverse(self) -> "Twist":
        return Twist(self.J.inverse())

    def associator(self) -> UTensor:
        """Phi solving J^{1,2}J^{12,3} = J^{2,3}J^{1,23} Phi."""
        J = self.J
        return (J.ins(2, 3) * J.ins(1, (2, 3))).inverse() * J.ins(1, 2, n=3) * J.ins((1, 2), 3)


def twist_residual(J, phi) -> UTensor:
    """J^{1,2}J^{12,3} - J^{2,3}J^{1,23} Phi."""
    J = J.J if isinstance(J, Twist) else J
    P = phi.phi if isinstance(phi, Associator) else phi
    return J.ins(1, 2, n=3) * J.ins((1, 2), 3) - J.ins(2, 3) * J.ins(1, (2, 3)) * P


def twist_coproduct_residual(J, delta_h: Mapping) -> dict:
    """Generator -> J Delta_0(x) J^{-1} - Delta_h(x), nonzero entries only."""
    J = J.J if isinstance(J, Twist) else J
    Jinv = J.inverse()
    u = J.uea
    out = {}
    for x, dh in delta_h.items():
        i = u.lie.index(x) if isinstance(x, str) else x
        d0 = u.gen(i, J.order).ins((1, 2))
        r = J * d0 * Jinv - dh
        if r:
            out[u.lie.names[i]] = r
    return out


def _conjugator(F: UTensor, n: int) -> UTensor:
    """F^{12...n-1,n} ... F^{12,3} F^{1,2} in U^{(x)n}."""
    out = F.uea.unit(n, F.order)
    for k in range(2, n + 1):
        out = F.insert(BlockPartition((tuple(range(1, k)), (k,)), n)) * out
    return out


def twist_conjugate(x, F) -> Cochain:
    """phi_F(x) = F^{12..n-1,n} ... F^{1,2} x on each arity component."""
    F = F.J if isinstance(F, Twist) else F
    x = as_cochain(x)
    try:
        F.inverse()
    except ZeroDivisionError as exc:
        raise RejectedPrecondition("twist is not invertible") from exc
    return Cochain(x.uea, {n: _conjugator(F, n) * t for n, t in x.comps.items()}, x.order)


def twist_conjugate_inverse(x, F) -> Cochain:
    """Inverse of :func:`twist_conjugate`."""
    F = F.J if isinstance(F, Twist) else F
    x = as_cochain(x)
    return Cochain(x.uea, {n: _conjugator(F, n).inverse() * t for n, t in x.comps.items()}, x.order)


# -- deformed brace and bracket ---------------------------------------------

def _phi_tensor(phi):
    if isinstance(phi, Associator):
        if not phi.invariant:
            raise RejectedPrecondition("associator lacks an invariance certificate")
        return phi.phi
    if phi is None:
        return None
    raise RejectedPrecondition("Phi must be an Associator carrying an invariance certificate")


def brace_phi(D, E, phi: Associator) -> Cochain:
    P = _phi_tensor(phi)
    return _bilinear(lambda a, b: brace(a, b, P), D, E)


def bracket_phi(D, E, phi: Associator) -> Cochain:
    """[D,E]_Phi = {D|E}_Phi - (-1)^{(d-1)(e-1)} {E|D}_Phi."""
    P = _phi_tensor(phi)
    return _bilinear(lambda a, b: brace(a, b, P) - brace(b, a, P) * _sym_sign(a, b), D, E)
