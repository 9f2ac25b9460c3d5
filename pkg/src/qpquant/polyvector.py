"""Polynomial polyvector fields on R^m and the Schouten bracket.

A polyvector is handled as a polynomial in even coordinates x_i and odd
variables xi_i standing for d/dx_i.  Terms are keyed by
``(hbar exponent, exponent vector, increasing index tuple)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .graded import InvalidInput, koszul_sign
from .lie import LieAlgebra, RejectedPrecondition
from .series import DEFAULT_ORDER, HbarSeries


class DegreeOverflow(ArithmeticError):
    pass


def _acc(d: dict, key, val) -> None:
    v = d.get(key, 0) + val
    if v:
        d[key] = v
    else:
        d.pop(key, None)


def _merge_odd(a: tuple, b: tuple):
    """xi_a * xi_b as (sorted tuple, sign) or None when an index repeats."""
    if set(a) & set(b):
        return None
    word = a + b
    order = sorted(range(len(word)), key=lambda i: word[i])
    return tuple(word[i] for i in order), koszul_sign([i + 1 for i in order], [1] * len(word))


class PolyVector:
    __slots__ = ("m", "terms", "order")

    def __init__(self, m: int, terms: Mapping = (), order: int = DEFAULT_ORDER):
        self.m = m
        self.order = order
        clean: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, c in items:
            k, exps, idx = key
            exps, idx = tuple(exps), tuple(idx)
            if len(exps) != m or any(e < 0 for e in exps):
                raise InvalidInput(f"bad exponent vector {exps} for dimension {m}")
            if any(not 0 <= i < m for i in idx):
                raise InvalidInput(f"derivative index out of range in {idx}")
            if k > order:
                continue
            merged = _merge_odd((), idx)
            if merged is None:
                continue
            idx, sign = merged
            _acc(clean, (k, exps, idx), Fraction(c) * sign)
        self.terms = clean

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_coeffs(cls, m: int, items, order: int = DEFAULT_ORDER) -> "PolyVector":
        """``items``: iterable of (exps, idx, coeff) with coeff rational or HbarSeries."""
        terms: dict = {}
        for exps, idx, c in items:
            s = HbarSeries.coerce(c, order)
            for k, v in s.items():
                pv = cls(m, {(k, exps, idx): v}, order)
                for key, val in pv.terms.items():
                    _acc(terms, key, val)
        return cls(m, terms, order)

    @classmethod
    def coordinate(cls, m: int, i: int, order: int = DEFAULT_ORDER) -> "PolyVector":
        e = [0] * m
        e[i] = 1
        return cls(m, {(0, tuple(e), ()): 1}, order)

    @classmethod
    def partial(cls, m: int, i: int, order: int = DEFAULT_ORDER) -> "PolyVector":
        return cls(m, {(0, (0,) * m, (i,)): 1}, order)

    @classmethod
    def constant(cls, m: int, c=1, order: int = DEFAULT_ORDER) -> "PolyVector":
        return cls(m, {(0, (0,) * m, ()): c}, order)

    # -- inspection -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def arities(self) -> set:
        return {len(idx) for _, _, idx in self.terms}

    def poly_degree(self) -> int:
        return max((sum(e) for _, e, _ in self.terms), default=0)

    def hbar_valuation(self) -> float:
        return min((k for k, _, _ in self.terms), default=float("inf"))

    def hbar_coefficient(self, k: int) -> "PolyVector":
        return PolyVector(self.m, {(0, e, i): c for (j, e, i), c in self.terms.items() if j == k}, self.order)

    def arity_part(self, a: int) -> "PolyVector":
        return PolyVector(self.m, {key: c for key, c in self.terms.items() if len(key[2]) == a}, self.order)

    # -- algebra ----------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, PolyVector) or other.m != self.m:
            raise InvalidInput("polyvectors on different ambient dimensions")

    def __add__(self, other):
        if not isinstance(other, PolyVector) and other == 0:
            return self
        self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            _acc(out, key, c)
        return PolyVector(self.m, out, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "PolyVector":
        if isinstance(s, HbarSeries):
            out: dict = {}
            order = min(self.order, s.order)
            for (k, e, i), c in self.terms.items():
                for j, a in s.items():
                    if k + j <= order:
                        _acc(out, (k + j, e, i), c * a)
            return PolyVector(self.m, out, order)
        s = Fraction(s)
        return PolyVector(self.m, {key: c * s for key, c in self.terms.items()}, self.order)

    __mul__ = scale
    __rmul__ = scale

    def hbar_shift(self, p: int = 1) -> "PolyVector":
        return PolyVector(self.m, {(k + p, e, i): c for (k, e, i), c in self.terms.items()}, self.order)

    def wedge(self, other: "PolyVector") -> "PolyVector":
        """Graded-commutative product of superfunctions."""
        self._check(other)
        order = min(self.order, other.order)
        out: dict = {}
        for (ka, ea, ia), ca in self.terms.items():
            for (kb, eb, ib), cb in other.terms.items():
                if ka + kb > order:
                    continue
                merged = _merge_odd(ia, ib)
                if merged is None:
                    continue
                idx, sign = merged
                exps = tuple(x + y for x, y in zip(ea, eb))
                _acc(out, (ka + kb, exps, idx), ca * cb * sign)
        return PolyVector(self.m, out, order)

    def d_x(self, i: int) -> "PolyVector":
        out: dict = {}
        for (k, e, idx), c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                _acc(out, (k, tuple(e2), idx), c * e[i])
        return PolyVector(self.m, out, self.order)

    def d_xi_right(self, i: int) -> "PolyVector":
        """Right derivative in the odd variable xi_i."""
        out: dict = {}
        for (k, e, idx), c in self.terms.items():
            if i in idx:
                t = idx.index(i)
                sign = -1 if (len(idx) - 1 - t) % 2 else 1
                _acc(out, (k, e, idx[:t] + idx[t + 1:]), c * sign)
        return PolyVector(self.m, out, self.order)

    def __eq__(self, other):
        if isinstance(other, PolyVector):
            return self.m == other.m and self.terms == other.terms
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((self.m, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (k, e, idx), c in sorted(self.terms.items()):
            mono = "*".join(f"x{j + 1}^{p}" if p > 1 else f"x{j + 1}" for j, p in enumerate(e) if p)
            der = "^".join(f"d{j + 1}" for j in idx)
            h = f"h^{k}*" if k else ""
            parts.append(f"{c}*{h}{mono or '1'}{'*' + der if der else ''}")
        return " + ".join(parts)

    # -- evaluation on functions ------------------------------------------
    def evaluate(self, *fs: "PolyVector") -> "PolyVector":
        """Contract a homogeneous k-vector with df_1, ..., df_k (determinant convention)."""
        out = PolyVector(self.m, {}, self.order)
        for (k, e, idx), c in self.terms.items():
            if len(idx) != len(fs):
                continue
            coeff = PolyVector(self.m, {(k, e, ()): c}, self.order)
            for perm_pos, perm in _perms(len(idx)):
                term = coeff
                for a, f in zip(perm, fs):
                    term = term.wedge(f.d_x(idx[a]))
                out = out + term.scale(perm_pos)
        return out


def _perms(k: int):
    import itertools

    for p in itertools.permutations(range(k)):
        yield koszul_sign([i + 1 for i in p], [1] * k), p


def schouten_bracket(P: PolyVector, Q: PolyVector, degree_cap: int | None = None) -> PolyVector:
    """Schouten-Nijenhuis bracket, equal to the commutator on vector fields.

    [P, Q] = sum_i (P d/dxi_i)(d/dx_i Q) - (-1)^{(p-1)(q-1)} (Q d/dxi_i)(d/dx_i P)
    on homogeneous components of arities p and q.
    """
    P._check(Q)
    out = PolyVector(P.m, {}, min(P.order, Q.order))
    for p in P.arities():
        Pp = P.arity_part(p)
        for q in Q.arities():
            Qq = Q.arity_part(q)
            sign = -1 if ((p - 1) * (q - 1)) % 2 else 1
            for i in range(P.m):
                out = out + Pp.d_xi_right(i).wedge(Qq.d_x(i))
                out = out - Qq.d_xi_right(i).wedge(Pp.d_x(i)).scale(sign)
    if degree_cap is not None and out.poly_degree() > degree_cap:
        raise DegreeOverflow(f"bracket has polynomial degree {out.poly_degree()} > cap {degree_cap}")
    return out


@dataclass(frozen=True)
class ActionMap:
    """Generator index -> polynomial vector field on R^m."""

    lie: LieAlgebra
    m: int
    fields: tuple

    def __post_init__(self):
        if len(self.fields) != self.lie.dim:
            raise InvalidInput("one vector field per generator is required")
        for v in self.fields:
            if v.m != self.m or not v.arities() <= {1}:
                raise InvalidInput("action fields must be vector fields on R^m")

    def image(self, vec: Mapping) -> PolyVector:
        out = PolyVector(self.m, {})
        for i, c in vec.items():
            out = out + self.fields[i].scale(c)
        return out

    def homomorphism_residual(self) -> list:
        """Pairs (i, j) with [gamma x_i, gamma x_j] != gamma([x_i, x_j])."""
        rep = []
        for i in range(self.lie.dim):
            for j in range(i + 1, self.lie.dim):
                r = schouten_bracket(self.fields[i], self.fields[j]) - self.image(self.lie.bracket_gen(i, j))
                if r:
                    rep.append(((i, j), r))
        return rep


def trivial_action(lie: LieAlgebra, m: int) -> ActionMap:
    return ActionMap(lie, m, tuple(PolyVector(m, {}) for _ in range(lie.dim)))


def linear_action(lie: LieAlgebra, matrices: Sequence, sign: int = -1) -> ActionMap:
    """Vector fields v -> sign * A_x v for square matrices A_x.

    With ``sign=-1`` a representation x -> A_x gives a homomorphism.
    """
    m = len(matrices[0])
    fields = []
    for A in matrices:
        items = []
        for i in range(m):
            for j in range(m):
                if A[i][j]:
                    e = [0] * m
                    e[j] = 1
                    items.append((tuple(e), (i,), sign * Fraction(A[i][j])))
        fields.append(PolyVector.from_coeffs(m, items))
    return ActionMap(lie, m, tuple(fields))


def gamma_push(t, act: ActionMap, check: bool = True) -> PolyVector:
    """Wedge of the image vector fields of a Lambda(g) tensor."""
    if check:
        res = act.homomorphism_residual()
        if res:
            raise RejectedPrecondition("action map is not a Lie algebra homomorphism", res)
    order = t.order
    out = PolyVector(act.m, {}, order)
    for word, c in t.terms.items():
        piece = PolyVector.constant(act.m, 1, order)
        for g in word:
            piece = piece.wedge(act.fields[g])
        out = out + piece.scale(c)
    return out


def invariance_residual(P: PolyVector, act: ActionMap) -> list:
    """Generators x with [gamma(x), P]_S != 0, with the bracket as witness."""
    rep = []
    for x, v in enumerate(act.fields):
        r = schouten_bracket(v, P)
        if r:
            rep.append((act.lie.names[x], r))
    return rep


def quasi_poisson_residual(pi: PolyVector, Z, act: ActionMap, require_invariant: bool = True,
                           require_homomorphism: bool = True) -> PolyVector:
    """[pi, pi]_S - gamma^{(x)3}(Z); zero iff (R^m, pi) is quasi-Poisson for (g, Z)."""
    if require_invariant:
        res = invariance_residual(pi, act)
        if res:
            raise RejectedPrecondition("bivector is not invariant under the action", res)
    return schouten_bracket(pi, pi) - gamma_push(Z, act, check=require_homomorphism)


def matrix_model(lie: LieAlgebra, matrices: Sequence) -> tuple:
    """Left and right multiplication on n x n matrices, coordinates g[a][b] -> n*a + b.

    Returns (left, right): ``left`` carries the fundamental fields g -> x g of
    the left action, an anti-homomorphism; ``right`` carries g -> g x, a
    homomorphism.  The two actions commute and are free on invertible matrices.
    """
    n = len(matrices[0])
    m = n * n

    def fields(x, left: bool):
        items = []
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    # (x g)[a][b] = sum_c x[a][c] g[c][b];  (g x)[a][b] = sum_c g[a][c] x[c][b]
                    coeff, src = (x[a][c], n * c + b) if left else (x[c][b], n * a + c)
                    if coeff:
                        e = [0] * m
                        e[src] = 1
                        items.append((tuple(e), (n * a + b,), Fraction(coeff)))
        return PolyVector.from_coeffs(m, items)

    left = ActionMap(lie, m, tuple(fields(x, True) for x in matrices))
    right = ActionMap(lie, m, tuple(fields(x, False) for x in matrices))
    return left, right


def mc_residual(pi_h: PolyVector, r_field: PolyVector) -> PolyVector:
    """[r, pi_h]_S + 1/2 [pi_h, pi_h]_S at the working hbar order."""
    if pi_h.hbar_valuation() < 1:
        raise RejectedPrecondition("Maurer-Cartan candidate must have hbar-valuation >= 1")
    return schouten_bracket(r_field, pi_h) + schouten_bracket(pi_h, pi_h).scale(Fraction(1, 2))
