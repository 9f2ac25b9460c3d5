"""Constructors for the bundled example data, and the writer for data/*.json."""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

from . import io
from .cochain import lie_tensor_to_u
from .lie import LieAlgebra, abelian, random_solvable, schouten_algebraic, sl2, wedge
from .polyvector import PolyVector
from .series import DEFAULT_ORDER
from .star import BiDiff, moyal
from .uea import UEA, UTensor

SL2_MATRICES = ([[0, 1], [0, 0]], [[0, 0], [1, 0]], [[1, 0], [0, -1]])


def sl2_r(L: LieAlgebra | None = None):
    return wedge(L or sl2(), {("e", "f"): 1})


def sl2_Z(L: LieAlgebra | None = None):
    L = L or sl2()
    r = sl2_r(L)
    return schouten_algebraic(L, r, r)


def sl2_twist(U: UEA | None = None, order: int = DEFAULT_ORDER) -> UTensor:
    """J = 1 + hbar r/2 + hbar^2 (r^2/8 + j2) with r = e(x)f - f(x)e.

    The hbar^2 correction j2 makes the associator of J invariant to second
    order, which first-order twists 1 + hbar r/2 do not achieve.
    """
    U = U or UEA(sl2())
    e, f, h = (U.lie.index(x) for x in "efh")
    rT = lie_tensor_to_u(sl2_r(U.lie), U, order).hbar_shift(1)
    j2 = {((e, f), (h,)): Fraction(1, 24), ((e, h), (f,)): Fraction(1, 12),
          ((f,), (e, h)): Fraction(1, 12), ((h,), (e, f)): Fraction(1, 24)}
    J = U.unit(2, order) + rT * Fraction(1, 2) + rT * rT * Fraction(1, 8)
    return J + UTensor(U, 2, {(2, k): c for k, c in j2.items()}, order)


def abelian_pi(L: LieAlgebra):
    return wedge(L, {(0, 1): 1})


def moyal_example(order: int = DEFAULT_ORDER):
    L = abelian(2)
    U = UEA(L)
    pi = abelian_pi(L)
    return L, pi, moyal(U, lie_tensor_to_u(pi, U, order), order)


def moyal_bidiff(order: int = DEFAULT_ORDER) -> BiDiff:
    _, _, star = moyal_example(order)
    return BiDiff.from_invariant(star.M)


def constant_bivector(m: int = 2, order: int = DEFAULT_ORDER, hbar: int = 0) -> PolyVector:
    """hbar^k d_1 ^ d_2 on R^m."""
    return PolyVector(m, {(hbar, (0,) * m, (0, 1)): Fraction(1)}, order)


def xu_bidiff(order: int = DEFAULT_ORDER) -> BiDiff:
    """exp(hbar d_lambda (x) d_y) on R^2 with lambda = x1, y = x2."""
    from math import factorial

    terms = {(k, (0, 0), (k, 0), (0, k)): Fraction(1, factorial(k)) for k in range(order + 1)}
    return BiDiff(2, terms, order)


def _jsonable_matrix(M):
    return [[io.dump_coeff(Fraction(x)) for x in row] for row in M]


def documents(order: int = DEFAULT_ORDER) -> dict:
    """name -> JSON document for every bundled example."""
    from .linfty import from_dgla, identity_morphism, random_dgla, random_homotopy

    v = {"schema_version": io.SCHEMA_VERSION}
    S2 = sl2()
    U2 = UEA(S2)
    A2 = abelian(2)
    docs = {}
    docs["sl2"] = {**v, "lie_algebra": io.dump_lie(S2)}
    docs["abelian2"] = {**v, "lie_algebra": io.dump_lie(A2)}
    docs["solvable4"] = {**v, "lie_algebra": io.dump_lie(random_solvable(4, random.Random(4)))}
    r, Z = sl2_r(S2), sl2_Z(S2)
    docs["quasi_poisson_sl2"] = {**v, "lie_algebra": io.dump_lie(S2), "r": io.dump_lie_tensor(r, S2),
                                 "Z": io.dump_lie_tensor(Z, S2),
                                 "matrix_model": [_jsonable_matrix(M) for M in SL2_MATRICES]}
    docs["associator_sl2"] = {**v, "lie_algebra": io.dump_lie(S2), "Z": io.dump_lie_tensor(Z, S2)}
    docs["twist_first_order"] = {**v, "lie_algebra": io.dump_lie(S2), "r": io.dump_lie_tensor(r, S2)}
    docs["twist_sl2"] = {**v, "lie_algebra": io.dump_lie(S2),
                         "J": io.dump_cochain({2: sl2_twist(U2, order)}), "phi_from_twist": True}
    L, pi, star = moyal_example(order)
    docs["moyal"] = {**v, "lie_algebra": io.dump_lie(L), "pi": io.dump_lie_tensor(pi, L),
                     "star": io.dump_cochain({2: star.M})}
    docs["solve_moyal"] = {**v, "lie_algebra": io.dump_lie(L), "pi": io.dump_lie_tensor(pi, L),
                           "compare": io.dump_cochain({2: star.M})}
    docs["mc_abelian"] = {**v, "pi_h": io.dump_polyvector(constant_bivector(2, order, 1)),
                          "r_field": io.dump_polyvector(PolyVector(2, {}, order))}
    g = random_dgla(random.Random(0), lie=S2)
    S = from_dgla(g)
    docs["linfty_dgla"] = {**v, "structure": io.dump_structure(S)}
    V = random_homotopy(g.space, g.space, 2, random.Random(1))
    docs["linfty_deform"] = {**v, "source": io.dump_structure(S), "target": io.dump_structure(S),
                             "morphism": io.dump_morphism(identity_morphism(g.space)),
                             "V": {"arity": 2, "terms": io.dump_components({2: V}, g.space, g.space)["2"]}}
    rho = [{"word": ["e", "f"], "coeff": {"numerator": "1", "denominator": "lam"}}]
    docs["cdybe_sl2"] = {**v, "lie_algebra": io.dump_lie(S2), "base": ["h"], "coordinates": ["lam"],
                         "complement": ["e", "f"], "rho": rho, "Z": "solve"}
    rho_neg = [{"word": ["e", "f"], "coeff": {"numerator": "-1", "denominator": "lam"}}]
    docs["cdybe_sl2_negative"] = {**docs["cdybe_sl2"], "rho": rho_neg}
    x1 = PolyVector(2, {(0, (1, 0), ()): Fraction(1)}, order)
    docs["momentum_moyal"] = {**v, "star": io.dump_bidiff(moyal_bidiff(order)),
                              "pi": io.dump_polyvector(constant_bivector(2, order)),
                              "images": {"a": io.dump_polyvector(x1)}, "mu": {"a": io.dump_polyvector(x1)}}
    docs["xu_shift"] = {**v, "star": io.dump_bidiff(xu_bidiff(order)), "lambda": [0], "y": [1],
                        "fields": [io.dump_polyvector(PolyVector.partial(2, 1, order))]}
    return docs


def write_documents(directory: str | Path, order: int = DEFAULT_ORDER) -> list[Path]:
    out = []
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, doc in sorted(documents(order).items()):
        p = d / f"{name}.json"
        p.write_text(io.dumps(doc))
        out.append(p)
    return out


if __name__ == "__main__":
    for p in write_documents(Path(__file__).parent / "data"):
        print(p.name)
