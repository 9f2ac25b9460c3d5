"""Command line entry point: run named checks on JSON descriptors.

Exit codes: 0 all verdicts pass, 1 some verdict fails, 2 parse error,
3 rejected precondition, 4 internal bound overflow.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable

from . import io
from .brace import BoundOverflow, bialgebra_axiom_suite
from .cdybe import DynamicalRMatrix, Unsupported, cdybe_residual, h_equivariance_residual, solve_constant_Z
from .cochain import (ArityOverflow, Associator, Twist, associator_from_Z, diagonal_invariance,
                      lie_tensor_to_u, pentagon_residual, twist_residual)
from .graded import InvalidInput
from .lie import RejectedPrecondition, adjoint_invariance, check_jacobi, schouten_algebraic
from .polyvector import (DegreeOverflow, gamma_push, matrix_model, mc_residual, quasi_poisson_residual,
                         schouten_bracket)
from .star import (Obstruction, StarProduct, XuSplitting, momentum_residual, phi_assoc_residual,
                   solve_star_order, star_normal_form, swap, xu_conditions_check)
from .uea import UEA, FiltrationOverflow

EXIT_PASS, EXIT_FAIL, EXIT_PARSE, EXIT_REJECTED, EXIT_OVERFLOW = 0, 1, 2, 3, 4


@dataclass
class Bounds:
    hbar: int = 3
    arity: int = 4
    filtration: int = 3
    outer: int = 2
    trials: int = 100
    seed: int = 0


@dataclass
class Report:
    checks: list = field(default_factory=list)
    result: dict = field(default_factory=dict)

    def add(self, name: str, ok: bool, witness=None) -> None:
        self.checks.append({"name": name, "verdict": "pass" if ok else "fail",
                            "witness": None if ok else witness})

    @property
    def passed(self) -> bool:
        return all(c["verdict"] == "pass" for c in self.checks)


def _vec(v, names) -> list:
    return [{"index": names[k], "coeff": io.dump_coeff(c)} for k, c in sorted(v.items())]


def _need_arity(b: Bounds, n: int, what: str) -> None:
    if n > b.arity:
        raise ArityOverflow(f"{what} works in arity {n}, above --bounds.arity={b.arity}")


# -- commands ----------------------------------------------------------------

def cmd_check_jacobi(doc, b: Bounds, rep: Report):
    L = io.parse_lie(doc.get("lie_algebra"))
    bad = check_jacobi(L)
    rep.add("jacobi", not bad, [{"generators": [L.names[g] for g in w], "jacobiator": _vec(r, L.names)}
                                for w, r in bad])


def cmd_check_invariance(doc, b: Bounds, rep: Report):
    L = io.parse_lie(doc.get("lie_algebra"))
    key = "tensor" if "tensor" in doc else "Z" if "Z" in doc else None
    if key:
        t = io.parse_lie_tensor(doc[key], L, b.hbar, key)
        bad = adjoint_invariance(L, t)
        rep.add("adjoint_invariance", not bad, [{"generator": x, "residual": io.dump_lie_tensor(r, L)} for x, r in bad])
    if "u_tensor" in doc:
        U = UEA(L)
        comps = io.parse_cochain(doc["u_tensor"], U, b.hbar, "u_tensor")
        for n, t in sorted(comps.items()):
            bad = diagonal_invariance(t)
            rep.add(f"diagonal_invariance[{n}]", not bad,
                    [{"generator": x, "residual": io.dump_cochain({n: r})} for x, r in bad])
    if not rep.checks:
        raise io.ParseError("document", "needs 'tensor', 'Z' or 'u_tensor'")


def cmd_check_quasi_poisson(doc, b: Bounds, rep: Report):
    L = io.parse_lie(doc.get("lie_algebra"))
    r = io.parse_lie_tensor(doc["r"], L, b.hbar, "r")
    Z = io.parse_lie_tensor(doc["Z"], L, b.hbar, "Z") if doc.get("Z") else schouten_algebraic(L, r, r)
    model = doc.get("matrix_model")
    if model is None:
        raise io.ParseError("matrix_model", "a list of matrices, one per generator, is required")
    mats = [[[io.parse_coeff(x, "matrix_model") for x in row] for row in M] for M in model]
    left, right = matrix_model(L, mats)
    pi = gamma_push(r, right)
    res = quasi_poisson_residual(pi, Z, left, require_homomorphism=False)
    rep.add("quasi_poisson", res.is_zero(), io.dump_polyvector(res))
    cross = schouten_bracket(pi, pi) - gamma_push(schouten_algebraic(L, r, r), right)
    rep.add("push_of_bracket", cross.is_zero(), io.dump_polyvector(cross))
    rep.result["pi"] = io.dump_polyvector(pi)


def cmd_check_mc(doc, b: Bounds, rep: Report):
    pi = io.parse_polyvector(doc["pi_h"], b.hbar, "pi_h")
    r = io.parse_polyvector(doc.get("r_field", {"dimension": pi.m}), b.hbar, "r_field")
    res = mc_residual(pi, r)
    rep.add("maurer_cartan", res.is_zero(), io.dump_polyvector(res))


def _associator(doc, L, U, b: Bounds, required: bool = False) -> Associator | None:
    if "phi" in doc:
        return Associator.build(io.parse_single(doc["phi"], U, 3, b.hbar, "phi"))
    if "Z" in doc:
        return associator_from_Z(io.parse_lie_tensor(doc["Z"], L, b.hbar, "Z"), U, b.hbar)
    if required:
        raise io.ParseError("document", "needs 'phi' or 'Z'")
    return None


def cmd_check_pentagon(doc, b: Bounds, rep: Report):
    L = io.parse_lie(doc.get("lie_algebra"))
    U = UEA(L)
    _need_arity(b, 4, "the pentagon identity")
    phi = _associator(doc, L, U, b, required=True)
    res = pentagon_residual(phi)
    rep.add("pentagon", res.is_zero(), io.dump_cochain({4: res}))
    rep.add("invariance", phi.invariant, None)


def cmd_check_twist(doc, b: Bounds, rep: Report):
    _need_arity(b, 3, "the twist equation")
    L = io.parse_lie(doc.get("lie_algebra"))
    U = UEA(L)
    if "J" in doc:
        J = Twist(io.parse_single(doc["J"], U, 2, b.hbar, "J"))
    elif "r" in doc:
        J = Twist.from_r(io.parse_lie_tensor(doc["r"], L, b.hbar, "r"), U, b.hbar)
    else:
        raise io.ParseError("document", "needs 'J' or 'r'")
    phi = _associator(doc, L, U, b)
    if phi is None and doc.get("phi_from_twist"):
        P = J.associator()
        bad = diagonal_invariance(P)
        rep.add("derived_associator_invariance", not bad,
                [{"generator": x, "residual": io.dump_cochain({3: r})} for x, r in bad])
        phi = P
    P = phi if phi is not None else U.unit(3, b.hbar)
    res = twist_residual(J, P)
    rep.add("twist_equation", res.is_zero(), io.dump_cochain({3: res}))


def _star_inputs(doc, b: Bounds):
    L = io.parse_lie(doc.get("lie_algebra"))
    U = UEA(L)
    pi_t = io.parse_lie_tensor(doc["pi"], L, b.hbar, "pi")
    return L, U, pi_t


def cmd_verify_star(doc, b: Bounds, rep: Report):
    _need_arity(b, 3, "Phi-associativity")
    L, U, pi_t = _star_inputs(doc, b)
    M = io.parse_single(doc["star"], U, 2, b.hbar, "star")
    pi = lie_tensor_to_u(pi_t, U, b.hbar)
    star = StarProduct(M)
    skew = star.m(1) - swap(star.m(1)) - pi.hbar_coefficient(0)
    rep.add("commutator_condition", skew.is_zero(), io.dump_cochain({2: skew}))
    phi = _associator(doc, L, U, b)
    res = phi_assoc_residual(star, phi)
    rep.add("phi_associativity", res.is_zero(), io.dump_cochain({3: res}))


def cmd_solve_star(doc, b: Bounds, rep: Report):
    _need_arity(b, 3, "Phi-associativity")
    L, U, pi_t = _star_inputs(doc, b)
    phi = _associator(doc, L, U, b)
    Z = io.parse_lie_tensor(doc["Z"], L, b.hbar, "Z") if "Z" in doc else None
    try:
        star = solve_star_order(pi_t, phi, b.hbar, U, Z=Z)
    except Obstruction as e:
        rep.add("solvable", False, {"order": e.order, "obstruction": io.dump_cochain({3: e.cochain})})
        return
    res = phi_assoc_residual(star, phi)
    rep.add("phi_associativity", res.is_zero(), io.dump_cochain({3: res}))
    rep.result["star"] = io.dump_cochain({2: star.M})
    if "compare" in doc:
        other = io.parse_single(doc["compare"], U, 2, b.hbar, "compare")
        a, c = star_normal_form(star.M), star_normal_form(other)
        rep.add("gauge_equivalent", a == c, io.dump_cochain({2: a - c}))


def _brace_witness(x) -> list | None:
    if x is None:
        return None
    names = x.model.uea.lie.names
    return [{"word": [[[names[g] for g in m] for m in letter] for letter in w], "hbar": k, "nu": v,
             "coeff": io.dump_coeff(c)} for (w, k, v), c in sorted(x.terms.items())]


def cmd_brace_axioms(doc, b: Bounds, rep: Report):
    L = io.parse_lie(doc.get("lie_algebra"))
    eps = -1 if doc.get("mutate_sign") else 1
    res = bialgebra_axiom_suite(UEA(L), trials=b.trials, seed=b.seed, max_len=b.outer,
                                max_arity=min(b.arity, 2) if b.arity else 2, filtration=b.filtration,
                                eps_sign=eps, order=b.hbar)
    for name in sorted(res):
        r = res[name]
        rep.add(name, r["pass"], {"failures": r["failures"], "element": _brace_witness(r["witness"])})


def cmd_linfty_check(doc, b: Bounds, rep: Report):
    from .linfty import check_morphism, check_structure

    K = min(b.arity, 3) if b.arity else 3
    if "structure" in doc:
        S = io.parse_structure(doc["structure"], "structure")
        bad = check_structure(S, K)
        rep.add("structure", not bad, _linfty_witness(bad, S.space, S.space))
    if "morphism" in doc:
        S1 = io.parse_structure(doc["source"], "source")
        S2 = io.parse_structure(doc["target"], "target")
        phi = io.parse_morphism(doc["morphism"], S1.space, S2.space)
        bad = check_morphism(phi, S1, S2, K)
        rep.add("morphism", not bad, _linfty_witness(bad, S1.space, S2.space))
    if not rep.checks:
        raise io.ParseError("document", "needs 'structure' or 'morphism'")


def _linfty_witness(report, src, tgt) -> list:
    return [{"word": [src.names[g] for g in w], "residual": _vec(r, tgt.names)} for w, r in sorted(report.items())]


def cmd_linfty_deform(doc, b: Bounds, rep: Report):
    from .linfty import check_morphism, deform_morphism

    K = min(b.arity, 3) if b.arity else 3
    S1 = io.parse_structure(doc["source"], "source")
    S2 = io.parse_structure(doc["target"], "target")
    phi = io.parse_morphism(doc["morphism"], S1.space, S2.space)
    bad = check_morphism(phi, S1, S2, K)
    if bad:
        raise RejectedPrecondition("input morphism fails the morphism equation", _linfty_witness(bad, S1.space, S2.space))
    Vdoc = doc["V"]
    m = Vdoc.get("arity")
    if not isinstance(m, int) or m < 1:
        raise io.ParseError("V.arity", "positive integer required")
    V = io.parse_components({str(m): Vdoc.get("terms", [])}, S1.space, S2.space, "V")[m]
    out = deform_morphism(phi, V, m, S1, S2, K)
    bad = check_morphism(out, S1, S2, K)
    rep.add("deformed_morphism", not bad, _linfty_witness(bad, S1.space, S2.space))
    same = all(out.component(k) == phi.component(k) for k in range(1, m))
    rep.add("lower_arities_unchanged", same, None)
    rep.result["morphism"] = io.dump_morphism(out)


def cmd_cdybe_check(doc, b: Bounds, rep: Report):
    L = io.parse_lie(doc.get("lie_algebra"))
    coords = {}
    for n, t in enumerate(doc.get("rho", [])):
        w = tuple(io._gen(L, g, f"rho[{n}].word") for g in t.get("word", []))
        coords[w] = t.get("coeff")
    try:
        rho = DynamicalRMatrix.build(L, doc.get("base", []), coords, doc.get("coordinates"),
                                     doc.get("complement"))
    except (TypeError, ValueError, SyntaxError) as e:
        if isinstance(e, (InvalidInput, RejectedPrecondition)):
            raise
        raise io.ParseError("rho", str(e)) from None
    eq = h_equivariance_residual(rho)
    rep.add("h_equivariance", not eq, {h: r.to_json(L) for h, r in sorted(eq.items())})
    Zdoc = doc.get("Z", "solve")
    if Zdoc == "solve":
        Z = solve_constant_Z(rho)
        rep.add("constant_Z_exists", Z is not None,
                {"residual_without_Z": cdybe_residual(rho, None).to_json(L)})
        if Z is None:
            return
        rep.result["Z"] = Z.to_json(L)
    else:
        Z = io.parse_lie_tensor(Zdoc, L, b.hbar, "Z")
    res = cdybe_residual(rho, Z)
    rep.add("cdybe", res.is_zero(), res.to_json(L))


def _polys(doc, key, order):
    return {x: io.parse_polyvector(p, order, f"{key}.{x}") for x, p in sorted(doc.get(key, {}).items())}


def cmd_momentum_check(doc, b: Bounds, rep: Report):
    star = io.parse_bidiff(doc["star"], b.hbar, "star")
    pi = io.parse_polyvector(doc["pi"], b.hbar, "pi")
    images, mu = _polys(doc, "images", b.hbar), _polys(doc, "mu", b.hbar)
    if set(images) != set(mu):
        raise io.ParseError("mu", "needs one classical function per image")
    brackets = {}
    for n, t in enumerate(doc.get("brackets", [])):
        brackets[(t["x"], t["y"])] = {z["k"]: io.parse_coeff(z["coeff"], f"brackets[{n}]") for z in t.get("terms", [])}
    res = momentum_residual(star, images, mu, pi, brackets, order=b.hbar)
    rep.add("strong_invariance", not res,
            [{"key": [str(k) for k in key], "residual": io.dump_polyvector(r)} for key, r in sorted(res.items(), key=str)])


def cmd_xu_check(doc, b: Bounds, rep: Report):
    star = io.parse_bidiff(doc["star"], b.hbar, "star")
    fields = tuple(io.parse_polyvector(f, b.hbar, f"fields[{n}]") for n, f in enumerate(doc.get("fields", [])))
    split = XuSplitting(star.m, tuple(doc.get("lambda", [])), tuple(doc.get("y", [])), fields)
    res = xu_conditions_check(star, split, max_degree=doc.get("max_degree", 2))
    for c in ("1", "2", "3"):
        r = res[c]
        rep.add(f"condition_{c}", r["pass"],
                [{"f": i, "g": j, "residual": io.dump_polyvector(w)} for i, j, w in r["witnesses"]])
    rep.add("condition_4", res["4"]["pass"], None)
    rep.result["R"] = io.dump_bidiff(res["4"]["R"])


COMMANDS: dict[str, Callable] = {
    "check-jacobi": cmd_check_jacobi,
    "check-invariance": cmd_check_invariance,
    "check-quasi-poisson": cmd_check_quasi_poisson,
    "check-mc": cmd_check_mc,
    "check-pentagon": cmd_check_pentagon,
    "check-twist": cmd_check_twist,
    "verify-star": cmd_verify_star,
    "solve-star": cmd_solve_star,
    "brace-axioms": cmd_brace_axioms,
    "linfty-check": cmd_linfty_check,
    "linfty-deform": cmd_linfty_deform,
    "cdybe-check": cmd_cdybe_check,
    "momentum-check": cmd_momentum_check,
    "xu-check": cmd_xu_check,
}


def resolve_input(path: str) -> Path:
    """``builtin:NAME`` names a bundled example; anything else is a file path."""
    if path.startswith("builtin:"):
        p = resources.files("qpquant") / "data" / f"{path[len('builtin:'):]}.json"
        return Path(str(p))
    return Path(path)


def bundled_examples() -> list[str]:
    d = resources.files("qpquant") / "data"
    return sorted(p.name[:-5] for p in d.iterdir() if p.name.endswith(".json"))


def _witness_of(err) -> object:
    r = getattr(err, "residual", None)
    if r is None:
        return None
    if isinstance(r, dict) and all(isinstance(k, str) for k in r):
        return r
    if isinstance(r, list):
        return [str(x) for x in r] if not all(isinstance(x, dict) for x in r) else r
    return str(r)


def run(command: str, inputs: list[str], bounds: Bounds) -> tuple[dict, int]:
    """Execute one command; returns (machine report, exit code)."""
    start = time.perf_counter()
    report = {
        "schema_version": io.SCHEMA_VERSION,
        "command": command,
        "config": {"inputs": inputs, "bounds": vars(bounds).copy()},
    }
    rep = Report()
    code = EXIT_PASS
    try:
        if command not in COMMANDS:
            raise io.ParseError("command", f"unknown command {command!r}")
        if len(inputs) != 1:
            raise io.ParseError("--input", "exactly one input document is expected")
        doc = io.load_document(resolve_input(inputs[0]))
        COMMANDS[command](doc, bounds, rep)
        code = EXIT_PASS if rep.passed else EXIT_FAIL
        status = "pass" if rep.passed else "fail"
    except io.ParseError as e:
        code, status = EXIT_PARSE, "parse-error"
        report["error"] = {"location": e.where, "message": str(e)}
    except (RejectedPrecondition, Unsupported) as e:
        code, status = EXIT_REJECTED, "rejected-precondition"
        report["error"] = {"message": str(e), "residual": _witness_of(e)}
    except (BoundOverflow, ArityOverflow, FiltrationOverflow, DegreeOverflow) as e:
        code, status = EXIT_OVERFLOW, "bound-overflow"
        report["error"] = {"message": str(e)}
    except InvalidInput as e:
        code, status = EXIT_PARSE, "parse-error"
        report["error"] = {"location": "input", "message": str(e)}
    except KeyError as e:
        code, status = EXIT_PARSE, "parse-error"
        report["error"] = {"location": str(e.args[0]), "message": f"missing field {e.args[0]!r}"}
    report["status"] = status
    report["checks"] = sorted(rep.checks, key=lambda c: c["name"])
    report["result"] = rep.result
    report["timing"] = {"seconds": round(time.perf_counter() - start, 3)}
    return report, code


def render_text(report: dict) -> str:
    lines = [f"{report['command']}: {report['status']}"]
    for c in report["checks"]:
        lines.append(f"  {c['name']}: {c['verdict']}")
    if "error" in report:
        err = report["error"]
        loc = f" at {err['location']}" if err.get("location") else ""
        lines.append(f"  error{loc}: {err['message']}")
    lines.append(f"  time: {report['timing']['seconds']}s")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpquant", description="Exact checks for quasi-Poisson quantization data.")
    p.add_argument("command", choices=sorted(COMMANDS) + ["list-examples"])
    p.add_argument("--input", action="append", default=[], help="JSON document, or builtin:NAME")
    p.add_argument("--bounds.hbar", dest="hbar", type=int, default=3, help="truncation order N (keep hbar^0..hbar^N)")
    p.add_argument("--bounds.arity", dest="arity", type=int, default=4)
    p.add_argument("--bounds.filtration", dest="filtration", type=int, default=3)
    p.add_argument("--bounds.outer", dest="outer", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "json"], default="text")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-examples":
        sys.stdout.write("\n".join(bundled_examples()) + "\n")
        return EXIT_PASS
    for name in ("hbar", "arity", "filtration", "outer", "trials"):
        if getattr(args, name) < 1 and not (name == "hbar" and args.hbar == 0):
            sys.stderr.write(f"--{name} must be positive\n")
            return EXIT_PARSE
    bounds = Bounds(args.hbar, args.arity, args.filtration, args.outer, args.trials, args.seed)
    report, code = run(args.command, args.input, bounds)
    sys.stdout.write(io.dumps(report) if args.format == "json" else render_text(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
