import json
import random
import subprocess
import sys
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qpquant import cli, examples, io
from qpquant.cdybe import DynamicalRMatrix, cdybe_residual
from qpquant.cochain import Twist, diagonal_invariance
from qpquant.lie import check_jacobi, random_solvable, sl2
from qpquant.linfty import from_dgla, random_dgla
from qpquant.polyvector import PolyVector, gamma_push, matrix_model, quasi_poisson_residual
from qpquant.uea import UEA

SL2 = sl2()


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def builtin(name):
    return json.loads(cli.resolve_input(f"builtin:{name}").read_text())


# -- serialisation -------------------------------------------------------------

@given(st.builds(Fraction, st.integers(-10**6, 10**6), st.integers(1, 10**4)))
def test_coeff_round_trip(q):
    assert io.parse_coeff(io.dump_coeff(q)) == q


@pytest.mark.parametrize("bad", [0.5, True, "1.5", "1e3", "1/0", "x", None, [1]])
def test_coeff_rejects(bad):
    with pytest.raises(io.ParseError):
        io.parse_coeff(bad)


def test_coeff_forms():
    assert io.parse_coeff(3) == 3
    assert io.parse_coeff("-2/6") == Fraction(-1, 3)
    assert io.parse_coeff({"num": 1, "den": 4}) == Fraction(1, 4)


@given(st.integers(0, 1000), st.integers(2, 5))
def test_lie_round_trip(seed, dim):
    L = random_solvable(dim, random.Random(seed))
    assert io.parse_lie(io.dump_lie(L)) == L


def test_tensor_and_cochain_round_trip():
    r = examples.sl2_r(SL2)
    assert io.parse_lie_tensor(io.dump_lie_tensor(r, SL2), SL2) == r
    U = UEA(SL2)
    J = examples.sl2_twist(U)
    back = io.parse_cochain(io.dump_cochain({2: J}), U, 3)
    assert back == {2: J}


def test_polyvector_and_bidiff_round_trip():
    left, right = matrix_model(SL2, examples.SL2_MATRICES)
    pi = gamma_push(examples.sl2_r(SL2), right)
    assert io.parse_polyvector(io.dump_polyvector(pi), pi.order) == pi
    B = examples.moyal_bidiff()
    assert io.dump_bidiff(io.parse_bidiff(io.dump_bidiff(B))) == io.dump_bidiff(B)


def test_structure_round_trip():
    S = from_dgla(random_dgla(random.Random(2)))
    assert io.dump_structure(io.parse_structure(io.dump_structure(S))) == io.dump_structure(S)


def test_bundled_files_match_generator():
    docs = examples.documents()
    assert sorted(docs) == cli.bundled_examples()
    for name, doc in docs.items():
        assert cli.resolve_input(f"builtin:{name}").read_text() == io.dumps(doc), name


# -- exit codes ----------------------------------------------------------------

def test_float_literal_is_a_parse_error(tmp_path):
    p = write(tmp_path, "f.json", '{"schema_version": 1, "lie_algebra": {"generators": '
                                  '[{"name": "x", "degree": 0}], "brackets": [{"i": 0, "j": 0, '
                                  '"terms": [{"k": 0, "coeff": 0.5}]}]}}')
    report, code = cli.run("check-jacobi", [p], cli.Bounds())
    assert code == 2 and report["status"] == "parse-error"
    assert "0.5" in report["error"]["message"]


def test_syntax_error_has_line_and_column(tmp_path):
    p = write(tmp_path, "b.json", '{"schema_version": 1,\n "lie_algebra": [}')
    report, code = cli.run("check-jacobi", [p], cli.Bounds())
    assert code == 2
    assert report["error"]["location"].endswith(":2:18")


def test_schema_version_and_missing_fields(tmp_path):
    doc = builtin("sl2")
    doc["schema_version"] = 2
    report, code = cli.run("check-jacobi", [write(tmp_path, "v.json", doc)], cli.Bounds())
    assert code == 2 and report["error"]["location"].endswith("schema_version")
    report, code = cli.run("check-mc", ["builtin:moyal"], cli.Bounds())
    assert code == 2 and report["error"]["location"] == "pi_h"
    report, code = cli.run("check-jacobi", [str(tmp_path / "missing.json")], cli.Bounds())
    assert code == 2


def test_rejected_precondition_exit_3(tmp_path):
    doc = builtin("cdybe_sl2")
    doc.update(base=["e", "f"], complement=["h"], coordinates=["a", "b"],
               rho=[{"word": ["e", "f"], "coeff": 1}])
    report, code = cli.run("cdybe-check", [write(tmp_path, "c.json", doc)], cli.Bounds())
    assert code == 3 and report["status"] == "rejected-precondition"
    assert report["error"]["residual"] == {"e": "-2"}


def test_bound_overflow_exit_4():
    report, code = cli.run("check-pentagon", ["builtin:associator_sl2"], cli.Bounds(arity=3))
    assert code == 4 and report["status"] == "bound-overflow"
    report, code = cli.run("verify-star", ["builtin:moyal"], cli.Bounds(arity=2))
    assert code == 4


@pytest.mark.parametrize("command,name,hbar,code", [
    ("check-jacobi", "sl2", 3, 0), ("check-jacobi", "solvable4", 3, 0),
    ("check-invariance", "associator_sl2", 3, 0), ("check-quasi-poisson", "quasi_poisson_sl2", 3, 0),
    ("check-mc", "mc_abelian", 3, 0), ("check-pentagon", "associator_sl2", 3, 0),
    ("check-twist", "twist_first_order", 1, 0), ("check-twist", "twist_first_order", 2, 1),
    ("check-twist", "twist_sl2", 2, 0), ("check-twist", "twist_sl2", 3, 1),
    ("verify-star", "moyal", 3, 0), ("solve-star", "solve_moyal", 3, 0),
    ("linfty-check", "linfty_dgla", 3, 0), ("linfty-deform", "linfty_deform", 3, 0),
    ("cdybe-check", "cdybe_sl2", 3, 1), ("cdybe-check", "cdybe_sl2_negative", 3, 0),
    ("momentum-check", "momentum_moyal", 3, 0), ("xu-check", "xu_shift", 3, 0),
])
def test_bundled_verdicts(command, name, hbar, code):
    report, got = cli.run(command, [f"builtin:{name}"], cli.Bounds(hbar=hbar))
    assert got == code, report["checks"]
    assert [c["name"] for c in report["checks"]] == sorted(c["name"] for c in report["checks"])
    for c in report["checks"]:
        assert (c["witness"] is None) == (c["verdict"] == "pass")


def test_brace_axioms_and_mutation(tmp_path):
    report, code = cli.run("brace-axioms", ["builtin:sl2"], cli.Bounds(trials=5, seed=1))
    assert code == 0
    doc = builtin("sl2")
    doc["mutate_sign"] = True
    report, code = cli.run("brace-axioms", [write(tmp_path, "m.json", doc)], cli.Bounds(trials=5, seed=1))
    assert code == 1
    failed = {c["name"] for c in report["checks"] if c["verdict"] == "fail"}
    assert "associativity" in failed


# -- witnesses -----------------------------------------------------------------

def test_jacobi_witness_round_trip(tmp_path):
    doc = builtin("sl2")
    doc["lie_algebra"]["brackets"].append({"i": 0, "j": 2, "terms": [{"k": 2, "coeff": 1}]})
    p = write(tmp_path, "j.json", doc)
    report, code = cli.run("check-jacobi", [p], cli.Bounds())
    assert code == 1
    L = io.parse_lie(io.load_document(p)["lie_algebra"])
    recomputed = {tuple(L.names[g] for g in w): v for w, v in check_jacobi(L)}
    for item in report["checks"][0]["witness"]:
        vec = {L.index(e["index"]): io.parse_coeff(e["coeff"]) for e in item["jacobiator"]}
        assert vec and vec == recomputed[tuple(item["generators"])]


def test_twist_witness_round_trip():
    report, code = cli.run("check-twist", ["builtin:twist_sl2"], cli.Bounds(hbar=3))
    assert code == 1
    U = UEA(SL2)
    J = io.parse_cochain(builtin("twist_sl2")["J"], U, 3)[2]
    expected = dict(diagonal_invariance(Twist(J).associator()))
    check = next(c for c in report["checks"] if c["name"] == "derived_associator_invariance")
    for item in check["witness"]:
        back = io.parse_cochain(item["residual"], U, 3)[3]
        assert back and back == expected[item["generator"]]


def test_quasi_poisson_witness_round_trip(tmp_path):
    doc = builtin("quasi_poisson_sl2")
    doc["r"]["terms"][0]["coeff_series"] = [{"pow": 0, "num": 2, "den": 1}]
    report, code = cli.run("check-quasi-poisson", [write(tmp_path, "q.json", doc)], cli.Bounds())
    assert code == 1
    w = next(c for c in report["checks"] if c["name"] == "quasi_poisson")["witness"]
    back = io.parse_polyvector(w)
    left, right = matrix_model(SL2, examples.SL2_MATRICES)
    r = io.parse_lie_tensor(doc["r"], SL2)
    Z = io.parse_lie_tensor(doc["Z"], SL2)
    assert not back.is_zero()
    assert back == quasi_poisson_residual(gamma_push(r, right), Z, left, require_homomorphism=False)


def test_cdybe_witness_round_trip():
    report, code = cli.run("cdybe-check", ["builtin:cdybe_sl2"], cli.Bounds())
    w = report["checks"][0]["witness"]["residual_without_Z"]
    rho = DynamicalRMatrix.build(SL2, ["h"], {("e", "f"): "1/lam"}, names=["lam"])
    F = rho.field
    back = {tuple(SL2.index(g) for g in t["word"]): F.parse(t["coeff"]) for t in w}
    assert back == cdybe_residual(rho).wedge_coords()


# -- determinism and the executable --------------------------------------------

def _stable(report):
    return json.dumps({k: v for k, v in report.items() if k != "timing"}, sort_keys=True)


@pytest.mark.parametrize("seed", [0, 7])
def test_seeded_runs_are_identical(seed):
    b = cli.Bounds(trials=4, seed=seed)
    a, _ = cli.run("brace-axioms", ["builtin:sl2"], b)
    c, _ = cli.run("brace-axioms", ["builtin:sl2"], b)
    assert _stable(a) == _stable(c)


def test_main_json_output(capsys):
    code = cli.main(["check-jacobi", "--input", "builtin:sl2", "--format", "json"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0 and out["status"] == "pass" and out["schema_version"] == 1
    assert out["config"]["bounds"]["hbar"] == 3


def test_main_text_and_list(capsys):
    assert cli.main(["list-examples"]) == 0
    assert "moyal" in capsys.readouterr().out.split()
    assert cli.main(["cdybe-check", "--input", "builtin:cdybe_sl2"]) == 1
    text = capsys.readouterr().out
    assert "constant_Z_exists: fail" in text
    assert cli.main(["check-jacobi", "--input", "builtin:sl2", "--trials", "0"]) == 2


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "qpquant.cli", "check-jacobi", "--input", "builtin:sl2",
                          "--format", "json"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["status"] == "pass"
