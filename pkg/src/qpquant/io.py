"""JSON schemas (version 1) for every object the command line reads or writes.

Coefficients are exact: an integer, a ``"p/q"`` string, or ``{"num", "den"}``.
Series are lists of ``{"pow", "num", "den"}``.  Generators may be referred to
by name or by index.  Floats are rejected everywhere.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .graded import GradedTensor, InvalidInput
from .lie import LieAlgebra, wedge
from .polyvector import PolyVector
from .series import DEFAULT_ORDER, HbarSeries
from .uea import UEA, UTensor

SCHEMA_VERSION = 1


class ParseError(InvalidInput):
    """Input does not match the schema; ``where`` names the offending location."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


# -- scalars -----------------------------------------------------------------

_RATIONAL = re.compile(r"[+-]?\d+(/\d+)?")


def parse_coeff(x, where: str = "coeff") -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise ParseError(where, "coefficients must be exact (int, 'p/q' or {num, den})")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        if not _RATIONAL.fullmatch(x.strip()):
            raise ParseError(where, f"not a rational 'p' or 'p/q': {x!r}")
        try:
            return Fraction(x)
        except ZeroDivisionError:
            raise ParseError(where, f"zero denominator: {x!r}") from None
    if isinstance(x, Mapping):
        num, den = x.get("num"), x.get("den", 1)
        if not isinstance(num, int) or not isinstance(den, int) or isinstance(num, bool) or den == 0:
            raise ParseError(where, "num/den must be integers with den != 0")
        return Fraction(num, den)
    raise ParseError(where, f"unsupported coefficient {x!r}")


def dump_coeff(c: Fraction) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def parse_series(x, order: int, where: str = "coeff_series") -> HbarSeries:
    if not isinstance(x, list):
        return HbarSeries.const(parse_coeff(x, where), order)
    out = {}
    for n, t in enumerate(x):
        w = f"{where}[{n}]"
        if not isinstance(t, Mapping) or "pow" not in t:
            raise ParseError(w, "series terms need 'pow'")
        p = t["pow"]
        if not isinstance(p, int) or isinstance(p, bool) or p < 0:
            raise ParseError(w, "pow must be a nonnegative integer")
        out[p] = out.get(p, 0) + parse_coeff({"num": t.get("num"), "den": t.get("den", 1)}, w)
    return HbarSeries(out, order)


def _term_series(t: Mapping, order: int, where: str) -> HbarSeries:
    if "coeff_series" in t:
        return parse_series(t["coeff_series"], order, f"{where}.coeff_series")
    if "coeff" in t:
        return HbarSeries.const(parse_coeff(t["coeff"], f"{where}.coeff"), order)
    raise ParseError(where, "term needs 'coeff' or 'coeff_series'")


# -- Lie algebras ------------------------------------------------------------

def _gen(lie_or_names, g, where: str) -> int:
    names = lie_or_names.names if hasattr(lie_or_names, "names") else lie_or_names
    if isinstance(g, bool):
        raise ParseError(where, f"bad generator {g!r}")
    if isinstance(g, int):
        if not 0 <= g < len(names):
            raise ParseError(where, f"generator index {g} out of range")
        return g
    if isinstance(g, str) and g in names:
        return list(names).index(g)
    raise ParseError(where, f"unknown generator {g!r}")


def parse_lie(doc: Mapping, where: str = "lie_algebra") -> LieAlgebra:
    if not isinstance(doc, Mapping) or "generators" not in doc:
        raise ParseError(where, "expected an object with 'generators'")
    names, degrees = [], []
    for n, g in enumerate(doc["generators"]):
        w = f"{where}.generators[{n}]"
        if not isinstance(g, Mapping) or not isinstance(g.get("name"), str):
            raise ParseError(w, "generator needs a string 'name'")
        d = g.get("degree", 0)
        if not isinstance(d, int) or isinstance(d, bool):
            raise ParseError(w, "degree must be an integer")
        names.append(g["name"])
        degrees.append(d)
    brackets: dict = {}
    for n, b in enumerate(doc.get("brackets", [])):
        w = f"{where}.brackets[{n}]"
        if not isinstance(b, Mapping):
            raise ParseError(w, "bracket entries are objects")
        i, j = _gen(names, b.get("i"), f"{w}.i"), _gen(names, b.get("j"), f"{w}.j")
        vec = {}
        for m, t in enumerate(b.get("terms", [])):
            k = _gen(names, t.get("k"), f"{w}.terms[{m}].k")
            vec[k] = vec.get(k, 0) + parse_coeff(t.get("coeff"), f"{w}.terms[{m}].coeff")
        if i > j:
            s = -1 if (degrees[i] * degrees[j]) % 2 == 0 else 1
            i, j, vec = j, i, {k: s * c for k, c in vec.items()}
        vec = {k: c for k, c in vec.items() if c}
        if vec:
            brackets[(i, j)] = vec
    try:
        return LieAlgebra(tuple(names), tuple(degrees), brackets)
    except InvalidInput as e:
        raise ParseError(where, str(e)) from None


def dump_lie(L: LieAlgebra) -> dict:
    return {
        "generators": [{"name": n, "degree": d} for n, d in zip(L.names, L.degrees)],
        "brackets": [
            {"i": L.names[i], "j": L.names[j],
             "terms": [{"k": L.names[k], "coeff": dump_coeff(c)} for k, c in sorted(v.items())]}
            for (i, j), v in sorted(L.brackets.items())
        ],
    }


# -- exterior tensors over g -------------------------------------------------

def parse_lie_tensor(doc: Mapping, L: LieAlgebra, order: int = DEFAULT_ORDER, where: str = "lie_tensor") -> GradedTensor:
    if not isinstance(doc, Mapping) or "terms" not in doc:
        raise ParseError(where, "expected an object with 'terms'")
    arity = doc.get("arity")
    items = []
    for n, t in enumerate(doc["terms"]):
        w = f"{where}.terms[{n}]"
        idx = tuple(_gen(L, g, f"{w}.indices") for g in t.get("indices", []))
        if arity is not None and len(idx) != arity:
            raise ParseError(w, f"expected {arity} indices")
        items.append((idx, _term_series(t, order, w)))
    return wedge(L, items, order)


def dump_series(c: HbarSeries) -> list:
    return c.to_json()


def dump_lie_tensor(t: GradedTensor, L: LieAlgebra) -> dict:
    ar = sorted(t.arities())
    return {
        "arity": ar[0] if len(ar) == 1 else None,
        "terms": [{"indices": [L.names[g] for g in w], "coeff_series": dump_series(c)}
                  for w, c in sorted(t.terms.items())],
    }


# -- U(g) tensors and cochains -----------------------------------------------

def parse_utensor(terms: list, U: UEA, n: int, order: int, where: str) -> UTensor:
    items = []
    for m, t in enumerate(terms):
        w = f"{where}[{m}]"
        words = t.get("words") if isinstance(t, Mapping) else None
        if not isinstance(words, list) or len(words) != n:
            raise ParseError(w, f"'words' must list {n} slot words")
        slots = []
        for s, word in enumerate(words):
            if not isinstance(word, list):
                raise ParseError(f"{w}.words[{s}]", "slot word must be a list")
            slots.append(tuple(_gen(U.lie, g, f"{w}.words[{s}]") for g in word))
        items.append((slots, _term_series(t, order, w)))
    return U.element(items, n, order)


def parse_cochain(doc: Mapping, U: UEA, order: int = DEFAULT_ORDER, where: str = "cochain") -> dict:
    """{arity: UTensor} from {"arities": {"n": [terms]}}."""
    if not isinstance(doc, Mapping) or "arities" not in doc:
        raise ParseError(where, "expected an object with 'arities'")
    out = {}
    for key, terms in doc["arities"].items():
        try:
            n = int(key)
        except ValueError:
            raise ParseError(f"{where}.arities", f"bad arity {key!r}") from None
        if n < 1:
            raise ParseError(f"{where}.arities", "arity must be >= 1")
        out[n] = parse_utensor(terms, U, n, order, f"{where}.arities.{n}")
    return out


def parse_single(doc: Mapping, U: UEA, n: int, order: int, where: str) -> UTensor:
    comps = parse_cochain(doc, U, order, where)
    if set(comps) - {n}:
        raise ParseError(where, f"expected a single component of arity {n}")
    return comps.get(n, U.zero(n, order))


def dump_utensor(t: UTensor) -> list:
    names = t.uea.lie.names
    grouped: dict = {}
    for (k, slots), c in t.terms.items():
        grouped.setdefault(slots, {})[k] = c
    return [{"words": [[names[g] for g in s] for s in slots],
             "coeff_series": HbarSeries(cs, t.order).to_json()}
            for slots, cs in sorted(grouped.items())]


def dump_cochain(comps: Mapping) -> dict:
    return {"arities": {str(n): dump_utensor(t) for n, t in sorted(comps.items())}}


# -- polyvector fields -------------------------------------------------------

def parse_polyvector(doc: Mapping, order: int = DEFAULT_ORDER, where: str = "polyvector") -> PolyVector:
    if not isinstance(doc, Mapping) or "dimension" not in doc:
        raise ParseError(where, "expected an object with 'dimension'")
    m = doc["dimension"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 0:
        raise ParseError(where, "dimension must be a nonnegative integer")
    terms: dict = {}
    for n, t in enumerate(doc.get("terms", [])):
        w = f"{where}.terms[{n}]"
        exps = t.get("exponents", [0] * m)
        idx = t.get("partials", [])
        if not isinstance(exps, list) or len(exps) != m:
            raise ParseError(w, f"exponents must have length {m}")
        s = _term_series(t, order, w)
        for k, c in s.items():
            key = (k, tuple(exps), tuple(idx))
            terms[key] = terms.get(key, 0) + c
    try:
        return PolyVector(m, list(terms.items()), order)
    except InvalidInput as e:
        raise ParseError(where, str(e)) from None


def dump_polyvector(p: PolyVector) -> dict:
    grouped: dict = {}
    for (k, exps, idx), c in p.terms.items():
        grouped.setdefault((exps, idx), {})[k] = c
    return {"dimension": p.m,
            "terms": [{"exponents": list(e), "partials": list(i), "coeff_series": HbarSeries(cs, p.order).to_json()}
                      for (e, i), cs in sorted(grouped.items())]}


# -- constant-coefficient bidifferential operators ---------------------------

def parse_bidiff(doc: Mapping, order: int = DEFAULT_ORDER, where: str = "bidiff"):
    from .star import BiDiff

    m = doc.get("dimension") if isinstance(doc, Mapping) else None
    if not isinstance(m, int) or isinstance(m, bool):
        raise ParseError(where, "expected an integer 'dimension'")
    terms: dict = {}
    for n, t in enumerate(doc.get("terms", [])):
        w = f"{where}.terms[{n}]"
        key = (t.get("pow", 0), tuple(t.get("exponents", [0] * m)), tuple(t.get("alpha", [0] * m)),
               tuple(t.get("beta", [0] * m)))
        if any(len(v) != m for v in key[1:]):
            raise ParseError(w, f"multi-indices must have length {m}")
        if key[0] <= order:
            terms[key] = terms.get(key, 0) + parse_coeff(t.get("coeff"), f"{w}.coeff")
    return BiDiff(m, {k: v for k, v in terms.items() if v}, order)


def dump_bidiff(B) -> dict:
    return {"dimension": B.m,
            "terms": [{"pow": k, "exponents": list(c), "alpha": list(a), "beta": list(b), "coeff": dump_coeff(v)}
                      for (k, c, a, b), v in sorted(B.terms.items())]}


# -- L-infinity data ---------------------------------------------------------

def parse_space(doc: Mapping, where: str = "space"):
    from .linfty import GradedSpace

    if not isinstance(doc, Mapping) or not isinstance(doc.get("names"), list):
        raise ParseError(where, "expected 'names' and 'degrees'")
    degs = doc.get("degrees")
    if not isinstance(degs, list) or not all(isinstance(d, int) and not isinstance(d, bool) for d in degs):
        raise ParseError(where, "degrees must be integers")
    try:
        return GradedSpace(tuple(doc["names"]), tuple(degs))
    except InvalidInput as e:
        raise ParseError(where, str(e)) from None


def dump_space(sp) -> dict:
    return {"names": list(sp.names), "degrees": list(sp.degrees)}


def parse_components(doc: Mapping, src, tgt, where: str) -> dict:
    """{k: {canonical word: {out: coeff}}} from {"k": [{"word": [...], "image": [{"index", "coeff"}]}]}."""
    out: dict = {}
    for key, entries in doc.items():
        k = int(key)
        comp: dict = {}
        for n, e in enumerate(entries):
            w = f"{where}.{key}[{n}]"
            word = tuple(_gen(src.names, g, f"{w}.word") for g in e.get("word", []))
            if len(word) != k:
                raise ParseError(w, f"word must have length {k}")
            cw, s = src.canonical(word)
            if cw is None:
                continue
            img = comp.setdefault(cw, {})
            for m, t in enumerate(e.get("image", [])):
                o = _gen(tgt.names, t.get("index"), f"{w}.image[{m}].index")
                img[o] = img.get(o, 0) + s * parse_coeff(t.get("coeff"), f"{w}.image[{m}].coeff")
            comp[cw] = {o: c for o, c in img.items() if c}
            if not comp[cw]:
                del comp[cw]
        out[k] = comp
    return out


def dump_components(maps: Mapping, src, tgt) -> dict:
    return {str(k): [{"word": [src.names[g] for g in w],
                      "image": [{"index": tgt.names[o], "coeff": dump_coeff(c)} for o, c in sorted(img.items())]}
                     for w, img in sorted(comp.items())]
            for k, comp in sorted(maps.items()) if comp}


def parse_structure(doc: Mapping, where: str = "structure"):
    from .linfty import LInftyStructure

    sp = parse_space(doc.get("space"), f"{where}.space")
    return LInftyStructure(sp, parse_components(doc.get("maps", {}), sp, sp, f"{where}.maps"))


def dump_structure(S) -> dict:
    return {"space": dump_space(S.space), "maps": dump_components(S.maps, S.space, S.space)}


def parse_morphism(doc: Mapping, src, tgt, where: str = "morphism"):
    from .linfty import LInftyMorphism

    return LInftyMorphism(src, tgt, parse_components(doc.get("maps", {}), src, tgt, f"{where}.maps"))


def dump_morphism(phi) -> dict:
    return {"maps": dump_components(phi.maps, phi.source, phi.target)}


def dump_vector(vec: Mapping, names) -> list:
    return [{"index": names[i], "coeff": dump_coeff(c) if isinstance(c, Fraction) else dump_series(c)}
            for i, c in sorted(vec.items())]


# -- documents ---------------------------------------------------------------

def load_document(path: str | Path) -> dict:
    """Read a JSON document and check its schema version."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(str(path), f"cannot read: {e.strerror}") from None
    try:
        doc = json.loads(text, parse_float=_no_float)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}:{e.colno}", e.msg) from None
    except _FloatSeen as e:
        raise ParseError(str(path), f"floating point literal {e} is not allowed") from None
    if not isinstance(doc, dict):
        raise ParseError(str(path), "top level must be an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"{path}:schema_version", f"expected {SCHEMA_VERSION}, got {doc.get('schema_version')!r}")
    return doc


class _FloatSeen(Exception):
    pass


def _no_float(s: str):
    raise _FloatSeen(s)


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
