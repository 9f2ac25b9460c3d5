"""Koszul signs, graded tensors and coproduct-insertion combinatorics.

Every sign in the package that comes from reordering graded factors is
computed by :func:`koszul_sign`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

from .series import DEFAULT_ORDER, HbarSeries


class InvalidInput(ValueError):
    """Raised when an operation receives structurally malformed data."""


def koszul_sign(permutation: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign of listing factors of the given degrees in the order ``permutation``.

    ``permutation`` is one-line notation on ``1..k``: the i-th factor of the
    result is the ``permutation[i]``-th factor of the input.  Each pair of
    factors that changes relative order contributes ``(-1)^(deg*deg)``.
    """
    k = len(permutation)
    if len(degrees) != k or sorted(permutation) != list(range(1, k + 1)):
        raise InvalidInput(f"not a permutation of 1..{len(degrees)}: {list(permutation)}")
    odd = [degrees[p - 1] & 1 for p in permutation]
    sign = 1
    for i in range(k):
        if not odd[i]:
            continue
        pi = permutation[i]
        for j in range(i + 1, k):
            if odd[j] and permutation[j] < pi:
                sign = -sign
    return sign


def sort_sign(items: Sequence, degrees: Sequence[int], key=None) -> tuple[list[int], int]:
    """Stable sort order of ``items`` and the Koszul sign of applying it."""
    order = sorted(range(len(items)), key=(lambda i: items[i]) if key is None else (lambda i: key(items[i])))
    return order, koszul_sign([i + 1 for i in order], degrees)


class SymmetryKind(str, Enum):
    FREE = "free-tensor"
    SYMMETRIC = "symmetric"
    EXTERIOR = "exterior"


def _canonical_word(word: tuple, degrees: Mapping, kind: SymmetryKind) -> tuple[tuple, int]:
    """Return (canonical word, sign); sign 0 means the word vanishes."""
    if kind is SymmetryKind.FREE or len(word) < 2:
        return word, 1
    shift = 1 if kind is SymmetryKind.EXTERIOR else 0
    degs = [degrees[g] + shift for g in word]
    order, sign = sort_sign(word, degs)
    w = tuple(word[i] for i in order)
    for a, b in zip(w, w[1:]):
        if a == b and (degrees[a] + shift) % 2:
            return w, 0
    return w, sign


@dataclass(frozen=True)
class GradedTensor:
    """Sparse linear combination of words in graded generators.

    ``degrees`` maps each generator id to its integer degree.  For the
    exterior kind the signs use the suspended degree ``deg + 1``, so the
    exterior algebra on degree-0 generators is the usual alternating one.
    """

    terms: Mapping[tuple, HbarSeries]
    degrees: Mapping
    kind: SymmetryKind = SymmetryKind.FREE
    order: int = DEFAULT_ORDER

    @classmethod
    def build(cls, terms: Iterable, degrees: Mapping, kind=SymmetryKind.FREE, order: int = DEFAULT_ORDER):
        kind = SymmetryKind(kind)
        acc: dict[tuple, HbarSeries] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for word, coeff in items:
            word = tuple(word)
            for g in word:
                if g not in degrees:
                    raise InvalidInput(f"unknown generator {g!r}")
            w, s = _canonical_word(word, degrees, kind)
            if s == 0:
                continue
            c = HbarSeries.coerce(coeff, order) * s
            acc[w] = acc[w] + c if w in acc else c
        acc = {w: c.truncate(order) for w, c in acc.items() if c}
        return cls(acc, dict(degrees), kind, order)

    def canonical(self) -> "GradedTensor":
        return GradedTensor.build(self.terms, self.degrees, self.kind, self.order)

    def word_degree(self, word: tuple) -> int:
        return sum(self.degrees[g] for g in word)

    def arities(self) -> set[int]:
        return {len(w) for w in self.terms}

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "GradedTensor") -> "GradedTensor":
        _check_compatible(self, other)
        acc = dict(self.terms)
        for w, c in other.terms.items():
            acc[w] = acc[w] + c if w in acc else c
        return GradedTensor.build(acc, self.degrees, self.kind, min(self.order, other.order))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "GradedTensor":
        return GradedTensor.build({w: c * s for w, c in self.terms.items()}, self.degrees, self.kind, self.order)

    def __eq__(self, other):
        if not isinstance(other, GradedTensor):
            return NotImplemented
        return self.kind == other.kind and dict(self.terms) == dict(other.terms)

    def __hash__(self):
        return hash((self.kind, frozenset(self.terms.items())))


def _check_compatible(a: GradedTensor, b: GradedTensor) -> None:
    if a.kind != b.kind:
        raise InvalidInput(f"symmetry kinds differ: {a.kind.value} vs {b.kind.value}")
    for g in set(a.degrees) & set(b.degrees):
        if a.degrees[g] != b.degrees[g]:
            raise InvalidInput(f"generator {g!r} has inconsistent degrees")


def graded_product(a: GradedTensor, b: GradedTensor) -> GradedTensor:
    """Concatenation product, re-canonicalized for symmetric/exterior kinds."""
    _check_compatible(a, b)
    degrees = {**a.degrees, **b.degrees}
    terms = []
    for u, cu in a.terms.items():
        for v, cv in b.terms.items():
            terms.append((u + v, cu * cv))
    return GradedTensor.build(terms, degrees, a.kind, min(a.order, b.order))


@dataclass(frozen=True)
class BlockPartition:
    """Disjoint ordered blocks I_1..I_m inside {1..n} (1-based)."""

    blocks: tuple
    n: int

    def __post_init__(self):
        blocks = tuple(tuple(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise InvalidInput("empty block")
            for i in b:
                if not 1 <= i <= self.n:
                    raise InvalidInput(f"index {i} outside 1..{self.n}")
                if i in seen:
                    raise InvalidInput(f"blocks overlap at {i}")
                seen.add(i)

    @classmethod
    def of(cls, *blocks, n: int | None = None) -> "BlockPartition":
        blocks = tuple((b,) if isinstance(b, int) else tuple(b) for b in blocks)
        if n is None:
            n = max(max(b) for b in blocks)
        return cls(blocks, n)


Coproduct = Callable[[object, int], Iterable[tuple[tuple, object]]]


def insertion(
    terms: Mapping[tuple, object],
    partition: BlockPartition,
    coproduct: Coproduct,
    degree: Callable[[object], int],
    unit,
) -> dict[tuple, object]:
    """Coproduct-insertion a^{I_1,...,I_m} on a sparse element of U^{(x)m}.

    ``terms`` maps m-tuples of basis elements to coefficients;
    ``coproduct(x, k)`` yields (k-tuple of basis elements, coefficient) for the
    iterated coproduct, with ``k == 1`` the identity.  Slots not covered by
    any block receive ``unit``.  Coefficients must support ``*`` and ``+``.
    """
    m = len(partition.blocks)
    targets = [i for b in partition.blocks for i in b]
    perm = sorted(range(len(targets)), key=lambda i: targets[i])
    out: dict[tuple, object] = {}
    for word, coeff in terms.items():
        if len(word) != m:
            raise InvalidInput(f"element has {len(word)} tensor factors, partition has {m} blocks")
        partial = [((), coeff)]
        for slot, block in zip(word, partition.blocks):
            pieces = list(coproduct(slot, len(block)))
            partial = [(acc + p, c * pc) for acc, c in partial for p, pc in pieces]
        for pieces, c in partial:
            sign = koszul_sign([i + 1 for i in perm], [degree(p) for p in pieces])
            slots = [unit] * partition.n
            for src, pos in enumerate(targets):
                slots[pos - 1] = pieces[src]
            key = tuple(slots)
            val = c if sign == 1 else -c
            out[key] = out[key] + val if key in out else val
    return out
