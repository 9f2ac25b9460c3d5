import itertools

import pytest
from hypothesis import given, strategies as st

from qpquant.graded import (BlockPartition, GradedTensor, InvalidInput, SymmetryKind, graded_product,
                            koszul_sign, sort_sign)


@st.composite
def perm_and_degrees(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    p = draw(st.permutations(list(range(1, n + 1))))
    degs = draw(st.lists(st.integers(-2, 2), min_size=n, max_size=n))
    return list(p), degs


def test_frozen_signs():
    assert koszul_sign([2, 1], [1, 1]) == -1
    assert koszul_sign([2, 1], [1, 0]) == 1
    assert koszul_sign([3, 1, 2], [1, 1, 1]) == 1
    assert sort_sign(["b", "a"], [1, 1]) == ([1, 0], -1)


@given(perm_and_degrees())
def test_even_degrees_give_plus_one(pd):
    p, degs = pd
    assert koszul_sign(p, [2 * d for d in degs]) == 1


@given(perm_and_degrees())
def test_odd_degrees_give_permutation_sign(pd):
    p, _ = pd
    inversions = sum(1 for i, j in itertools.combinations(range(len(p)), 2) if p[i] > p[j])
    assert koszul_sign(p, [1] * len(p)) == (-1) ** inversions


@given(perm_and_degrees(), st.data())
def test_sign_is_multiplicative(pd, data):
    p, degs = pd
    q = data.draw(st.permutations(list(range(1, len(p) + 1))))
    # apply p, then q to the rearranged factors
    moved = [degs[i - 1] for i in p]
    composite = [p[i - 1] for i in q]
    assert koszul_sign(composite, degs) == koszul_sign(p, degs) * koszul_sign(q, moved)


def test_exterior_tensor_canonicalises():
    degs = {0: 0, 1: 0, 2: 0}
    t = GradedTensor.build([((1, 0), 1), ((0, 0), 5)], degs, SymmetryKind.EXTERIOR)
    assert t.terms == {(0, 1): -1}


def test_graded_product_of_odd_letters_anticommutes():
    degs = {0: 1, 1: 1}
    a = GradedTensor.build([((0,), 1)], degs, SymmetryKind.SYMMETRIC)
    b = GradedTensor.build([((1,), 1)], degs, SymmetryKind.SYMMETRIC)
    assert graded_product(a, b) == graded_product(b, a).scale(-1)
    assert graded_product(a, a).is_zero()


def test_block_partition_validation():
    assert BlockPartition.of((1, 2), 3).n == 3
    assert BlockPartition.of((1, 2), n=4).blocks == ((1, 2),)
    with pytest.raises(InvalidInput):
        BlockPartition.of((1, 3), n=2)
    with pytest.raises(InvalidInput):
        BlockPartition.of((1, 2), 2)
