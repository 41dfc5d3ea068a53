from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from psmra.census import gaussian_binomial, iter_rref
from psmra.errors import DimensionMismatch, GeometryError
from psmra.field import GF2, field_make
from psmra.linalg import bilinear, canonicalize, identity, rank, transform
from psmra.psgeom import SpaceSpec, SubspaceType, build_space, classify, is_group_element, random_stabilizing_element
from psmra.rng import Rng

GF4 = field_make(2)


def test_form_shape():
    s = SpaceSpec(GF2, 2, 2)
    assert s.dim == 6
    assert s.form == (
        (0, 0, 1, 0, 0, 0),
        (0, 0, 0, 1, 0, 0),
        (1, 0, 0, 0, 0, 0),
        (0, 1, 0, 0, 0, 0),
        (0, 0, 0, 0, 0, 1),
        (0, 0, 0, 0, 1, 1),
    )
    assert build_space(GF2, 3, 1).form[6][6] == 1


@pytest.mark.parametrize("delta", [1, 2])
def test_form_is_symmetric_nondegenerate_and_not_alternate(delta):
    s = SpaceSpec(GF4, 3, delta)
    f = s.form
    assert all(f[i][j] == f[j][i] for i in range(s.dim) for j in range(s.dim))
    assert rank(GF4, f) == s.dim
    assert any(f[i][i] for i in range(s.dim))


def test_classify_small_examples():
    s = SpaceSpec(GF2, 3, 2)  # e_1..e_8, special vector e_7
    assert classify(s, s.span(1)).as_tuple() == (1, 0, 0, 0)
    assert classify(s, s.span(1, 4)).as_tuple() == (2, 2, 1, 0)
    assert classify(s, s.span(7)).as_tuple() == (1, 0, 0, 1)
    t = classify(s, s.span(8))
    assert t.as_tuple() == (1, 1, 0, 0) and t.tau == 1
    t = classify(s, s.span(7, 8))
    assert t.as_tuple() == (2, 2, 0, 1) and t.tau == 2
    assert classify(s, s.span(1, 4, 7)).as_tuple() == (3, 2, 1, 1)
    assert str(classify(s, s.span(1, 4))) == "(2,2,1,0)"


def test_classify_delta_one():
    s = SpaceSpec(GF4, 2, 1)
    t = classify(s, s.span(5))
    assert t.as_tuple() == (1, 1, 0, 1) and t.tau == 1
    assert classify(s, s.span(1, 3, 5)).as_tuple() == (3, 3, 1, 1)


def _tau_by_enumeration(space, sub):
    """τ recomputed from first principles: alternate iff x S x^t = 0 on the whole span."""
    f = space.field
    alternate = True
    for coefs in product(range(f.q), repeat=sub.dim):
        x = [0] * space.dim
        for c, r in zip(coefs, sub.rows):
            x = [a ^ f.mul(c, b) for a, b in zip(x, r)]
        if bilinear(f, x, space.form, x):
            alternate = False
            break
    return alternate


@pytest.mark.parametrize("delta", [1, 2])
def test_type_census_small_space(delta):
    space = SpaceSpec(GF2, 2, delta)
    total = 0
    for k in range(space.dim + 1):
        for rows in iter_rref(GF2, space.dim, k):
            sub = canonicalize(GF2, rows, space.dim)
            t = classify(space, sub)
            assert (t.tau == 0) == _tau_by_enumeration(space, sub)
            assert t.t == 2 * t.s + t.tau
            total += 1
    assert total == sum(gaussian_binomial(space.dim, k, 2) for k in range(space.dim + 1))


def test_stabilizing_elements_are_group_elements():
    rng = Rng(3)
    for field in (GF2, GF4):
        for delta in (1, 2):
            space = SpaceSpec(field, 3, delta)
            for _ in range(5):
                t = random_stabilizing_element(space, rng)
                assert is_group_element(space, t)
                assert transform(space.span(2 * space.nu + 1), t) == space.span(2 * space.nu + 1)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32), q=st.sampled_from([2, 4]), delta=st.sampled_from([1, 2]), data=st.data())
def test_classify_invariant_under_stabilizing_group(seed, q, delta, data):
    field = field_make(q.bit_length() - 1)
    space = SpaceSpec(field, data.draw(st.integers(1, 4)), delta)
    rows = data.draw(
        st.lists(st.lists(st.integers(0, q - 1), min_size=space.dim, max_size=space.dim), max_size=space.dim)
    )
    sub = canonicalize(field, rows, space.dim)
    t = random_stabilizing_element(space, Rng(seed))
    assert classify(space, transform(sub, t)) == classify(space, sub)


def test_non_group_elements():
    space = SpaceSpec(GF2, 2, 2)
    assert is_group_element(space, identity(6))
    swap_tail = [list(r) for r in identity(6)]
    swap_tail[4], swap_tail[5] = swap_tail[5], swap_tail[4]
    assert not is_group_element(space, swap_tail)
    assert not is_group_element(space, [[0] * 6] * 6)
    with pytest.raises(DimensionMismatch):
        is_group_element(space, identity(5))


def test_space_errors():
    with pytest.raises(GeometryError):
        SpaceSpec(GF2, 2, 3)
    with pytest.raises(GeometryError):
        SpaceSpec(GF2, 0, 1)
    s = SpaceSpec(GF2, 2, 1)
    with pytest.raises(DimensionMismatch):
        s.e(0)
    with pytest.raises(DimensionMismatch):
        classify(s, canonicalize(GF2, [[1, 0, 0]]))


def test_subspace_type_ordering_and_tuple():
    a = SubspaceType(2, 2, 1, 0, 0)
    assert a.as_tuple() == (2, 2, 1, 0)
    assert a < SubspaceType(2, 2, 1, 0, 1)
