from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from psmra import census
from psmra.census import (
    ConstraintSet,
    coalition_sizes,
    count_encoding_rules,
    encoding_rule_count,
    enumerate_encoding_rules,
    enumerate_receiver_keys,
    enumerate_source_states,
    expected_source_count,
    gaussian_binomial,
    impersonation_attack,
    iter_rref,
    pair_profile,
    product_census,
    rule_keys,
    substitution_attack,
)
from psmra.errors import BudgetExceeded, EmptyCoalition, MRAError
from psmra.field import field_for_q
from psmra.linalg import canonicalize, identity, transform
from psmra.mracode import (
    canonical_message,
    decode,
    make_context,
    make_rule,
    rule_from_subspace,
    zero_rule,
)
from psmra.psgeom import is_group_element


@given(st.integers(0, 5), st.integers(0, 5), st.sampled_from([2, 4]))
@settings(max_examples=40, deadline=None)
def test_gaussian_binomial_matches_rref_enumeration(n, k, q):
    f = field_for_q(q)
    if q ** (n * n) > 1 << 14:
        n = min(n, 3)
    rows = list(iter_rref(f, n, k))
    assert len(rows) == gaussian_binomial(n, k, q)
    # every enumerated matrix is already canonical and all are distinct
    assert len(set(rows)) == len(rows)
    for m in rows[:50]:
        assert canonicalize(f, m, n).rows == m


def test_gaussian_binomial_values():
    assert gaussian_binomial(4, 2, 2) == 35
    assert gaussian_binomial(3, 1, 4) == 21
    assert gaussian_binomial(5, 0, 2) == 1
    assert gaussian_binomial(2, 3, 2) == 0


def test_family_sizes(small, mid):
    assert encoding_rule_count(small) == len(enumerate_encoding_rules(small)) == 256
    assert encoding_rule_count(mid) == len(enumerate_encoding_rules(mid)) == 4096
    for i in (1, 2):
        assert len(enumerate_receiver_keys(small, i)) == 16
    assert len(enumerate_source_states(small)) == expected_source_count(small) == 336
    assert expected_source_count(mid) == 336


def test_rule_enumeration_is_lexicographic_from_zero(small):
    rules = enumerate_encoding_rules(small)
    assert rules[0] == zero_rule(small)
    assert len(set(r.subspace for r in rules)) == len(rules)
    for r in rules[:20]:
        assert rule_from_subspace(small, r.subspace) == r


def test_constraint_counts_at_canonical_message(small):
    m = canonical_message(small).subspace
    k0 = rule_keys(small)[0]
    assert count_encoding_rules(small, ConstraintSet(within=(m,))) == 64
    assert count_encoding_rules(small, ConstraintSet(contain=(k0[1],))) == 16
    assert count_encoding_rules(small, ConstraintSet(within=(m,), contain=(k0[1],))) == 8
    assert count_encoding_rules(small, ConstraintSet(within=(m,), contain=(k0[1], k0[0]))) == 1
    assert coalition_sizes(small, (2,)) == Counter({16: 16})


def test_product_census_is_thread_independent(small):
    census.clear_cache()
    one = product_census(small, roundtrip=True, threads=1)
    census.clear_cache()
    two = product_census(small, roundtrip=True, threads=2)
    assert one.multiplicity == two.multiplicity
    assert one.pairs == two.pairs == 336 * 256
    assert one.roundtrip_failures == two.roundtrip_failures == 0
    assert one.verify_failures == two.verify_failures == 0
    assert len(one.multiplicity) == 4032


def test_impersonation_fast_agrees_with_oracle(small):
    for model, value in (("A", Fraction(1, 2)), ("B", Fraction(1, 16))):
        fast = impersonation_attack(small, 1, [2], model, method="fast")
        oracle = impersonation_attack(small, 1, [2], model, method="oracle")
        assert fast.value == oracle.value == value


def test_substitution_scopes(small):
    got = {
        (scope, model): substitution_attack(small, 1, [2], model, scope=scope).value
        for scope in census.SCOPES
        for model in "AB"
    }
    assert got[("all", "B")] == got[("per-source", "B")] == Fraction(1, 4)
    # the single canonical observed message under-reports the optimum
    assert got[("canonical", "B")] == Fraction(1, 8)
    assert {got[(s, "A")] for s in census.SCOPES} == {Fraction(1)}


def test_attack_argument_errors(small):
    with pytest.raises(EmptyCoalition):
        impersonation_attack(small, 1, [])
    with pytest.raises(MRAError):
        substitution_attack(small, 2, [2])
    with pytest.raises(BudgetExceeded):
        substitution_attack(small, 1, [2], scope="all", budget=1000)
    with pytest.raises(ValueError):
        substitution_attack(small, 1, [2], scope="nowhere")


def test_budget_guards_enumeration():
    census.clear_cache()
    ctx = make_context(4, 5, 2, 4)
    with pytest.raises(BudgetExceeded):
        enumerate_source_states(ctx, budget=1000)


def _translation(ctx, A, c):
    """Group element moving the zero rule onto the rule (A, c) while fixing
    every vector of U-perp modulo U."""
    p = ctx.params
    nu, n = p.nu, p.n
    t = [list(row) for row in identity(ctx.dim)]
    for j in range(n):
        row = t[nu + j]
        for b in range(nu - n):
            row[n + b] ^= A[j][b]
            t[nu + n + b][j] ^= A[j][b]
        row[2 * nu] ^= c[j]
        t[2 * nu + 1][j] ^= c[j]
    return tuple(tuple(r) for r in t)


@given(st.data())
@settings(max_examples=25, deadline=None)
def test_translation_symmetry(small, data):
    p = small.params
    bits = st.integers(0, 1)
    A = data.draw(st.lists(st.lists(bits, min_size=p.nu - p.n, max_size=p.nu - p.n), min_size=p.n, max_size=p.n))
    c = data.draw(st.lists(bits, min_size=p.n, max_size=p.n))
    t = _translation(small, A, c)
    assert is_group_element(small.space, t)
    assert transform(small.U, t) == small.U
    assert transform(zero_rule(small).subspace, t) == make_rule(small, A, c).subspace
    R2 = data.draw(st.lists(st.lists(bits, min_size=p.nu - p.n, max_size=p.nu - p.n), min_size=p.n, max_size=p.n))
    R5 = data.draw(st.lists(bits, min_size=p.n, max_size=p.n))
    moved = transform(make_rule(small, R2, R5).subspace, t)
    shifted = make_rule(small, [[x ^ y for x, y in zip(r, a)] for r, a in zip(R2, A)], [x ^ y for x, y in zip(R5, c)])
    assert moved == shifted.subspace
    s = data.draw(st.sampled_from(enumerate_source_states(small)))
    assert transform(s.subspace, t) == s.subspace


def test_decode_of_canonical_message(small):
    assert decode(small, canonical_message(small)).subspace.dim == 2 * 4 - 2 + 1


def test_pair_profile_mid(mid):
    entries = pair_profile(mid, (2,), 1, "canonical")
    profile = Counter((e.k, e.count) for e in entries)
    assert profile == Counter({(6, 2): 512, (6, 4): 2496, (6, 8): 384, (7, 4): 576, (7, 8): 576})
    profile2 = Counter((e.k, e.count) for e in pair_profile(mid, (2, 3), 1, "canonical"))
    assert set(c for _, c in profile2) == {1}
