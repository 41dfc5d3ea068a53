import pickle

import pytest
from hypothesis import given, strategies as st

from psmra.errors import DivisionByZero, FieldError, ReduciblePolynomial
from psmra.field import (
    DEFAULT_POLYS,
    GF2,
    FieldSpec,
    clmul,
    field_arith,
    field_for_q,
    field_make,
    poly_mod,
)


def _rabin_irreducible(f):
    """Rabin's test over GF(2): x^(2^k) = x mod f and gcd(x^(2^(k/p)) - x, f) = 1."""
    k = f.bit_length() - 1

    def mulmod(a, b):
        return poly_mod(clmul(a, b), f)

    def frob(times):
        x = 0b10
        for _ in range(times):
            x = mulmod(x, x)
        return x

    def gcd(a, b):
        while b:
            while a and a.bit_length() >= b.bit_length():
                a ^= b << (a.bit_length() - b.bit_length())
            a, b = b, a
        return a

    if frob(k) != poly_mod(0b10, f):
        return False
    for p in {p for p in range(2, k + 1) if k % p == 0 and all(p % d for d in range(2, p))}:
        if gcd(f, frob(k // p) ^ 0b10) != 1:
            return False
    return True


def test_default_polys_are_irreducible():
    for k, poly in DEFAULT_POLYS.items():
        assert poly.bit_length() - 1 == k
        assert _rabin_irreducible(poly), k
        assert field_make(k).poly == poly


def test_default_polys_pinned():
    assert DEFAULT_POLYS[1] == 0b10
    assert DEFAULT_POLYS[2] == 0b111
    assert DEFAULT_POLYS[4] == 0b10011
    assert DEFAULT_POLYS[8] == 0x11B
    assert DEFAULT_POLYS[16] == 0x1002B


def test_aes_known_answers():
    f = field_make(8)
    assert f.mul(0x57, 0x83) == 0xC1
    assert f.mul(0x57, 0x13) == 0xFE
    assert f.inv(0x53) == 0xCA


def test_gf4_table():
    f = field_make(2)
    # 2 = x, 3 = x + 1, x^2 = x + 1
    assert f.mul(2, 2) == 3
    assert f.mul(2, 3) == 1
    assert f.mul(3, 3) == 2
    assert f.inv(2) == 3


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_field_axioms_exhaustive(k):
    f = field_make(k)
    els = list(f.elements())
    for a in els:
        assert f.pow(a, f.q) == a
        if a:
            assert f.mul(a, f.inv(a)) == 1
        for b in els:
            assert f.mul(a, b) == f.mul(b, a)
            assert f.mul(a, b) == f.mul_direct(a, b)
            for c in els:
                assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
                assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))


def test_tables_match_direct_gf256():
    f = field_make(8)
    for a in range(256):
        for b in range(256):
            assert f.mul(a, b) == f.mul_direct(a, b)


@given(st.integers(1, 16), st.data())
def test_tables_match_direct_any_k(k, data):
    f = field_make(k)
    a = data.draw(st.integers(0, f.q - 1))
    b = data.draw(st.integers(0, f.q - 1))
    e = data.draw(st.integers(0, 3 * f.q))
    assert f.mul(a, b) == f.mul_direct(a, b)
    assert f.pow(a, e) == f.pow_direct(a, e)
    if b:
        assert f.mul(f.div(a, b), b) == a


def test_non_default_polynomial():
    f = FieldSpec(4, 0b11001)  # x^4 + x^3 + 1
    for a in range(1, 16):
        assert f.mul(a, f.inv(a)) == 1
    assert f != field_make(4)


def test_errors():
    with pytest.raises(FieldError):
        field_make(0)
    with pytest.raises(FieldError):
        field_make(17)
    with pytest.raises(ReduciblePolynomial):
        FieldSpec(2, 0b101)
    with pytest.raises(FieldError):
        FieldSpec(3, 0b111)
    with pytest.raises(DivisionByZero):
        field_make(3).inv(0)
    with pytest.raises(ZeroDivisionError):
        GF2.div(1, 0)
    with pytest.raises(FieldError):
        field_for_q(6)
    with pytest.raises(FieldError):
        field_arith(GF2, "mul", 2, 1)
    with pytest.raises(FieldError):
        field_arith(GF2, "sqrt", 1)


def test_field_arith_dispatch():
    f = field_make(4)
    assert field_arith(f, "add", 5, 3) == 6
    assert field_arith(f, "mul", 2, 9) == f.mul(2, 9)
    assert field_arith(f, "inv", 7) == f.inv(7)
    assert field_arith(f, "pow", 3, 5) == f.pow(3, 5)
    assert f.pow(3, -1) == f.inv(3)


def test_serialization_and_pickle():
    f = field_make(5)
    assert FieldSpec.from_json(f.to_json()) == f
    g = pickle.loads(pickle.dumps(f))
    assert g == f and g.q == 32
    assert g.mul(7, 9) == f.mul(7, 9)
