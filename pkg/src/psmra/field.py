"""Arithmetic in GF(2^k), 1 <= k <= 16.

Elements are plain ints whose bit i is the coefficient of x^i in the residue
polynomial.  Addition is XOR; multiplication is a carry-less product reduced
modulo the field polynomial.  Every field also carries log/antilog tables so
the hot paths in linear algebra stay cheap; ``mul_direct`` is kept as the
table-free reference.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

from .errors import DivisionByZero, FieldError, ReduciblePolynomial

MAX_K = 16

# Pinned defaults; serialized keys and messages depend on these never changing.
DEFAULT_POLYS: dict[int, int] = {
    1: 0b10,                  # x
    2: 0b111,                 # x^2 + x + 1
    3: 0b1011,                # x^3 + x + 1
    4: 0b10011,               # x^4 + x + 1
    5: 0b100101,              # x^5 + x^2 + 1
    6: 0b1000011,             # x^6 + x + 1
    7: 0b10000011,            # x^7 + x + 1
    8: 0b100011011,           # x^8 + x^4 + x^3 + x + 1
    9: 0x211,                 # x^9 + x^4 + 1
    10: 0x409,                # x^10 + x^3 + 1
    11: 0x805,                # x^11 + x^2 + 1
    12: 0x1053,               # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,               # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,               # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,               # x^15 + x + 1
    16: 0x1002B,              # x^16 + x^5 + x^3 + x + 1
}


def clmul(a: int, b: int) -> int:
    """Carry-less (GF(2)[x]) product of two bit-coded polynomials."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def poly_mod(a: int, m: int) -> int:
    """Remainder of a modulo m in GF(2)[x]."""
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for p in range(1 << d, 1 << (d + 1)):
            if poly_mod(poly, p) == 0:
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^k) defined by a bit-coded irreducible polynomial of degree k."""

    k: int
    poly: int
    q: int = dc_field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.k, int) or not 1 <= self.k <= MAX_K:
            raise FieldError(f"extension degree k={self.k} outside 1..{MAX_K}")
        if self.poly.bit_length() - 1 != self.k:
            raise FieldError(
                f"polynomial {self.poly:#x} has degree {self.poly.bit_length() - 1}, expected {self.k}"
            )
        if not is_irreducible(self.poly):
            raise ReduciblePolynomial(f"polynomial {self.poly:#x} is reducible over GF(2)")
        object.__setattr__(self, "q", 1 << self.k)

    def __reduce__(self):
        return (FieldSpec, (self.k, self.poly))

    # -- tables -----------------------------------------------------------

    @cached_property
    def _tables(self) -> tuple[list[int], list[int]]:
        q = self.q
        if q == 2:
            return [1, 1], [0, 0]
        # find a generator of the multiplicative group; x itself need not be primitive
        order = q - 1
        primes = [p for p in range(2, order + 1) if order % p == 0 and all(p % d for d in range(2, int(p**0.5) + 1))]
        for g in range(2, q):
            if all(self.pow_direct(g, order // p) != 1 for p in primes):
                break
        exp = [0] * (2 * order)
        log = [0] * q
        x = 1
        for i in range(order):
            exp[i] = exp[i + order] = x
            log[x] = i
            x = self.mul_direct(x, g)
        return exp, log

    # -- arithmetic -------------------------------------------------------

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise FieldError(f"{a} is not an element of GF({self.q})")
        return a

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul_direct(self, a: int, b: int) -> int:
        return poly_mod(clmul(a, b), self.poly)

    def pow_direct(self, a: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self.mul_direct(r, a)
            a = self.mul_direct(a, a)
            e >>= 1
        return r

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.q == 2:
            return 1
        exp, log = self._tables
        return exp[log[a] + log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of 0")
        if self.q == 2:
            return 1
        exp, log = self._tables
        return exp[(self.q - 1 - log[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if e == 0:
            return 1
        if a == 0:
            return 0
        if self.q == 2:
            return 1
        exp, log = self._tables
        return exp[(log[a] * e) % (self.q - 1)]

    def elements(self) -> range:
        return range(self.q)

    def to_json(self) -> dict:
        return {"k": self.k, "poly": self.poly}

    @classmethod
    def from_json(cls, obj: dict) -> "FieldSpec":
        return cls(int(obj["k"]), int(obj["poly"]))


def field_make(k: int, poly: int | str | None = "default") -> FieldSpec:
    """Build GF(2^k); ``poly`` defaults to the pinned table entry."""
    if not isinstance(k, int) or not 1 <= k <= MAX_K:
        raise FieldError(f"extension degree k={k} outside 1..{MAX_K}")
    if poly is None or poly == "default":
        poly = DEFAULT_POLYS[k]
    return FieldSpec(k, int(poly))


def field_for_q(q: int) -> FieldSpec:
    """Default-polynomial field with q elements; q must be 2^k."""
    if q < 2 or q & (q - 1):
        raise FieldError(f"q={q} is not a power of 2")
    return field_make(q.bit_length() - 1)


def field_arith(spec: FieldSpec, op: str, a: int, b: int | None = None) -> int:
    """Dispatch form of the arithmetic: op in {add, mul, inv, pow}."""
    spec.check(a)
    if op == "add":
        return spec.add(a, spec.check(b))
    if op == "mul":
        return spec.mul(a, spec.check(b))
    if op == "inv":
        return spec.inv(a)
    if op == "pow":
        return spec.pow(a, int(b))
    raise FieldError(f"unknown field operation {op!r}")


GF2 = field_make(1)
