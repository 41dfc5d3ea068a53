"""Vectors, matrices and canonical subspaces over GF(q).

A subspace is stored as the reduced row-echelon form of any spanning set,
pivot columns ascending, zero rows dropped.  Two backends share one contract:

* q = 2: each row is an int with bit j = coordinate j, so the pivot of a row
  is its lowest set bit and row operations are single XORs;
* q > 2: rows are tuples of field elements.

Coordinates are 0-based here; the geometry layer talks about e_1..e_N.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

from .errors import DimensionMismatch
from .field import FieldSpec

Vector = tuple[int, ...]
Matrix = tuple[Vector, ...]


# -- bit-packed GF(2) kernel -----------------------------------------------------


def vec_to_word(v: Sequence[int]) -> int:
    w = 0
    for j, x in enumerate(v):
        if x:
            w |= 1 << j
    return w


def word_to_vec(w: int, n: int) -> Vector:
    return tuple((w >> j) & 1 for j in range(n))


def rref_words(words: Iterable[int]) -> tuple[int, ...]:
    """Canonical RREF of a GF(2) span; rows ordered by pivot (lowest bit)."""
    basis: list[int] = []
    for v in words:
        for b in basis:
            if v & (b & -b):
                v ^= b
        if v:
            p = v & -v
            basis = [b ^ v if b & p else b for b in basis]
            basis.append(v)
    basis.sort(key=lambda b: b & -b)
    return tuple(basis)


def reduce_word(v: int, basis: Sequence[int]) -> int:
    """Residue of v against a fully reduced basis (zero iff v is in the span)."""
    for b in basis:
        if v & (b & -b):
            v ^= b
    return v


def extend_words(basis: tuple[int, ...], words: Iterable[int]) -> tuple[int, ...]:
    """RREF of span(basis + words) where ``basis`` is already canonical."""
    basis = list(basis)
    grew = False
    for v in words:
        for b in basis:
            if v & (b & -b):
                v ^= b
        if v:
            p = v & -v
            basis = [b ^ v if b & p else b for b in basis]
            basis.append(v)
            grew = True
    if grew:
        basis.sort(key=lambda b: b & -b)
    return tuple(basis)


def intersect_words(a: Sequence[int], b: Sequence[int], n: int) -> tuple[int, ...]:
    """Zassenhaus: reduce rows (x | x) for x in A and (y | 0) for y in B."""
    mask = (1 << n) - 1
    rows = [x | (x << n) for x in a] + list(b)
    return rref_words(r >> n for r in rref_words(rows) if not r & mask)


# -- generic GF(q) kernel ---------------------------------------------------------


def rref_rows(field: FieldSpec, rows: Iterable[Sequence[int]], ncols: int) -> tuple[Matrix, list[int]]:
    """Gauss-Jordan elimination; returns (nonzero RREF rows, pivot columns)."""
    m = [list(r) for r in rows]
    mul, inv = field.mul, field.inv
    pivots: list[int] = []
    top = 0
    for c in range(ncols):
        if top == len(m):
            break
        piv = next((i for i in range(top, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[top], m[piv] = m[piv], m[top]
        lead = m[top][c]
        if lead != 1:
            s = inv(lead)
            m[top] = [mul(s, x) for x in m[top]]
        pr = m[top]
        for i in range(len(m)):
            f = m[i][c]
            if i != top and f:
                m[i] = [x ^ mul(f, y) for x, y in zip(m[i], pr)]
        pivots.append(c)
        top += 1
    return tuple(tuple(r) for r in m[:top]), pivots


def _check_ragged(rows: Sequence[Sequence[int]], n: int | None) -> int:
    lengths = {len(r) for r in rows}
    if n is not None:
        lengths.add(n)
    if len(lengths) > 1:
        raise DimensionMismatch(f"rows of differing lengths {sorted(lengths)}")
    if not lengths:
        raise DimensionMismatch("cannot infer ambient dimension from no rows")
    return lengths.pop()


class Subspace:
    """Immutable subspace of GF(q)^n, stored canonically.

    Equality and hashing compare the canonical basis, so any two spanning
    sets of the same space produce equal objects.
    """

    __slots__ = ("field", "ambient_dim", "_key")

    def __init__(self, field: FieldSpec, ambient_dim: int, key: tuple):
        # use canonicalize()/from_words(); this trusts ``key`` to be canonical
        self.field = field
        self.ambient_dim = ambient_dim
        self._key = key

    @classmethod
    def from_words(cls, field: FieldSpec, n: int, words: Iterable[int]) -> "Subspace":
        return cls(field, n, rref_words(words))

    @property
    def binary(self) -> bool:
        return self.field.q == 2

    @property
    def dim(self) -> int:
        return len(self._key)

    @property
    def words(self) -> tuple[int, ...]:
        if not self.binary:
            raise TypeError("bit-packed rows exist only over GF(2)")
        return self._key

    @property
    def rows(self) -> Matrix:
        if self.binary:
            return tuple(word_to_vec(w, self.ambient_dim) for w in self._key)
        return self._key

    @property
    def pivots(self) -> list[int]:
        if self.binary:
            return [(w & -w).bit_length() - 1 for w in self._key]
        return [next(j for j, x in enumerate(r) if x) for r in self._key]

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.ambient_dim == other.ambient_dim
            and self.field == other.field
            and self._key == other._key
        )

    def __hash__(self):
        return hash((self.ambient_dim, self.field.q, self._key))

    def __lt__(self, other: "Subspace"):
        return self.rows < other.rows

    def __repr__(self):
        return f"Subspace(GF({self.field.q})^{self.ambient_dim}, dim={self.dim}, rows={[list(r) for r in self.rows]})"

    def __reduce__(self):
        return (Subspace, (self.field, self.ambient_dim, self._key))

    def __len__(self):
        return self.dim

    def __iter__(self):
        return iter(self.rows)


def canonicalize(field: FieldSpec, rows: Iterable[Sequence[int]], ambient_dim: int | None = None) -> Subspace:
    """RREF of the row span.  ``ambient_dim`` is required when ``rows`` is empty."""
    rows = [tuple(r) for r in rows]
    n = _check_ragged(rows, ambient_dim)
    for r in rows:
        for x in r:
            field.check(x)
    if field.q == 2:
        return Subspace(field, n, rref_words(vec_to_word(r) for r in rows))
    key, _ = rref_rows(field, rows, n)
    return Subspace(field, n, key)


def canonicalize_generic(field: FieldSpec, rows: Iterable[Sequence[int]], ambient_dim: int | None = None) -> Matrix:
    """RREF through the element-array backend regardless of q (cross-check path)."""
    rows = [tuple(r) for r in rows]
    n = _check_ragged(rows, ambient_dim)
    key, _ = rref_rows(field, rows, n)
    return key


def zero_space(field: FieldSpec, n: int) -> Subspace:
    return Subspace(field, n, ())


def full_space(field: FieldSpec, n: int) -> Subspace:
    return span_units(field, n, range(n))


def unit(n: int, j: int) -> Vector:
    """Standard basis vector with a 1 at 0-based position j."""
    v = [0] * n
    v[j] = 1
    return tuple(v)


def span_units(field: FieldSpec, n: int, positions: Iterable[int]) -> Subspace:
    return canonicalize(field, [unit(n, j) for j in positions], n)


def _same_ambient(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim or a.field != b.field:
        raise DimensionMismatch(
            f"subspaces live in GF({a.field.q})^{a.ambient_dim} and GF({b.field.q})^{b.ambient_dim}"
        )


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    _same_ambient(a, b)
    if a.binary:
        return Subspace(a.field, a.ambient_dim, extend_words(a._key, b._key))
    key, _ = rref_rows(a.field, a._key + b._key, a.ambient_dim)
    return Subspace(a.field, a.ambient_dim, key)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """A ∩ B via the Zassenhaus block reduction."""
    _same_ambient(a, b)
    n = a.ambient_dim
    if a.binary:
        return Subspace(a.field, n, intersect_words(a._key, b._key, n))
    zero = (0,) * n
    rows = [r + r for r in a._key] + [r + zero for r in b._key]
    red, _ = rref_rows(a.field, rows, 2 * n)
    inter = [r[n:] for r in red if not any(r[:n])]
    key, _ = rref_rows(a.field, inter, n)
    return Subspace(a.field, n, key)


def _reduce_row(field: FieldSpec, v: Sequence[int], basis: Matrix) -> list[int]:
    v = list(v)
    for r in basis:
        p = next(j for j, x in enumerate(r) if x)
        f = v[p]
        if f:
            v = [x ^ field.mul(f, y) for x, y in zip(v, r)]
    return v


def contains(a: Subspace, x) -> bool:
    """True iff the vector or every basis row of the subspace ``x`` lies in A."""
    if isinstance(x, Subspace):
        _same_ambient(a, x)
        if x.dim > a.dim:
            return False
        if a.binary:
            return all(reduce_word(w, a._key) == 0 for w in x._key)
        return all(not any(_reduce_row(a.field, r, a._key)) for r in x._key)
    x = tuple(x)
    if len(x) != a.ambient_dim:
        raise DimensionMismatch(f"vector of length {len(x)} in ambient dimension {a.ambient_dim}")
    if a.binary:
        return reduce_word(vec_to_word(x), a._key) == 0
    return not any(_reduce_row(a.field, x, a._key))


# -- matrices ---------------------------------------------------------------------


def as_matrix(m: Iterable[Sequence[int]]) -> Matrix:
    return tuple(tuple(int(x) for x in r) for r in m)


def identity(n: int) -> Matrix:
    return tuple(unit(n, j) for j in range(n))


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def mat_mul(field: FieldSpec, a: Matrix, b: Matrix) -> Matrix:
    if a and len(a[0]) != len(b):
        raise DimensionMismatch(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0]) if b else 0}")
    mul = field.mul
    bt = transpose(b)
    out = []
    for r in a:
        row = []
        for c in bt:
            s = 0
            for x, y in zip(r, c):
                if x and y:
                    s ^= mul(x, y)
            row.append(s)
        out.append(tuple(row))
    return tuple(out)


def vec_mat(field: FieldSpec, v: Sequence[int], m: Matrix) -> Vector:
    return mat_mul(field, (tuple(v),), m)[0]


def rank(field: FieldSpec, m: Matrix) -> int:
    if not m:
        return 0
    if field.q == 2:
        return len(rref_words(vec_to_word(r) for r in m))
    return len(rref_rows(field, m, len(m[0]))[1])


def is_invertible(field: FieldSpec, m: Matrix) -> bool:
    return len(m) > 0 and all(len(r) == len(m) for r in m) and rank(field, m) == len(m)


def nullspace(field: FieldSpec, m: Matrix, ncols: int) -> Matrix:
    """Basis of {x : M x^t = 0}."""
    red, pivots = rref_rows(field, m, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [0] * ncols
        x[f] = 1
        for r, p in zip(red, pivots):
            # char 2: -r[f] == r[f]
            x[p] = r[f]
        basis.append(tuple(x))
    return tuple(basis)


@lru_cache(maxsize=64)
def _form_words(form: Matrix) -> tuple[int, ...]:
    return tuple(vec_to_word(r) for r in form)


def _apply_form_word(fw: tuple[int, ...], x: int) -> int:
    out = 0
    j = 0
    while x:
        if x & 1:
            out ^= fw[j]
        x >>= 1
        j += 1
    return out


def gram(p: Subspace, form: Matrix) -> Matrix:
    """G = P S P^t for the canonical basis P of ``p``."""
    if len(form) != p.ambient_dim:
        raise DimensionMismatch(f"form of size {len(form)} on ambient dimension {p.ambient_dim}")
    if p.binary:
        fw = _form_words(form)
        images = [_apply_form_word(fw, x) for x in p._key]
        return tuple(tuple((xs & y).bit_count() & 1 for y in p._key) for xs in images)
    rows = p._key
    return mat_mul(p.field, mat_mul(p.field, rows, form), transpose(rows))


def bilinear(field: FieldSpec, x: Sequence[int], form: Matrix, y: Sequence[int]) -> int:
    return mat_mul(field, mat_mul(field, (tuple(x),), form), transpose((tuple(y),)))[0][0]


def perp(p: Subspace, form: Matrix) -> Subspace:
    """{y : y S x^t = 0 for all x in P}, i.e. the null space of P S."""
    n = p.ambient_dim
    if len(form) != n:
        raise DimensionMismatch(f"form of size {len(form)} on ambient dimension {n}")
    if p.dim == 0:
        return full_space(p.field, n)
    ps = mat_mul(p.field, p.rows, form)
    return canonicalize(p.field, nullspace(p.field, ps, n), n)


def transform(p: Subspace, t: Matrix) -> Subspace:
    """Image P·T of a subspace under the right action of a matrix."""
    if len(t) != p.ambient_dim:
        raise DimensionMismatch(f"matrix of size {len(t)} on ambient dimension {p.ambient_dim}")
    if p.dim == 0:
        return p
    return canonicalize(p.field, mat_mul(p.field, p.rows, t), p.ambient_dim)
