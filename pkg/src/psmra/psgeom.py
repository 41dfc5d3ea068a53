"""Pseudo-symplectic spaces over GF(2^k).

The form on GF(q)^(2ν+δ) is S_δ = diag(K, tail) with K = [[0, I], [I, 0]] and
tail = [1] (δ = 1) or [[0, 1], [1, 1]] (δ = 2).  Vectors are indexed e_1..e_N
in the public helpers below, matching the block descriptions used throughout
the scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import DimensionMismatch, GeometryError
from .field import FieldSpec
from .linalg import (
    Matrix,
    Subspace,
    canonicalize,
    contains,
    gram,
    identity,
    is_invertible,
    mat_mul,
    rank,
    transpose,
    unit,
)
from .rng import Rng


@dataclass(frozen=True)
class SpaceSpec:
    field: FieldSpec
    nu: int
    delta: int

    def __post_init__(self):
        if self.delta not in (1, 2):
            raise GeometryError(f"delta must be 1 or 2, got {self.delta}")
        if self.nu < 1:
            raise GeometryError(f"nu must be positive, got {self.nu}")

    @property
    def dim(self) -> int:
        return 2 * self.nu + self.delta

    @cached_property
    def form(self) -> Matrix:
        n, nu = self.dim, self.nu
        s = [[0] * n for _ in range(n)]
        for i in range(nu):
            s[i][nu + i] = s[nu + i][i] = 1
        t = 2 * nu
        if self.delta == 1:
            s[t][t] = 1
        else:
            s[t][t + 1] = s[t + 1][t] = s[t + 1][t + 1] = 1
        return tuple(tuple(r) for r in s)

    def e(self, i: int) -> tuple[int, ...]:
        """Standard basis vector e_i, 1-based."""
        if not 1 <= i <= self.dim:
            raise DimensionMismatch(f"e_{i} outside 1..{self.dim}")
        return unit(self.dim, i - 1)

    @property
    def special_vector(self) -> tuple[int, ...]:
        """e_{2ν+1}, whose membership decides ε."""
        return self.e(2 * self.nu + 1)

    def span(self, *indices: int) -> Subspace:
        """⟨e_i : i in indices⟩ (1-based)."""
        return canonicalize(self.field, [self.e(i) for i in indices], self.dim)

    def subspace(self, rows) -> Subspace:
        return canonicalize(self.field, rows, self.dim)


def build_space(field: FieldSpec, nu: int, delta: int) -> SpaceSpec:
    return SpaceSpec(field, nu, delta)


@dataclass(frozen=True, order=True)
class SubspaceType:
    """Type (m, 2s+τ, s, ε); ``t`` is the Gram rank 2s+τ."""

    m: int
    t: int
    s: int
    tau: int
    eps: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.m, self.t, self.s, self.eps)

    def __str__(self):
        return f"({self.m},{self.t},{self.s},{self.eps})"


def classify(space: SpaceSpec, p: Subspace) -> SubspaceType:
    if p.ambient_dim != space.dim or p.field != space.field:
        raise DimensionMismatch(f"subspace of GF({p.field.q})^{p.ambient_dim} in a {space.dim}-dimensional space")
    g = gram(p, space.form)
    r = rank(space.field, g)
    if not any(g[i][i] for i in range(len(g))):
        tau = 0
    elif r % 2:
        tau = 1
    else:
        tau = 2
    eps = 1 if contains(p, space.special_vector) else 0
    return SubspaceType(p.dim, r, (r - tau) // 2, tau, eps)


def is_group_element(space: SpaceSpec, t: Matrix) -> bool:
    t = tuple(tuple(r) for r in t)
    if len(t) != space.dim or any(len(r) != space.dim for r in t):
        raise DimensionMismatch(f"expected a {space.dim}x{space.dim} matrix")
    f = space.field
    if not is_invertible(f, t):
        return False
    return mat_mul(f, mat_mul(f, t, space.form), transpose(t)) == space.form


def _transvect(field: FieldSpec, m: list[list[int]], nu: int, h: list[int], lam: int):
    # M <- M (I + λ (K h^t) h);  K h^t swaps the two halves of h
    kh = h[nu:2 * nu] + h[:nu]
    mul = field.mul
    for row in m:
        c = 0
        for x, y in zip(row, kh):
            if x and y:
                c ^= mul(x, y)
        if c:
            c = mul(c, lam)
            for j in range(2 * nu):
                if h[j]:
                    row[j] ^= mul(c, h[j])


def random_stabilizing_element(space: SpaceSpec, rng: Rng) -> Matrix:
    """Random product of 10..50 symplectic transvections and hyperbolic-pair
    swaps acting on the first 2ν coordinates; the tail block is the identity,
    so e_{2ν+1} (and e_{2ν+2}) are fixed."""
    f, nu = space.field, space.nu
    m = [list(r) for r in identity(space.dim)]
    for _ in range(rng.between(10, 50)):
        if rng.below(2):
            j = rng.below(nu)
            for row in m:
                row[j], row[nu + j] = row[nu + j], row[j]
        else:
            h = [rng.element(f.q) for _ in range(2 * nu)]
            if not any(h):
                continue
            _transvect(f, m, nu, h, rng.nonzero_element(f.q))
    return tuple(tuple(r) for r in m)
