"""Multi-receiver authentication code on the pseudo-symplectic space
GF(q)^(2ν+2), q = 2^k.

Coordinate blocks (1-based, as used in the docstrings):

    1..n        U                      ν+1..ν+n     pairs with U
    n+1..ν      "R2"/"H3" block        ν+n+1..2ν    "R4"/"H8" block
    2ν+1        special vector         2ν+2

U = ⟨e_1..e_n⟩.  An encoding rule is U + ⟨v_1..v_n⟩ with
v_i = (0 | R2_i | e_i | 0 | R5_i | 0); receiver i holds U + ⟨v_i⟩.  A source
state s satisfies U ⊂ s ⊂ U^⊥ and contains e_{2ν+1}; the broadcast message
is s + e_T and a receiver accepts when its key lies inside the message.

Keys and messages are restricted to these parametrized families (R4 = R6 = 0,
H8 = H10 = 0).  The census module measures how the wider families defined by
subspace type alone compare.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Sequence

from .errors import (
    ConstraintViolation,
    GeometryError,
    MalformedMessage,
    MalformedRule,
    NonBinaryField,
    SamplingExhausted,
    TypeCheckFailed,
)
from .field import FieldSpec, field_for_q
from .linalg import (
    Matrix,
    Subspace,
    canonicalize,
    contains,
    intersect,
    perp,
    rref_rows,
    subspace_sum,
    transpose,
)
from .psgeom import SpaceSpec, SubspaceType, classify
from .rng import Rng

SAMPLING_ATTEMPTS = 10_000
# candidate lifts above this are sampled by rejection rather than enumerated
SAMPLE_ENUM_LIMIT = 1 << 16


@dataclass(frozen=True)
class SchemeParams:
    field: FieldSpec
    nu: int
    n: int
    r: int

    @property
    def q(self) -> int:
        return self.field.q

    def to_json(self) -> dict:
        return {"q": self.q, "field": self.field.to_json(), "nu": self.nu, "n": self.n, "r": self.r}

    def label(self) -> str:
        return f"(q={self.q}, nu={self.nu}, n={self.n}, r={self.r})"


def validate_params(field: FieldSpec | int, nu: int, n: int, r: int) -> SchemeParams:
    """Parameters must satisfy 2 < n+1 < r < ν over a field of characteristic 2."""
    if isinstance(field, int):
        if field < 2 or field & (field - 1):
            raise NonBinaryField(f"q={field} is not a power of 2")
        field = field_for_q(field)
    if not isinstance(field, FieldSpec):
        raise NonBinaryField(f"unsupported field {field!r}")
    if not 2 < n + 1:
        raise ConstraintViolation(f"2 < n+1 fails (n={n})")
    if not n + 1 < r:
        raise ConstraintViolation(f"n+1 < r fails (n={n}, r={r})")
    if not r < nu:
        raise ConstraintViolation(f"r < nu fails (r={r}, nu={nu})")
    return SchemeParams(field, nu, n, r)


@dataclass(frozen=True)
class SchemeContext:
    params: SchemeParams
    space: SpaceSpec
    U: Subspace
    U_perp: Subspace

    @property
    def field(self) -> FieldSpec:
        return self.params.field

    @property
    def dim(self) -> int:
        return self.space.dim

    @cached_property
    def special_index(self) -> int:
        return 2 * self.params.nu  # 0-based column of e_{2ν+1}

    def e(self, i: int) -> tuple[int, ...]:
        return self.space.e(i)

    @property
    def source_type(self) -> tuple[int, int, int, int]:
        n, r = self.params.n, self.params.r
        return (2 * r - n + 1, 2 * (r - n), r - n, 1)

    @property
    def message_type(self) -> tuple[int, int, int, int]:
        r = self.params.r
        return (2 * r + 1, 2 * r, r, 1)

    @property
    def rule_type(self) -> tuple[int, int, int, int]:
        n = self.params.n
        return (2 * n, 2 * n, n, 0)


def setup(params: SchemeParams) -> SchemeContext:
    nu, n = params.nu, params.n
    space = SpaceSpec(params.field, nu, 2)
    U = space.span(*range(1, n + 1))
    U_perp = perp(U, space.form)
    explicit = space.span(*range(1, nu + 1), *range(nu + n + 1, 2 * nu + 3))
    if U_perp != explicit:
        raise GeometryError("computed U-perp disagrees with the explicit basis")
    return SchemeContext(params, space, U, U_perp)


def make_context(q: int, nu: int, n: int, r: int) -> SchemeContext:
    return setup(validate_params(q, nu, n, r))


# -- encoding rules and receiver keys ----------------------------------------------


def _v_row(ctx: SchemeContext, i: int, r2_row: Sequence[int], r5: int) -> tuple[int, ...]:
    """(0^n | R2_i | unit at ν+i | 0 | R5_i | 0), i 1-based."""
    nu, n = ctx.params.nu, ctx.params.n
    v = [0] * ctx.dim
    v[n:nu] = r2_row
    v[nu + i - 1] = 1
    v[2 * nu] = r5
    return tuple(v)


@dataclass(frozen=True)
class EncodingRule:
    R2: Matrix
    R5: tuple[int, ...]
    subspace: Subspace = dc_field(compare=False, repr=False)


@dataclass(frozen=True)
class ReceiverKey:
    index: int
    H3: tuple[int, ...]
    H9: int
    subspace: Subspace = dc_field(compare=False, repr=False)


def make_rule(ctx: SchemeContext, R2: Sequence[Sequence[int]], R5: Sequence[int]) -> EncodingRule:
    nu, n = ctx.params.nu, ctx.params.n
    R2 = tuple(tuple(ctx.field.check(x) for x in row) for row in R2)
    R5 = tuple(ctx.field.check(x) for x in R5)
    if len(R2) != n or any(len(row) != nu - n for row in R2) or len(R5) != n:
        raise MalformedRule(f"R2 must be {n}x{nu - n} and R5 of length {n}")
    rows = [ctx.e(j) for j in range(1, n + 1)]
    rows += [_v_row(ctx, i, R2[i - 1], R5[i - 1]) for i in range(1, n + 1)]
    return EncodingRule(R2, R5, canonicalize(ctx.field, rows, ctx.dim))


def sample_encoding_rule(ctx: SchemeContext, rng: Rng) -> EncodingRule:
    nu, n, q = ctx.params.nu, ctx.params.n, ctx.field.q
    R2 = [[rng.element(q) for _ in range(nu - n)] for _ in range(n)]
    R5 = [rng.element(q) for _ in range(n)]
    return make_rule(ctx, R2, R5)


def _solve_projection(ctx: SchemeContext, sub: Subspace, cols: Sequence[int], target: Sequence[int]):
    """The unique vector of ``sub`` whose coordinates at ``cols`` equal ``target``,
    or None when no such vector exists."""
    f = ctx.field
    basis = sub.rows
    k = len(basis)
    if k == 0:
        return None if any(target) else (0,) * ctx.dim
    # x·P = target  <=>  P^t x^t = target^t
    pt = transpose(tuple(tuple(b[c] for c in cols) for b in basis))
    system = [tuple(row) + (t,) for row, t in zip(pt, target)]
    red, piv = rref_rows(f, system, k + 1)
    if k in piv:
        return None
    x = [0] * k
    for row, p in zip(red, piv):
        x[p] = row[k]
    v = [0] * ctx.dim
    for coef, b in zip(x, basis):
        if coef:
            v = [a ^ f.mul(coef, y) for a, y in zip(v, b)]
    return tuple(v)


def rule_from_subspace(ctx: SchemeContext, sub: Subspace) -> EncodingRule:
    """Recover (R2, R5) from a 2n-dimensional subspace or raise MalformedRule."""
    nu, n = ctx.params.nu, ctx.params.n
    if sub.ambient_dim != ctx.dim or sub.field != ctx.field:
        raise MalformedRule("encoding rule lives in the wrong space")
    if sub.dim != 2 * n or not contains(sub, ctx.U):
        raise MalformedRule(f"encoding rule must be {2 * n}-dimensional and contain U")
    cols = list(range(n)) + list(range(nu, nu + n))
    R2, R5 = [], []
    for i in range(1, n + 1):
        target = [0] * n + [1 if j == i else 0 for j in range(1, n + 1)]
        v = _solve_projection(ctx, sub, cols, target)
        if v is None:
            raise MalformedRule("encoding rule does not pair nondegenerately with U")
        if any(v[nu + n: 2 * nu]) or v[2 * nu + 1]:
            raise MalformedRule("encoding rule has nonzero R4/R6 blocks")
        R2.append(v[n:nu])
        R5.append(v[2 * nu])
    rule = make_rule(ctx, R2, R5)
    if rule.subspace != sub:
        raise MalformedRule("subspace is not spanned by U and its normalized rows")
    return rule


def make_key(ctx: SchemeContext, i: int, H3: Sequence[int], H9: int) -> ReceiverKey:
    n = ctx.params.n
    if not 1 <= i <= n:
        raise MalformedRule(f"receiver index {i} outside 1..{n}")
    H3 = tuple(ctx.field.check(x) for x in H3)
    w = _v_row(ctx, i, H3, ctx.field.check(H9))
    sub = canonicalize(ctx.field, [ctx.e(j) for j in range(1, n + 1)] + [w], ctx.dim)
    return ReceiverKey(i, H3, H9, sub)


def derive_receiver_key(ctx: SchemeContext, e_T: EncodingRule | Subspace, i: int) -> ReceiverKey:
    """Receiver i's key U + ⟨v_i⟩: the only member of its key family inside e_T."""
    if isinstance(e_T, Subspace):
        e_T = rule_from_subspace(ctx, e_T)
    if not 1 <= i <= ctx.params.n:
        raise MalformedRule(f"receiver index {i} outside 1..{ctx.params.n}")
    return make_key(ctx, i, e_T.R2[i - 1], e_T.R5[i - 1])


def key_from_subspace(ctx: SchemeContext, i: int, sub: Subspace) -> ReceiverKey:
    nu, n = ctx.params.nu, ctx.params.n
    if sub.ambient_dim != ctx.dim or sub.field != ctx.field or sub.dim != n + 1 or not contains(sub, ctx.U):
        raise MalformedRule("receiver key must be an (n+1)-dimensional subspace containing U")
    v = _solve_projection(ctx, sub, list(range(n)) + [nu + i - 1], [0] * n + [1])
    if v is None:
        raise MalformedRule(f"key does not pair with e_{i}")
    key = make_key(ctx, i, v[n:nu], v[2 * nu])
    if key.subspace != sub:
        raise MalformedRule("receiver key has nonzero H8/H10 blocks or wrong orthogonality")
    return key


# -- source states -----------------------------------------------------------------


@dataclass(frozen=True)
class SourceState:
    subspace: Subspace

    def Q(self, ctx: SchemeContext) -> Matrix:
        """Basis rows of s that are neither in U nor equal to e_{2ν+1}."""
        n = ctx.params.n
        keep = [r for r, p in zip(self.subspace.rows, self.subspace.pivots) if p >= n and p != ctx.special_index]
        return tuple(keep)


@dataclass(frozen=True)
class Message:
    subspace: Subspace


def quotient_columns(ctx: SchemeContext) -> list[int]:
    """0-based ambient columns of U^⊥ / (U + ⟨e_{2ν+1}⟩): R2 block, R4 block, e_{2ν+2}."""
    nu, n = ctx.params.nu, ctx.params.n
    return list(range(n, nu)) + list(range(nu + n, 2 * nu)) + [2 * nu + 1]


def lift_source(ctx: SchemeContext, q_rows: Sequence[Sequence[int]]) -> Subspace:
    """U + ⟨Q⟩ + ⟨e_{2ν+1}⟩ for rows given in ambient coordinates."""
    n = ctx.params.n
    rows = [ctx.e(j) for j in range(1, n + 1)] + [tuple(r) for r in q_rows] + [ctx.space.special_vector]
    return canonicalize(ctx.field, rows, ctx.dim)


def canonical_source_state(ctx: SchemeContext) -> SourceState:
    """Q = ⟨e_{n+j}, e_{ν+n+j} : j = 1..r-n⟩ (hyperbolic pairs)."""
    nu, n, r = ctx.params.nu, ctx.params.n, ctx.params.r
    q_rows = [ctx.e(n + j) for j in range(1, r - n + 1)] + [ctx.e(nu + n + j) for j in range(1, r - n + 1)]
    return SourceState(lift_source(ctx, q_rows))


def zero_rule(ctx: SchemeContext) -> EncodingRule:
    nu, n = ctx.params.nu, ctx.params.n
    return make_rule(ctx, [[0] * (nu - n)] * n, [0] * n)


def canonical_message(ctx: SchemeContext) -> Message:
    return encode(ctx, canonical_source_state(ctx), zero_rule(ctx))


def is_source_state(ctx: SchemeContext, sub: Subspace) -> bool:
    if not (contains(sub, ctx.U) and contains(ctx.U_perp, sub)):
        return False
    t = classify(ctx.space, sub)
    return t.as_tuple() == ctx.source_type and t.tau == 0


def sample_source_state(ctx: SchemeContext, rng: Rng, attempts: int = SAMPLING_ATTEMPTS) -> SourceState:
    """Uniform over the enumerated source states when that list is small
    enough to build, rejection sampling over (B2 | B4) blocks otherwise."""
    from . import census

    nu, n, r, q = ctx.params.nu, ctx.params.n, ctx.params.r, ctx.field.q
    if census.source_candidate_count(ctx) <= SAMPLE_ENUM_LIMIT:
        states = census.enumerate_source_states(ctx)
        return states[rng.below(len(states))]
    k = 2 * (r - n)
    cols = list(range(n, nu)) + list(range(nu + n, 2 * nu))
    want = (k, k, r - n, 0)
    for _ in range(attempts):
        rows = []
        for _ in range(k):
            v = [0] * ctx.dim
            for c in cols:
                v[c] = rng.element(q)
            rows.append(tuple(v))
        qspan = canonicalize(ctx.field, rows, ctx.dim)
        if qspan.dim != k:
            continue
        t = classify(ctx.space, qspan)
        if t.as_tuple() == want and t.tau == 0:
            return SourceState(lift_source(ctx, rows))
    raise SamplingExhausted(f"no source state after {attempts} attempts")


# -- broadcast and verification ----------------------------------------------------


def encode(ctx: SchemeContext, s: SourceState, e_T: EncodingRule) -> Message:
    m = subspace_sum(s.subspace, e_T.subspace)
    t = classify(ctx.space, m)
    if t.as_tuple() != ctx.message_type or t.tau != 0 or not contains(m, ctx.U):
        raise TypeCheckFailed(f"s + e_T has type {t}, expected {ctx.message_type}")
    return Message(m)


def check_message(ctx: SchemeContext, m: Message | Subspace) -> Subspace:
    sub = m.subspace if isinstance(m, Message) else m
    if sub.ambient_dim != ctx.dim or sub.field != ctx.field:
        raise MalformedMessage("message lives in the wrong space")
    if sub.dim != 2 * ctx.params.r + 1:
        raise MalformedMessage(f"message has dimension {sub.dim}, expected {2 * ctx.params.r + 1}")
    if not contains(sub, ctx.U):
        raise MalformedMessage("message does not contain U")
    t = classify(ctx.space, sub)
    if t.as_tuple() != ctx.message_type or t.tau != 0:
        raise MalformedMessage(f"message has type {t}, expected {ctx.message_type}")
    return sub


def verify(ctx: SchemeContext, m: Message | Subspace, key: ReceiverKey) -> bool:
    """Accept iff the receiver's key is contained in the message."""
    sub = check_message(ctx, m)
    return contains(sub, key.subspace)


def decode(ctx: SchemeContext, m: Message | Subspace) -> SourceState:
    sub = check_message(ctx, m)
    s = intersect(sub, ctx.U_perp)
    if not is_source_state(ctx, s):
        raise MalformedMessage(f"m ∩ U^⊥ has type {classify(ctx.space, s)}, not a source state")
    return SourceState(s)


def message_type(ctx: SchemeContext, sub: Subspace) -> SubspaceType:
    return classify(ctx.space, sub)
