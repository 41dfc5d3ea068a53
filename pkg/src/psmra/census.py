"""Exhaustive enumeration of the scheme's families and exact attack odds.

Everything here is exact: counts are ints, probabilities are Fractions.  Work
is capped by a single budget (estimated subspace visits, default 2^24); an
estimate over budget raises BudgetExceeded before anything is materialized.

Two probability semantics are computed side by side:

* model "B" counts whole encoding rules, exactly as a ratio of rule counts;
* model "A" is operational: a forged message succeeds when receiver i's
  derived key lies inside it.

Two evaluation paths exist for the attacks.  The oracle path builds full
containment tables over every message and literally maximizes over all
(m, m') pairs.  The fast path enumerates the messages containing a rule as
s' + e_T over source states s' and may reduce the search by symmetry:

* coalition reduction: the translations e_{ν+j} -> e_{ν+j} + a_j + c_j e_{2ν+1}
  (with compensating shifts by U) preserve the form, fix every source state
  and act simply transitively on encoding rules, so one coalition view per
  coalition suffices;
* per-source reduction: for the same reason every message is equivalent to
  s + e_T0 for the zero rule e_T0, one per source state;
* canonical reduction: a single canonical message.  This one is NOT exact;
  messages fall into several orbits and it only yields a lower bound.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, EmptyCoalition, MRAError
from .field import FieldSpec
from .linalg import Subspace, canonicalize, contains, intersect, subspace_sum
from .mracode import (
    EncodingRule,
    Message,
    ReceiverKey,
    SchemeContext,
    SchemeParams,
    SourceState,
    canonical_message,
    decode,
    derive_receiver_key,
    encode,
    is_source_state,
    lift_source,
    make_key,
    make_rule,
    quotient_columns,
    setup,
    zero_rule,
)
from .psgeom import classify

DEFAULT_BUDGET = 1 << 24

_cache: dict[tuple, object] = {}


def _cached(key: tuple, build):
    if key not in _cache:
        _cache[key] = build()
    return _cache[key]


def clear_cache():
    _cache.clear()


def require(what: str, estimate: int, budget: int):
    if estimate > budget:
        raise BudgetExceeded(what, estimate, budget)


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def iter_rref(field: FieldSpec, ncols: int, k: int) -> Iterable[tuple[tuple[int, ...], ...]]:
    """Every k-dimensional subspace of GF(q)^ncols, once, as its RREF rows."""
    q = field.q
    for pivots in combinations(range(ncols), k):
        pset = set(pivots)
        free = [(i, c) for i, p in enumerate(pivots) for c in range(p + 1, ncols) if c not in pset]
        for values in product(range(q), repeat=len(free)):
            rows = [[0] * ncols for _ in range(k)]
            for i, p in enumerate(pivots):
                rows[i][p] = 1
            for (i, c), x in zip(free, values):
                rows[i][c] = x
            yield tuple(tuple(r) for r in rows)


# -- families ------------------------------------------------------------------------


def encoding_rule_count(ctx: SchemeContext) -> int:
    p = ctx.params
    return p.q ** (p.n * (p.nu - p.n + 1))


def enumerate_encoding_rules(ctx: SchemeContext, budget: int = DEFAULT_BUDGET) -> list[EncodingRule]:
    """All (R2, R5) pairs, lexicographic; index 0 is the zero rule."""
    p = ctx.params
    require("encoding rules", encoding_rule_count(ctx), budget)

    def build():
        w = p.nu - p.n
        out = []
        for vals in product(range(p.q), repeat=p.n * (w + 1)):
            R2 = [vals[i * w:(i + 1) * w] for i in range(p.n)]
            out.append(make_rule(ctx, R2, vals[p.n * w:]))
        return out

    return _cached(("rules", p), build)


def enumerate_receiver_keys(ctx: SchemeContext, i: int, budget: int = DEFAULT_BUDGET) -> list[ReceiverKey]:
    p = ctx.params
    w = p.nu - p.n
    require("receiver keys", p.q ** (w + 1), budget)
    return _cached(
        ("keys", p, i),
        lambda: [make_key(ctx, i, vals[:w], vals[w]) for vals in product(range(p.q), repeat=w + 1)],
    )


def source_candidate_count(ctx: SchemeContext) -> int:
    p = ctx.params
    return gaussian_binomial(2 * (p.nu - p.n) + 1, 2 * (p.r - p.n), p.q)


def enumerate_source_states(ctx: SchemeContext, budget: int = DEFAULT_BUDGET) -> list[SourceState]:
    """Lift every 2(r-n)-dimensional subspace of U^⊥/(U + ⟨e_{2ν+1}⟩) and keep
    the lifts of source-state type."""
    p = ctx.params
    require("source-state candidate lifts", source_candidate_count(ctx), budget)

    def build():
        cols = quotient_columns(ctx)
        out = []
        for rows in iter_rref(ctx.field, len(cols), 2 * (p.r - p.n)):
            amb = []
            for row in rows:
                v = [0] * ctx.dim
                for c, x in zip(cols, row):
                    v[c] = x
                amb.append(v)
            s = lift_source(ctx, amb)
            if is_source_state(ctx, s):
                out.append(SourceState(s))
        out.sort(key=lambda st: st.subspace.rows)
        return out

    return _cached(("sources", p), build)


def rule_keys(ctx: SchemeContext, budget: int = DEFAULT_BUDGET) -> list[tuple[Subspace, ...]]:
    """Per rule (same order as enumerate_encoding_rules): the n derived key subspaces."""
    rules = enumerate_encoding_rules(ctx, budget)
    n = ctx.params.n
    return _cached(
        ("rule_keys", ctx.params),
        lambda: [tuple(derive_receiver_key(ctx, e, i).subspace for i in range(1, n + 1)) for e in rules],
    )


def coalition_key(keys: tuple[Subspace, ...], L: Sequence[int]) -> tuple[Subspace, ...]:
    return tuple(keys[j - 1] for j in L)


# -- product pass: messages, multiplicities, round trips -----------------------------


@dataclass
class ProductCensus:
    """Outcome of the full s x e_T product loop."""

    multiplicity: dict[Subspace, int]
    pairs: int
    roundtrip_failures: int = 0
    verify_failures: int = 0
    roundtrip_checked: bool = False

    @property
    def messages(self) -> list[Message]:
        return [Message(m) for m in sorted(self.multiplicity, key=_order)]


def _order(sub: Subspace):
    return sub._key


_worker_ctx: dict[SchemeParams, SchemeContext] = {}


def _product_block(params: SchemeParams, lo: int, hi: int, roundtrip: bool):
    ctx = _worker_ctx.get(params)
    if ctx is None:
        ctx = _worker_ctx[params] = setup(params)
    sources = enumerate_source_states(ctx)
    rules = enumerate_encoding_rules(ctx)
    keys = None
    if roundtrip:
        keys = [[derive_receiver_key(ctx, e, i) for i in range(1, ctx.params.n + 1)] for e in rules]
    mult: Counter = Counter()
    decoded: dict[Subspace, SourceState] = {}
    rt_fail = ver_fail = 0
    for s in sources[lo:hi]:
        for idx, e in enumerate(rules):
            if roundtrip:
                m = encode(ctx, s, e)
                # decode runs the full well-formedness check; both it and the
                # check are pure in m, so each distinct message is checked once
                got = decoded.get(m.subspace)
                if got is None:
                    got = decoded[m.subspace] = decode(ctx, m)
                if got != s:
                    rt_fail += 1
                if not all(contains(m.subspace, k.subspace) for k in keys[idx]):
                    ver_fail += 1
                mult[m.subspace] += 1
            else:
                mult[subspace_sum(s.subspace, e.subspace)] += 1
    return mult, rt_fail, ver_fail


def _blocks(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    step = -(-total // parts)
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def product_census(
    ctx: SchemeContext, *, roundtrip: bool = False, threads: int = 1, budget: int = DEFAULT_BUDGET
) -> ProductCensus:
    """Form every s + e_T.  With ``roundtrip`` each message is also decoded and
    checked against all n derived keys.  Aggregation is order-independent, so
    the result does not depend on ``threads``."""
    sources = enumerate_source_states(ctx, budget)
    rules = enumerate_encoding_rules(ctx, budget)
    pairs = len(sources) * len(rules)
    require("s x e_T product loop", pairs * (1 + ctx.params.n if roundtrip else 1), budget)
    key = ("product", ctx.params, roundtrip)
    if key in _cache:
        return _cache[key]
    if threads <= 1:
        parts = [_product_block(ctx.params, 0, len(sources), roundtrip)]
    else:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            futs = [ex.submit(_product_block, ctx.params, lo, hi, roundtrip) for lo, hi in _blocks(len(sources), 4 * threads)]
            parts = [f.result() for f in futs]
    mult: Counter = Counter()
    rt = vf = 0
    for c, a, b in parts:
        mult.update(c)
        rt += a
        vf += b
    out = ProductCensus(dict(mult), pairs, rt, vf, roundtrip)
    _cache[key] = out
    if roundtrip:
        _cache.setdefault(("product", ctx.params, False), out)
    return out


def enumerate_messages(ctx: SchemeContext, budget: int = DEFAULT_BUDGET, threads: int = 1) -> list[Message]:
    """Distinct messages s + e_T, sorted canonically."""
    return product_census(ctx, threads=threads, budget=budget).messages


def message_multiplicities(ctx: SchemeContext, budget: int = DEFAULT_BUDGET, threads: int = 1) -> dict[Subspace, int]:
    return product_census(ctx, threads=threads, budget=budget).multiplicity


def source_representatives(ctx: SchemeContext, budget: int = DEFAULT_BUDGET) -> list[tuple[SourceState, Message]]:
    """One message s + e_T0 per source state (e_T0 = zero rule)."""
    e0 = zero_rule(ctx)
    return [(s, encode(ctx, s, e0)) for s in enumerate_source_states(ctx, budget)]


# -- constrained counts --------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintSet:
    """Rules inside every ``within`` subspace and containing every ``contain`` one."""

    within: tuple[Subspace, ...] = ()
    contain: tuple[Subspace, ...] = ()

    def __post_init__(self):
        for attr in ("within", "contain"):
            val = getattr(self, attr)
            if isinstance(val, Subspace):
                object.__setattr__(self, attr, (val,))
            else:
                object.__setattr__(self, attr, tuple(val))
        dims = {s.ambient_dim for s in self.within + self.contain}
        if len(dims) > 1:
            raise DimensionMismatch("constraint subspaces live in different spaces")

    def admits(self, rule: Subspace) -> bool:
        return all(contains(w, rule) for w in self.within) and all(contains(rule, c) for c in self.contain)


def count_encoding_rules(ctx: SchemeContext, constraints: ConstraintSet, budget: int = DEFAULT_BUDGET) -> int:
    rules = enumerate_encoding_rules(ctx, budget)
    return sum(1 for e in rules if constraints.admits(e.subspace))


def rules_within(ctx: SchemeContext, m: Subspace, budget: int = DEFAULT_BUDGET) -> list[int]:
    """Indices of the encoding rules contained in ``m``."""
    rules = enumerate_encoding_rules(ctx, budget)
    return [idx for idx, e in enumerate(rules) if contains(m, e.subspace)]


@dataclass(frozen=True)
class CoalitionView:
    L: tuple[int, ...]
    keys: tuple[ReceiverKey, ...]

    @property
    def l(self) -> int:
        return len(self.L)

    @property
    def subspaces(self) -> tuple[Subspace, ...]:
        return tuple(k.subspace for k in self.keys)


def coalition_view(ctx: SchemeContext, e_T: EncodingRule, L: Iterable[int]) -> CoalitionView:
    L = tuple(sorted(set(L)))
    if not L:
        raise EmptyCoalition("coalition must have at least one member")
    if len(L) > ctx.params.n - 1:
        raise MRAError(f"coalition size {len(L)} exceeds n-1 = {ctx.params.n - 1}")
    return CoalitionView(L, tuple(derive_receiver_key(ctx, e_T, j) for j in L))


def _check_attack(ctx: SchemeContext, i: int, L: Iterable[int]) -> tuple[int, ...]:
    L = tuple(sorted(set(L)))
    n = ctx.params.n
    if not L:
        raise EmptyCoalition("coalition must have at least one member")
    if not 1 <= i <= n or any(not 1 <= j <= n for j in L):
        raise MRAError(f"receiver indices must lie in 1..{n}")
    if i in L:
        raise MRAError(f"target {i} belongs to the coalition {list(L)}")
    return L


def _group(indices: Iterable[int], keyf) -> dict:
    groups: dict = defaultdict(list)
    for idx in indices:
        groups[keyf(idx)].append(idx)
    return groups


# -- containment tables (oracle path) -------------------------------------------------


def _incidence(messages: Sequence[Subspace], items: Sequence[Subspace]) -> np.ndarray:
    """Boolean table: [message, item] = item ⊆ message."""
    table = np.zeros((len(messages), len(items)), dtype=bool)
    for a, m in enumerate(messages):
        for b, x in enumerate(items):
            if contains(m, x):
                table[a, b] = True
    return table


def _rule_incidence(ctx: SchemeContext, budget: int, threads: int = 1) -> tuple[list[Subspace], np.ndarray]:
    msgs = [m.subspace for m in enumerate_messages(ctx, budget, threads)]
    rules = enumerate_encoding_rules(ctx, budget)
    require("message x rule containment table", len(msgs) * len(rules), budget)
    table = _cached(("rule_inc", ctx.params), lambda: _incidence(msgs, [e.subspace for e in rules]))
    return msgs, table


def _key_incidence(ctx: SchemeContext, i: int, budget: int, threads: int = 1):
    msgs = [m.subspace for m in enumerate_messages(ctx, budget, threads)]
    keys = [k.subspace for k in enumerate_receiver_keys(ctx, i, budget)]
    require("message x key containment table", len(msgs) * len(keys), budget)
    table = _cached(("key_inc", ctx.params, i), lambda: _incidence(msgs, keys))
    return msgs, keys, table


# -- attacks -------------------------------------------------------------------------


@dataclass
class AttackResult:
    value: Fraction
    numerator: int
    denominator: int
    configurations: int = 0
    scope: str = ""
    witness: dict = dc_field(default_factory=dict)

    def merge(self, num: int, den: int, witness: dict | None = None):
        self.configurations += 1
        v = Fraction(num, den)
        if v > self.value or (v == self.value and self.denominator == 0):
            self.value, self.numerator, self.denominator = v, num, den
            if witness is not None:
                self.witness = witness


def _best_message_count(ctx, group: Sequence[int], rules, sources, skip: Subspace | None = None) -> int:
    """max over messages m' (≠ skip) of #{e_T in group : e_T ⊆ m'}, enumerating
    the messages that contain a rule as s' + e_T."""
    if len(group) == 1 and len(sources) > (1 if skip is not None else 0):
        return 1
    tally: Counter = Counter()
    for idx in group:
        e = rules[idx].subspace
        for s in sources:
            m = subspace_sum(s.subspace, e)
            if m != skip:
                tally[m] += 1
    return max(tally.values(), default=0)


def impersonation_attack(
    ctx: SchemeContext,
    i: int,
    L: Iterable[int],
    model: str = "B",
    *,
    method: str = "fast",
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> AttackResult:
    """Largest success probability of a forged message against receiver i.

    method "fast" fixes the coalition view to that of the zero rule (exact by
    translation symmetry); "oracle" maximizes over every coalition view and
    every message using full containment tables.
    """
    L = _check_attack(ctx, i, L)
    model = model.upper()
    rules = enumerate_encoding_rules(ctx, budget)
    keys = rule_keys(ctx, budget)
    by_view = _group(range(len(rules)), lambda idx: coalition_key(keys[idx], L))
    if method == "fast":
        view0 = coalition_key(keys[0], L)
        by_view = {view0: by_view[view0]}
    elif method != "oracle":
        raise ValueError(f"unknown method {method!r}")
    res = AttackResult(Fraction(0), 0, 0, scope=method)

    if model == "B":
        if method == "oracle":
            msgs, table = _rule_incidence(ctx, budget, threads)
        else:
            sources = enumerate_source_states(ctx, budget)
            require("impersonation search", sum(len(d) for d in by_view.values()) * len(sources), budget)
        for view, D in by_view.items():
            for e_ri, G in _group(D, lambda idx: keys[idx][i - 1]).items():
                if method == "oracle":
                    num = int(table[:, G].sum(axis=1).max())
                else:
                    num = _best_message_count(ctx, G, rules, sources)
                res.merge(num, len(D))
        return res
    if model == "A":
        msgs, ikeys, table = _key_incidence(ctx, i, budget, threads)
        pos = {k: b for b, k in enumerate(ikeys)}
        for view, D in by_view.items():
            w = np.zeros(len(ikeys), dtype=np.int64)
            for idx in D:
                w[pos[keys[idx][i - 1]]] += 1
            scores = table.astype(np.int64) @ w
            res.merge(int(scores.max()), len(D))
        return res
    raise ValueError(f"unknown model {model!r}")


def impersonation_probability(ctx, i, L, model="B", **kw) -> Fraction:
    return impersonation_attack(ctx, i, L, model, **kw).value


SCOPES = ("canonical", "per-source", "all")


def substitution_cost(ctx: SchemeContext, scope: str, budget: int = DEFAULT_BUDGET) -> int:
    p = ctx.params
    inside = p.q ** (p.n * (p.r - p.n + 1))
    n_src = len(enumerate_source_states(ctx, budget))
    per_message = encoding_rule_count(ctx) + inside * n_src
    if scope == "canonical":
        return per_message
    if scope == "per-source":
        return n_src * per_message
    # product loop, then the message x rule table (needs |M|: run the loop)
    pairs = n_src * encoding_rule_count(ctx)
    require("s x e_T product loop", pairs, budget)
    n_msg = len(product_census(ctx, budget=budget).multiplicity)
    return pairs + n_msg * encoding_rule_count(ctx)


def substitution_attack(
    ctx: SchemeContext,
    i: int,
    L: Iterable[int],
    model: str = "B",
    *,
    scope: str = "per-source",
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> AttackResult:
    """Largest success probability of replacing an observed message.

    scope "all" walks every observed message m and every m' ≠ m through
    containment tables; "per-source" uses one message per source state
    (exact); "canonical" uses the single canonical message (a lower bound).
    """
    L = _check_attack(ctx, i, L)
    model = model.upper()
    if model not in ("A", "B"):
        raise ValueError(f"unknown model {model!r}")
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    require(f"substitution search ({scope})", substitution_cost(ctx, scope, budget), budget)
    rules = enumerate_encoding_rules(ctx, budget)
    keys = rule_keys(ctx, budget)
    sources = enumerate_source_states(ctx, budget)
    res = AttackResult(Fraction(0), 0, 0, scope=scope)

    if scope == "all" or model == "A":
        msgs = [m.subspace for m in enumerate_messages(ctx, budget, threads)]
        row_of = {m: a for a, m in enumerate(msgs)}
    if scope == "all":
        _, rtable = _rule_incidence(ctx, budget, threads)
        observed = [(a, m, np.flatnonzero(rtable[a]).tolist()) for a, m in enumerate(msgs)]
    else:
        if scope == "canonical":
            reps = [canonical_message(ctx).subspace]
        else:
            reps = [m.subspace for _, m in source_representatives(ctx, budget)]
        observed = [(row_of.get(m) if model == "A" else None, m, rules_within(ctx, m, budget)) for m in reps]
    if model == "A":
        _, ikeys, ktable = _key_incidence(ctx, i, budget, threads)
        kpos = {k: b for b, k in enumerate(ikeys)}
        ktable = ktable.astype(np.int64)

    for a, m, T_m in observed:
        s_m = intersect(m, ctx.U_perp)
        for view, D in _group(T_m, lambda idx: coalition_key(keys[idx], L)).items():
            if model == "B":
                for e_ri, G in _group(D, lambda idx: keys[idx][i - 1]).items():
                    if scope == "all":
                        col = rtable[:, G].sum(axis=1)
                        col[a] = 0
                        num = int(col.max())
                    else:
                        others = [s for s in sources if s.subspace != s_m]
                        num = _best_message_count(ctx, G, rules, others, skip=m)
                    res.merge(num, len(D))
            else:
                w = np.zeros(len(ikeys), dtype=np.int64)
                for idx in D:
                    w[kpos[keys[idx][i - 1]]] += 1
                scores = ktable @ w
                scores[a] = -1
                res.merge(int(scores.max()), len(D))
    return res


def substitution_probability(ctx, i, L, model="B", **kw) -> Fraction:
    return substitution_attack(ctx, i, L, model, **kw).value


# -- counting profiles ----------------------------------------------------------------


@dataclass
class PairProfile:
    k: int
    count: int


def substitution_pair_profile(
    ctx: SchemeContext,
    m1: Message | Subspace,
    m2: Message | Subspace,
    e_L: Sequence[ReceiverKey | Subspace],
    e_Ri: ReceiverKey | Subspace,
    budget: int = DEFAULT_BUDGET,
) -> PairProfile:
    """k = dim(s_1 ∩ s_2) and the number of rules inside m1 ∩ m2 holding the keys."""
    m1 = m1.subspace if isinstance(m1, Message) else m1
    m2 = m2.subspace if isinstance(m2, Message) else m2
    if m1 == m2:
        raise MRAError("substitution pair needs two distinct messages")
    s0 = intersect(decode(ctx, m1).subspace, decode(ctx, m2).subspace)
    held = tuple(x.subspace if isinstance(x, ReceiverKey) else x for x in (*e_L, e_Ri))
    count = count_encoding_rules(ctx, ConstraintSet(within=(m1, m2), contain=held), budget)
    return PairProfile(s0.dim, count)


@dataclass
class CountProfile:
    """Distributions gathered over a set of observed messages."""

    messages: int = 0
    inside: Counter = dc_field(default_factory=Counter)          # |{e_T ⊆ m}|
    inside_view: Counter = dc_field(default_factory=Counter)     # |{e_T ⊆ m, ⊇ e_L}|
    inside_view_target: Counter = dc_field(default_factory=Counter)  # ... and ⊇ e_Ri


def count_profile(
    ctx: SchemeContext,
    messages: Iterable[Subspace],
    coalitions: Sequence[tuple[tuple[int, ...], int]],
    budget: int = DEFAULT_BUDGET,
) -> CountProfile:
    """For each message m, each coalition (L, i) and every coalition view and
    target key inside m, record the constrained rule counts."""
    keys = rule_keys(ctx, budget)
    prof = CountProfile()
    for m in messages:
        T_m = rules_within(ctx, m, budget)
        prof.messages += 1
        prof.inside[len(T_m)] += 1
        for L, i in coalitions:
            for D in _group(T_m, lambda idx: coalition_key(keys[idx], L)).values():
                prof.inside_view[len(D)] += 1
                for G in _group(D, lambda idx: keys[idx][i - 1]).values():
                    prof.inside_view_target[len(G)] += 1
    return prof


def coalition_sizes(ctx: SchemeContext, L: Sequence[int], budget: int = DEFAULT_BUDGET) -> Counter:
    """Distribution over all coalition views of |{e_T ⊇ e_L}|."""
    keys = rule_keys(ctx, budget)
    groups = _group(range(len(keys)), lambda idx: coalition_key(keys[idx], L))
    return Counter(len(g) for g in groups.values())


@dataclass
class PairEntry:
    k: int
    count: int


def pair_profile(
    ctx: SchemeContext,
    L: Sequence[int],
    i: int,
    scope: str = "canonical",
    budget: int = DEFAULT_BUDGET,
) -> list[PairEntry]:
    """Message pairs sharing a rule: m1 = s1 + e_T0 (canonical s1, or every s1
    for scope "per-source") and m2 = s2 + e_T0 for every other s2.  For each
    pair and each (e_L, e_Ri) inside m1 ∩ m2 record (k, count)."""
    L = _check_attack(ctx, i, L)
    keys = rule_keys(ctx, budget)
    rules = enumerate_encoding_rules(ctx, budget)
    reps = source_representatives(ctx, budget)
    if scope == "canonical":
        m_star = canonical_message(ctx).subspace
        firsts = [(s, m) for s, m in reps if m.subspace == m_star]
    elif scope == "per-source":
        firsts = reps
    else:
        raise ValueError(f"unknown scope {scope!r}")
    cost = len(firsts) * (len(rules) + len(reps) * ctx.params.q ** (ctx.params.n * (ctx.params.r - ctx.params.n + 1)))
    require("message pair profile", cost, budget)
    out = []
    for s1, m1 in firsts:
        T1 = rules_within(ctx, m1.subspace, budget)
        for s2, m2 in reps:
            if s2 == s1:
                continue
            k = intersect(s1.subspace, s2.subspace).dim
            T12 = [idx for idx in T1 if contains(m2.subspace, rules[idx].subspace)]
            groups = _group(T12, lambda idx: (coalition_key(keys[idx], L), keys[idx][i - 1]))
            for G in groups.values():
                out.append(PairEntry(k, len(G)))
    return out


# -- prose set definitions -------------------------------------------------------------


def prose_rule_candidate_count(ctx: SchemeContext) -> int:
    p = ctx.params
    return gaussian_binomial(ctx.dim - p.n, p.n, p.q)


def prose_encoding_rules(ctx: SchemeContext, budget: int = DEFAULT_BUDGET) -> dict:
    """Every subspace of type (2n,2n,n,0) containing U, not just the
    parametrized family.  Returns the total and how many of them belong to
    the constructive family."""
    p = ctx.params
    require("prose encoding-rule candidates", prose_rule_candidate_count(ctx), budget)

    def build():
        cols = list(range(p.n, ctx.dim))
        constructive = {e.subspace for e in enumerate_encoding_rules(ctx, budget)}
        total = inside = 0
        for rows in iter_rref(ctx.field, len(cols), p.n):
            amb = [ctx.e(j) for j in range(1, p.n + 1)]
            for row in rows:
                v = [0] * ctx.dim
                for c, x in zip(cols, row):
                    v[c] = x
                amb.append(tuple(v))
            sub = canonicalize(ctx.field, amb, ctx.dim)
            t = classify(ctx.space, sub)
            if t.as_tuple() == ctx.rule_type and t.tau == 0:
                total += 1
                inside += sub in constructive
        return {"total": total, "constructive": inside, "candidates": prose_rule_candidate_count(ctx)}

    return _cached(("prose_rules", p), build)


def symplectic_group_order(a: int, q: int) -> int:
    """|Sp(2a, q)| = q^{a^2} ∏_{i=1..a} (q^{2i} - 1)."""
    out = q ** (a * a)
    for i in range(1, a + 1):
        out *= q ** (2 * i) - 1
    return out


def nondegenerate_subspace_count(a: int, b: int, q: int) -> int:
    """Number of nondegenerate 2b-dimensional subspaces of a 2a-dimensional
    symplectic space (orbit-stabilizer: W ⊕ W^⊥ splits the group)."""
    return symplectic_group_order(a, q) // (symplectic_group_order(b, q) * symplectic_group_order(a - b, q))


def expected_source_count(ctx: SchemeContext) -> int:
    """Closed-form count of source states, independent of the enumeration.

    A source state is U + Q + ⟨e_{2ν+1}⟩ with Q alternate; alternateness rules
    out any e_{2ν+2} component, so Q is a nondegenerate 2(r-n)-subspace of the
    symplectic span of the R2/R4 coordinate blocks."""
    p = ctx.params
    return nondegenerate_subspace_count(p.nu - p.n, p.r - p.n, p.q)
