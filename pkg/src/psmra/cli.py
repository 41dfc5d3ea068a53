"""``mra`` command-line interface.

Exit codes: 0 success/accept, 1 verification reject (including malformed
messages), 2 usage or input-file error, 3 invalid parameters, 4 audit
mismatch, 5 budget exceeded.  Errors print one line to stderr:

    mra: error: <kind>: <message>
"""

from __future__ import annotations

import argparse
import os
import sys
from collections import Counter
from fractions import Fraction

from . import census, serialize
from .audit import CHECK_IDS, audit, coalitions, select_checks
from .errors import (
    BudgetExceeded,
    ConstraintViolation,
    FieldError,
    FormatError,
    MalformedMessage,
    MRAError,
    NonCanonical,
)
from .field import field_for_q
from .linalg import canonicalize
from .mracode import (
    SchemeContext,
    decode,
    derive_receiver_key,
    encode,
    is_source_state,
    sample_encoding_rule,
    sample_source_state,
    setup,
    verify,
)
from .psgeom import SpaceSpec, classify
from .rng import SEED_MAX, Rng

EXIT_OK, EXIT_REJECT, EXIT_USAGE, EXIT_PARAMS, EXIT_MISMATCH, EXIT_BUDGET = range(6)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _default_threads() -> int:
    raw = os.environ.get("MRA_THREADS")
    if raw is None:
        return 1
    try:
        return _positive(raw)
    except argparse.ArgumentTypeError:
        raise UsageError(f"MRA_THREADS={raw!r} is not a positive integer") from None


def _add_params(p: argparse.ArgumentParser):
    g = p.add_argument_group("parameters (flags or --params FILE)")
    g.add_argument("--q", type=int)
    g.add_argument("--nu", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--r", type=int)
    g.add_argument("--params", metavar="FILE", help="params JSON {q, nu, n, r[, field]}")


def _add_budget(p: argparse.ArgumentParser):
    p.add_argument("--budget", type=_positive, default=census.DEFAULT_BUDGET, help="enumeration cap (default 2^24)")
    p.add_argument("--threads", type=_positive, default=None, help="worker processes (default $MRA_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mra", description="Multi-receiver authentication over pseudo-symplectic geometry.")
    parser.add_argument("--lenient", action="store_true", help="re-canonicalize non-canonical subspaces instead of rejecting them")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("params", help="derived sizes and closed-form attack probabilities")
    _add_params(p)
    p.add_argument("--out")

    p = sub.add_parser("keygen", help="sample an encoding rule and derive every receiver key")
    _add_params(p)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("send", help="encode a source state under the sender key")
    p.add_argument("--keys", required=True, help="sender key file or keygen bundle")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--source", help="source-state file (default: sample one from --seed)")
    p.add_argument("--out", required=True)
    p.add_argument("--source-out", help="also write the source state used")

    p = sub.add_parser("verify", help="check a message against a receiver key")
    p.add_argument("--msg", required=True)
    p.add_argument("--key", required=True, help="receiver key file or keygen bundle")
    p.add_argument("--receiver", type=int)

    p = sub.add_parser("decode", help="recover the source state of a message")
    p.add_argument("--msg", required=True)
    p.add_argument("--out")

    p = sub.add_parser("audit", help="exhaustive checks of counts and attack probabilities")
    _add_params(p)
    p.add_argument("--checks", default="all", help=f"'all' or comma-separated ids ({', '.join(CHECK_IDS)}); 'C-3.7-*' style prefixes allowed")
    p.add_argument("--out")
    p.add_argument("--csv", metavar="FILE", help="also write the check table as CSV")
    _add_budget(p)

    p = sub.add_parser("attack", help="exact impersonation/substitution probabilities")
    _add_params(p)
    p.add_argument("--target", type=int, default=1)
    p.add_argument("--coalition", help="comma-separated receiver indices (default: every L = {2..l+1})")
    p.add_argument("--model", choices=["a", "b", "both"], default="both")
    p.add_argument("--scope", choices=["auto", *census.SCOPES], default="auto", help="substitution messages searched")
    p.add_argument("--out")
    _add_budget(p)

    p = sub.add_parser("census", help="enumerate a family")
    _add_params(p)
    p.add_argument("--family", choices=["eT", "eR", "S", "M", "type-count"], required=True)
    p.add_argument("--receiver", type=int, default=1, help="receiver index for eR")
    p.add_argument("--dim", type=int, help="subspace dimension for type-count")
    p.add_argument("--delta", type=int, choices=[1, 2], default=2, help="type-count space is GF(q)^(2nu+delta)")
    p.add_argument("--list", action="store_true", help="include the members")
    p.add_argument("--out")
    _add_budget(p)
    return parser


# -- helpers --------------------------------------------------------------------------


def _params(args) -> SchemeContext:
    flags = [args.q, args.nu, args.n, args.r]
    if args.params:
        if any(v is not None for v in flags):
            raise UsageError("give either --params or --q/--nu/--n/--r, not both")
        return setup(serialize.params_from_json(serialize.read_json(args.params)))
    if any(v is None for v in flags):
        raise UsageError("parameters required: --q --nu --n --r (or --params FILE)")
    return setup(serialize.params_for_q(args.q, args.nu, args.n, args.r))


def _emit(text: str, out: str | None):
    if out:
        serialize.write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _threads(args) -> int:
    return args.threads if args.threads is not None else _default_threads()


def _frac(x: Fraction) -> str:
    return str(x)


# -- subcommands ------------------------------------------------------------------------


def cmd_params(args) -> int:
    ctx = _params(args)
    p = ctx.params
    q = p.q
    table = {
        "params": p.to_json(),
        "ambient_dim": ctx.dim,
        "U_dim": p.n,
        "U_perp_dim": ctx.U_perp.dim,
        "types": {
            "source": "({},{},{},{})".format(*ctx.source_type),
            "message": "({},{},{},{})".format(*ctx.message_type),
            "encoding_rule": "({},{},{},{})".format(*ctx.rule_type),
        },
        "closed_form": {
            "E_T": q ** (p.n * (p.nu - p.n + 1)),
            "E_R": q ** (p.nu - p.n + 1),
            "S": census.expected_source_count(ctx),
            "source_candidates": census.source_candidate_count(ctx),
            "rules_per_message": q ** (p.n * (p.r - p.n + 1)),
        },
        "theory": [
            {
                "l": l,
                "P_I": _frac(Fraction(1, q ** ((p.n - l) * (p.nu - p.r) + (p.r - p.n + 1)))),
                "P_S": _frac(Fraction(1, q ** (p.r - l))),
            }
            for l in range(1, p.n)
        ],
    }
    _emit(serialize.dumps(table), args.out)
    return EXIT_OK


def cmd_keygen(args) -> int:
    ctx = _params(args)
    rule = sample_encoding_rule(ctx, Rng(args.seed))
    keys = [derive_receiver_key(ctx, rule, i) for i in range(1, ctx.params.n + 1)]
    serialize.write_atomic(args.out, serialize.dumps(serialize.bundle_to_json(ctx, rule, keys)))
    return EXIT_OK


def cmd_send(args) -> int:
    ctx, rule = serialize.load_sender(serialize.read_json(args.keys))
    if args.source:
        sctx, s = serialize.load_source(serialize.read_json(args.source), strict=not args.lenient)
        if sctx.params != ctx.params:
            raise FormatError("source-state file and key file use different parameters")
        if not is_source_state(ctx, s.subspace):
            raise FormatError("the given subspace is not a source state")
    else:
        s = sample_source_state(ctx, Rng(args.seed))
    m = encode(ctx, s, rule)
    serialize.write_atomic(args.out, serialize.dumps(serialize.message_to_json(ctx, m)))
    if args.source_out:
        serialize.write_atomic(args.source_out, serialize.dumps(serialize.source_to_json(ctx, s)))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        mctx, m = serialize.load_message(serialize.read_json(args.msg), strict=not args.lenient)
    except NonCanonical as exc:
        # a well-shaped but tampered basis is an authentication failure
        raise MalformedMessage(str(exc)) from None
    kctx, key = serialize.load_receiver(serialize.read_json(args.key), args.receiver, strict=not args.lenient)
    if mctx.params != kctx.params:
        raise FormatError("message and key use different parameters")
    ok = verify(kctx, m, key)
    print("accept" if ok else "reject")
    return EXIT_OK if ok else EXIT_REJECT


def cmd_decode(args) -> int:
    ctx, m = serialize.load_message(serialize.read_json(args.msg), strict=not args.lenient)
    s = decode(ctx, m)
    _emit(serialize.dumps(serialize.source_to_json(ctx, s)), args.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    ctx = _params(args)
    try:
        checks = select_checks(args.checks)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = audit(ctx, checks, budget=args.budget, threads=_threads(args))
    _emit(report.dumps(), args.out)
    if args.csv:
        serialize.write_atomic(args.csv, report.to_csv())
    for cid in report.mismatches:
        print(f"mra: mismatch: {cid}", file=sys.stderr)
    return report.exit_code


def _parse_coalition(text: str) -> tuple[int, ...]:
    try:
        return tuple(sorted({int(x) for x in text.split(",") if x.strip()}))
    except ValueError:
        raise UsageError(f"bad coalition {text!r}") from None


def cmd_attack(args) -> int:
    ctx = _params(args)
    threads = _threads(args)
    if args.coalition is not None:
        runs = [(_parse_coalition(args.coalition), args.target)]
    else:
        runs = [(L, args.target) for L, _ in coalitions(ctx) if args.target not in L]
    models = ["A", "B"] if args.model == "both" else [args.model.upper()]
    p = ctx.params
    out = []
    for L, i in runs:
        l = len(L)
        for model in models:
            pi = census.impersonation_attack(ctx, i, L, model, budget=args.budget, threads=threads)
            scopes = census.SCOPES[::-1] if args.scope == "auto" else [args.scope]
            ps = None
            for scope in scopes:
                try:
                    ps = census.substitution_attack(ctx, i, L, model, scope=scope, budget=args.budget, threads=threads)
                    break
                except BudgetExceeded:
                    if scope == scopes[-1]:
                        raise
            out.append(
                {
                    "L": list(L),
                    "i": i,
                    "model": model,
                    "P_I": _frac(pi.value),
                    "P_S": _frac(ps.value),
                    "substitution_scope": ps.scope,
                    "theorem_P_I": _frac(Fraction(1, p.q ** ((p.n - l) * (p.nu - p.r) + (p.r - p.n + 1)))),
                    "theorem_P_S": _frac(Fraction(1, p.q ** (p.r - l))),
                }
            )
    _emit(serialize.dumps({"format": serialize.FORMAT, "params": p.to_json(), "attacks": out}), args.out)
    return EXIT_OK


def cmd_census(args) -> int:
    result: dict = {"format": serialize.FORMAT, "family": args.family}
    if args.family == "type-count":
        if args.q is None or args.nu is None or args.dim is None:
            raise UsageError("type-count needs --q, --nu and --dim")
        space = SpaceSpec(field_for_q(args.q), args.nu, args.delta)
        if not 0 <= args.dim <= space.dim:
            raise UsageError(f"--dim must lie in 0..{space.dim}")
        census.require("type-count subspaces", census.gaussian_binomial(space.dim, args.dim, args.q), args.budget)
        tally: Counter = Counter()
        for rows in census.iter_rref(space.field, space.dim, args.dim):
            tally[str(classify(space, canonicalize(space.field, rows, space.dim)))] += 1
        result.update({"q": args.q, "nu": args.nu, "delta": args.delta, "dim": args.dim, "count": sum(tally.values()), "types": dict(sorted(tally.items()))})
        _emit(serialize.dumps(result), args.out)
        return EXIT_OK

    ctx = _params(args)
    result["params"] = ctx.params.to_json()
    if args.family == "eT":
        items = census.enumerate_encoding_rules(ctx, args.budget)
        members = [serialize.rule_entry(e) for e in items]
    elif args.family == "eR":
        items = census.enumerate_receiver_keys(ctx, args.receiver, args.budget)
        members = [serialize.key_entry(k) for k in items]
    elif args.family == "S":
        items = census.enumerate_source_states(ctx, args.budget)
        members = [serialize.subspace_to_json(s.subspace) for s in items]
        result["candidate_lifts"] = census.source_candidate_count(ctx)
    else:
        pc = census.product_census(ctx, threads=_threads(args), budget=args.budget)
        items = pc.messages
        members = [serialize.subspace_to_json(m.subspace) for m in items]
        result["multiplicity"] = {str(k): v for k, v in sorted(Counter(pc.multiplicity.values()).items())}
    result["count"] = len(items)
    if args.list:
        result["members"] = members
    _emit(serialize.dumps(result), args.out)
    return EXIT_OK


COMMANDS = {
    "params": cmd_params,
    "keygen": cmd_keygen,
    "send": cmd_send,
    "verify": cmd_verify,
    "decode": cmd_decode,
    "audit": cmd_audit,
    "attack": cmd_attack,
    "census": cmd_census,
}


def _fail(kind: str, message: str, code: int) -> int:
    line = " ".join(str(message).split())
    print(f"mra: error: {kind}: {line}", file=sys.stderr)
    return code


def run_cli(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", exc, EXIT_USAGE)
    except MalformedMessage as exc:
        return _fail("malformed-message", exc, EXIT_REJECT)
    except (ConstraintViolation, FieldError) as exc:
        return _fail("invalid-params", exc, EXIT_PARAMS)
    except BudgetExceeded as exc:
        return _fail("budget", exc, EXIT_BUDGET)
    except (FormatError, NonCanonical) as exc:
        return _fail("format", exc, EXIT_USAGE)
    except OSError as exc:
        return _fail("io", f"{exc.filename}: {exc.strerror}", EXIT_USAGE)
    except MRAError as exc:
        return _fail(type(exc).__name__, exc, EXIT_USAGE)


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
