"""JSON file formats for parameters, keys, messages and source states.

All files carry ``"format": 1``.  Subspaces are written as
``{"ambient_dim": N, "rows": [[...], ...]}`` in canonical RREF.  Strict
readers reject rows that are not already canonical; lenient readers
re-canonicalize and emit a warning.

Key file (sender):    {format, params, role: "sender", R2, R5}
Key file (receiver):  {format, params, role: "receiver", index, subspace}
Key bundle (keygen):  {format, params, role: "bundle", keys: [entries without format/params]}
Message file:         {format, params, subspace}
Source file:          {format, params, role: "source", subspace}
"""

from __future__ import annotations

import json
import os
import tempfile
import warnings
from typing import Any

from .errors import FormatError, MRAError, NonCanonical
from .field import FieldSpec
from .linalg import Subspace, canonicalize
from .mracode import (
    EncodingRule,
    Message,
    ReceiverKey,
    SchemeContext,
    SchemeParams,
    SourceState,
    key_from_subspace,
    make_rule,
    setup,
    validate_params,
)

FORMAT = 1


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_atomic(path: str, text: str):
    """Write via a temporary file in the target directory and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".mra-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(obj, dict):
        raise FormatError(f"{path}: top level must be an object")
    return obj


def _int(obj: dict, key: str, where: str = "") -> int:
    v = obj.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(f"{where}field {key!r} must be an integer")
    return v


def _check_format(obj: dict):
    if obj.get("format") != FORMAT:
        raise FormatError(f"unsupported format {obj.get('format')!r} (expected {FORMAT})")


# -- field / params / subspace -------------------------------------------------------


def field_to_json(f: FieldSpec) -> dict:
    return f.to_json()


def field_from_json(obj: dict) -> FieldSpec:
    if not isinstance(obj, dict):
        raise FormatError("field must be an object {k, poly}")
    return FieldSpec(_int(obj, "k", "field "), _int(obj, "poly", "field "))


def params_to_json(p: SchemeParams) -> dict:
    return p.to_json()


def params_from_json(obj: dict) -> SchemeParams:
    """Accepts {q, nu, n, r} with an optional {field: {k, poly}}."""
    if not isinstance(obj, dict):
        raise FormatError("params must be an object")
    nu, n, r = (_int(obj, key, "params ") for key in ("nu", "n", "r"))
    if "field" in obj:
        f = field_from_json(obj["field"])
        if "q" in obj and obj["q"] != f.q:
            raise FormatError(f"params q={obj['q']} disagrees with field of size {f.q}")
        return validate_params(f, nu, n, r)
    return validate_params(_int(obj, "q", "params "), nu, n, r)


def subspace_to_json(sub: Subspace) -> dict:
    return {"ambient_dim": sub.ambient_dim, "rows": [list(r) for r in sub.rows]}


def subspace_from_json(field: FieldSpec, obj: dict, strict: bool = True) -> Subspace:
    if not isinstance(obj, dict):
        raise FormatError("subspace must be an object {ambient_dim, rows}")
    n = _int(obj, "ambient_dim", "subspace ")
    rows = obj.get("rows")
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise FormatError("subspace rows must be a list of lists")
    for r in rows:
        if len(r) != n:
            raise FormatError(f"row of length {len(r)} in a {n}-dimensional space")
        for x in r:
            if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < field.q:
                raise FormatError(f"entry {x!r} is not an element of GF({field.q})")
    sub = canonicalize(field, rows, n)
    given = tuple(tuple(r) for r in rows)
    if given != sub.rows:
        if strict:
            raise NonCanonical("subspace rows are not in canonical reduced row-echelon form")
        warnings.warn("subspace rows were not canonical; re-canonicalized", stacklevel=2)
    return sub


# -- keys ---------------------------------------------------------------------------


def _header(ctx: SchemeContext) -> dict:
    return {"format": FORMAT, "params": params_to_json(ctx.params)}


def rule_entry(rule: EncodingRule) -> dict:
    return {"role": "sender", "R2": [list(r) for r in rule.R2], "R5": list(rule.R5)}


def key_entry(key: ReceiverKey) -> dict:
    return {"role": "receiver", "index": key.index, "subspace": subspace_to_json(key.subspace)}


def rule_to_json(ctx: SchemeContext, rule: EncodingRule) -> dict:
    return {**_header(ctx), **rule_entry(rule)}


def key_to_json(ctx: SchemeContext, key: ReceiverKey) -> dict:
    return {**_header(ctx), **key_entry(key)}


def bundle_to_json(ctx: SchemeContext, rule: EncodingRule, keys: list[ReceiverKey]) -> dict:
    return {**_header(ctx), "role": "bundle", "keys": [rule_entry(rule)] + [key_entry(k) for k in keys]}


def _rule_from_entry(ctx: SchemeContext, obj: dict) -> EncodingRule:
    p = ctx.params
    R2, R5 = obj.get("R2"), obj.get("R5")
    if not isinstance(R2, list) or len(R2) != p.n or not all(isinstance(r, list) and len(r) == p.nu - p.n for r in R2):
        raise FormatError(f"R2 must be {p.n} rows of length {p.nu - p.n}")
    if not isinstance(R5, list) or len(R5) != p.n:
        raise FormatError(f"R5 must have length {p.n}")
    for x in [*R5, *(x for r in R2 for x in r)]:
        if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < p.q:
            raise FormatError(f"entry {x!r} is not an element of GF({p.q})")
    return make_rule(ctx, R2, R5)


def _key_from_entry(ctx: SchemeContext, obj: dict, strict: bool) -> ReceiverKey:
    i = _int(obj, "index", "key ")
    sub = subspace_from_json(ctx.field, obj.get("subspace"), strict)
    try:
        return key_from_subspace(ctx, i, sub)
    except MRAError as exc:
        raise FormatError(f"receiver key: {exc}") from None


def load_context(obj: dict) -> SchemeContext:
    _check_format(obj)
    if "params" not in obj:
        raise FormatError("missing params")
    return setup(params_from_json(obj["params"]))


def load_sender(obj: dict) -> tuple[SchemeContext, EncodingRule]:
    ctx = load_context(obj)
    role = obj.get("role")
    if role == "sender":
        return ctx, _rule_from_entry(ctx, obj)
    if role == "bundle":
        for entry in obj.get("keys", []):
            if isinstance(entry, dict) and entry.get("role") == "sender":
                return ctx, _rule_from_entry(ctx, entry)
        raise FormatError("bundle has no sender entry")
    raise FormatError(f"expected a sender key or bundle, got role {role!r}")


def load_receiver(obj: dict, index: int | None = None, strict: bool = True) -> tuple[SchemeContext, ReceiverKey]:
    ctx = load_context(obj)
    role = obj.get("role")
    if role == "receiver":
        key = _key_from_entry(ctx, obj, strict)
        if index is not None and key.index != index:
            raise FormatError(f"key file holds receiver {key.index}, not {index}")
        return ctx, key
    if role == "bundle":
        if index is None:
            raise FormatError("a bundle needs an explicit receiver index")
        for entry in obj.get("keys", []):
            if isinstance(entry, dict) and entry.get("role") == "receiver" and entry.get("index") == index:
                return ctx, _key_from_entry(ctx, entry, strict)
        raise FormatError(f"bundle has no key for receiver {index}")
    raise FormatError(f"expected a receiver key or bundle, got role {role!r}")


# -- messages and source states ----------------------------------------------------


def message_to_json(ctx: SchemeContext, m: Message) -> dict:
    return {**_header(ctx), "subspace": subspace_to_json(m.subspace)}


def load_message(obj: dict, strict: bool = True) -> tuple[SchemeContext, Message]:
    ctx = load_context(obj)
    sub = subspace_from_json(ctx.field, obj.get("subspace"), strict)
    if sub.ambient_dim != ctx.dim:
        raise FormatError(f"message lives in dimension {sub.ambient_dim}, expected {ctx.dim}")
    return ctx, Message(sub)


def source_to_json(ctx: SchemeContext, s: SourceState) -> dict:
    return {**_header(ctx), "role": "source", "subspace": subspace_to_json(s.subspace)}


def load_source(obj: dict, strict: bool = True) -> tuple[SchemeContext, SourceState]:
    ctx = load_context(obj)
    return ctx, SourceState(subspace_from_json(ctx.field, obj.get("subspace"), strict))


def params_for_q(q: int, nu: int, n: int, r: int) -> SchemeParams:
    return validate_params(q, nu, n, r)
