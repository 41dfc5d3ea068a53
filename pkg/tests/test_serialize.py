import json
import os

import pytest

from psmra import serialize
from psmra.errors import ConstraintViolation, FormatError, NonCanonical
from psmra.mracode import (
    canonical_source_state,
    derive_receiver_key,
    encode,
    make_context,
    sample_encoding_rule,
)
from psmra.rng import Rng


def _bundle(ctx, seed=3):
    rule = sample_encoding_rule(ctx, Rng(seed))
    keys = [derive_receiver_key(ctx, rule, i) for i in range(1, ctx.params.n + 1)]
    return rule, keys


def test_params_roundtrip(small, quad):
    for ctx in (small, quad):
        doc = serialize.params_to_json(ctx.params)
        assert serialize.params_from_json(doc) == ctx.params
        assert serialize.params_from_json(json.loads(serialize.dumps(doc))) == ctx.params
    assert serialize.params_from_json({"q": 2, "nu": 5, "n": 2, "r": 4}) == small.params


def test_params_errors():
    with pytest.raises(FormatError):
        serialize.params_from_json({"q": 2, "nu": "5", "n": 2, "r": 4})
    with pytest.raises(FormatError):
        serialize.params_from_json({"q": 2, "nu": True, "n": 2, "r": 4})
    with pytest.raises(FormatError):
        serialize.params_from_json({"q": 8, "nu": 5, "n": 2, "r": 4, "field": {"k": 1, "poly": 3}})
    with pytest.raises(ConstraintViolation):
        serialize.params_from_json({"q": 2, "nu": 5, "n": 3, "r": 4})


def test_bundle_roundtrip(small):
    rule, keys = _bundle(small)
    doc = json.loads(serialize.dumps(serialize.bundle_to_json(small, rule, keys)))
    ctx, got = serialize.load_sender(doc)
    assert ctx.params == small.params and got == rule
    for k in keys:
        _, got_key = serialize.load_receiver(doc, k.index)
        assert got_key == k
    with pytest.raises(FormatError):
        serialize.load_receiver(doc)
    with pytest.raises(FormatError):
        serialize.load_receiver(doc, 7)


def test_single_key_files(small):
    rule, keys = _bundle(small)
    assert serialize.load_sender(serialize.rule_to_json(small, rule))[1] == rule
    doc = serialize.key_to_json(small, keys[1])
    assert serialize.load_receiver(doc)[1] == keys[1]
    assert serialize.load_receiver(doc, 2)[1] == keys[1]
    with pytest.raises(FormatError):
        serialize.load_receiver(doc, 1)
    with pytest.raises(FormatError):
        serialize.load_sender(doc)


def test_message_and_source_roundtrip(small):
    rule, _ = _bundle(small)
    s = canonical_source_state(small)
    m = encode(small, s, rule)
    assert serialize.load_message(serialize.message_to_json(small, m))[1] == m
    assert serialize.load_source(serialize.source_to_json(small, s))[1] == s


def test_non_canonical_rows(small):
    rule, _ = _bundle(small)
    m = encode(small, canonical_source_state(small), rule)
    doc = serialize.message_to_json(small, m)
    rows = doc["subspace"]["rows"]
    # add row 1 into row 0: same span, no longer reduced
    rows[0] = [a ^ b for a, b in zip(rows[0], rows[1])]
    with pytest.raises(NonCanonical):
        serialize.load_message(doc)
    with pytest.warns(UserWarning):
        _, again = serialize.load_message(doc, strict=False)
    assert again == m


def test_format_errors(small, tmp_path):
    rule, keys = _bundle(small)
    doc = serialize.bundle_to_json(small, rule, keys)
    with pytest.raises(FormatError):
        serialize.load_sender({**doc, "format": 2})
    bad = json.loads(json.dumps(doc))
    bad["keys"][0]["R5"] = [0, 2]
    with pytest.raises(FormatError):
        serialize.load_sender(bad)
    bad = json.loads(json.dumps(doc))
    bad["keys"][1]["subspace"]["rows"][0][0] = True
    with pytest.raises(FormatError):
        serialize.load_receiver(bad, 1)
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(FormatError):
        serialize.read_json(str(path))
    path.write_text("[1, 2]")
    with pytest.raises(FormatError):
        serialize.read_json(str(path))


def test_write_atomic(tmp_path):
    target = tmp_path / "out.json"
    serialize.write_atomic(str(target), "one\n")
    serialize.write_atomic(str(target), "two\n")
    assert target.read_text() == "two\n"
    assert os.listdir(tmp_path) == ["out.json"]


def test_quad_bundle_roundtrip(quad):
    rule, keys = _bundle(quad, seed=11)
    doc = json.loads(serialize.dumps(serialize.bundle_to_json(quad, rule, keys)))
    assert serialize.load_sender(doc)[1] == rule
    assert serialize.load_receiver(doc, 2)[1] == keys[1]
    assert make_context(4, 5, 2, 4).params == serialize.load_context(doc).params
