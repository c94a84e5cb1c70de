import random

import pytest
from hypothesis import given

from conftest import seeds
from dotcalc.corpus import inertness_vectors
from dotcalc.gen import random_inert_type
from dotcalc.inert import (
    DISALLOWED,
    DUP_FIELD,
    DUP_TYPE,
    NON_RECORD,
    NON_TIGHT,
    NotInertRecord,
    is_inert_context,
    is_inert_type,
    record_members,
)
from dotcalc.parse import parse_context, parse_type
from dotcalc.pretty import show
from dotcalc.syntax import TOP, Fld, Sel, TypDec


def verdict(src, loose=False):
    return is_inert_type(parse_type(src), loose)


def test_examples():
    assert verdict("all(x: Top) Bot").verdict
    r = verdict("mu(x: {A: Bot .. Top})")
    assert not r and r.first_violation.reason == NON_TIGHT
    assert verdict("mu(x: {A: Top .. Top} & {A: Bot .. Bot})").first_violation.reason == DUP_TYPE
    assert verdict("mu(x: {a: x.A} & {A: Top .. Top})").verdict


def test_other_reasons():
    assert verdict("Top").first_violation.reason == DISALLOWED
    assert verdict("{A: Top .. Top}").first_violation.reason == DISALLOWED
    assert verdict("mu(x: Top)").first_violation.reason == NON_RECORD
    assert verdict("mu(x: {a: Top} & mu(y: {b: Top}))").first_violation.reason == NON_RECORD


def test_violation_path():
    r = verdict("mu(x: {a: Top} & {B: Top .. Top} & {C: Bot .. Top})")
    assert r.first_violation.path == ("body", "right", "right")


def test_field_label_strictness_and_loose_flag():
    src = "mu(x: {a: Top} & {a: Bot})"
    assert verdict(src).first_violation.reason == DUP_FIELD
    assert verdict(src, loose=True).verdict


def test_nested_rec_in_member_is_fine():
    assert verdict("mu(x: {a: mu(y: {B: Bot .. Top})})").verdict


def test_contexts():
    assert is_inert_context(parse_context("")).ok
    env = {}
    g = parse_context("x: {A: {a: Top} .. all(z: Top) Top}", env)
    rep = is_inert_context(g)
    assert not rep and rep.offender == env["x"]
    assert is_inert_context(parse_context("f: all(y: Top) Top; o: mu(x: {a: Top})")).ok


def test_record_members():
    t = parse_type("mu(x: {A: Top .. Top} & {a: x.A})")
    m = record_members(t)
    assert m == {"A": TypDec("A", TOP, TOP), "a": Fld("a", Sel(t.self_, "A"))}
    assert record_members(parse_type("mu(x: {a: Top})")) == {"a": Fld("a", TOP)}
    with pytest.raises(NotInertRecord):
        record_members(parse_type("all(x: Top) Top"))


def test_vectors():
    for v in inertness_vectors():
        r = verdict(v["type"])
        assert r.verdict == v["inert"], v["name"]
        if not v["inert"]:
            assert r.first_violation.reason == v["reason"], v["name"]


@given(seeds)
def test_generated_inert_types(seed):
    t = random_inert_type(random.Random(seed), [], 2)
    assert is_inert_type(t).verdict
    # alpha-renaming keeps the verdict
    assert is_inert_type(parse_type(show(t), {})).verdict
