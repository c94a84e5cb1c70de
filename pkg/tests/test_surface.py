import json

import pytest
from hypothesis import given, strategies as st

from conftest import terms, types
from dotcalc.corpus import data_dir
from dotcalc.derivio import DerivationFormatError, document_names, dump_derivation, load_derivation, parse_derivation
from dotcalc.parse import ParseError, parse_context, parse_defs, parse_term, parse_type
from dotcalc.pretty import show
from dotcalc.rules import judgment_alpha_eq, show_judgment, validate
from dotcalc.syntax import (
    BOT,
    TOP,
    All,
    And,
    App,
    AndDef,
    Fld,
    FldDef,
    Lam,
    Let,
    Rec,
    Sel,
    SelTrm,
    TypDec,
    TypDef,
    Var,
    alpha_eq,
)


def test_parse_let_application():
    t = parse_term("let x = lambda(y: Top) y in x x")
    assert isinstance(t, Let) and isinstance(t.rhs, Lam)
    lam = t.rhs
    assert lam.param_type == TOP and lam.body == Var(lam.param)
    assert t.body == App(t.bound, t.bound)


def test_parse_selection_with_free_receiver():
    env = {}
    t = parse_term("x.a", env)
    assert t == SelTrm(env["x"], "a")


@pytest.mark.parametrize("src", ["(x.a).b", "x (y z)", "(lambda(x: Top) x) y", "let = x in x"])
def test_anf_and_syntax_violations(src):
    with pytest.raises(ParseError) as exc:
        parse_term(src)
    assert exc.value.message and exc.value.span.start <= exc.value.span.end


def test_parse_types():
    t = parse_type("mu(x: {A: Top .. Top} & {a: x.A})")
    assert isinstance(t, Rec)
    assert t.body == And(TypDec("A", TOP, TOP), Fld("a", Sel(t.self_, "A")))
    u = parse_type("all(z: Bot) Top")
    assert isinstance(u, All) and u.domain == BOT and u.codomain == TOP
    with pytest.raises(ParseError) as exc:
        parse_type("{A: Bot}")
    assert exc.value.expected


def test_and_is_right_associative():
    assert parse_type("Top & Bot & Top") == And(TOP, And(BOT, TOP))
    left = And(And(TOP, BOT), TOP)
    assert alpha_eq(parse_type(show(left)), left)


def test_defs_and_unicode():
    d = parse_defs("{a = x} /\\ {B = Top}", {})
    assert isinstance(d, AndDef) and isinstance(d.left, FldDef) and d.right == TypDef("B", TOP)
    assert alpha_eq(parse_type("∀(x: ⊤) ⊥"), parse_type("all(x: Top) Bot"))


def test_duplicate_labels_parse():
    # rejected later by definition typing, not by the parser
    parse_term("nu(s: {a: Top} & {a: Top}) {a = s} /\\ {a = s}")


def test_context_parsing_shares_env():
    env = {}
    g = parse_context("x: Top; y: x.A", env)
    t = parse_term("y", env)
    assert t == Var(g.names[1])


def test_print_examples():
    assert show(TOP) == "Top"
    src = "lambda(x: {A: {a: Top} .. all(z: Top) Top}) let y = nu(y: {a: Top}) {a = y.a} in y y"
    t = parse_term(src)
    assert alpha_eq(parse_term(show(t)), t)


@given(terms)
def test_term_round_trip(t):
    assert alpha_eq(parse_term(show(t), {}), t)


@given(types)
def test_type_round_trip(t):
    assert alpha_eq(parse_type(show(t), {}), t)


@given(st.text(max_size=60))
def test_parse_total_on_text(src):
    for parser in (parse_term, parse_type, parse_context):
        try:
            parser(src, {})
        except ParseError:
            pass


@given(st.binary(max_size=40))
def test_parse_total_on_bytes(raw):
    try:
        parse_term(raw, {})
    except ParseError:
        pass


def test_deep_nesting_is_a_parse_error_not_a_crash():
    with pytest.raises(ParseError):
        parse_type("all(x: " * 5000 + "Top" + ") Top" * 5000)


# ---------------------------------------------------------------- derivations

REFL = {"rule": "Refl", "conclusion": {"kind": "subtyp", "ctx": [], "lhs": "Top", "rhs": "Top"}, "premises": []}


def test_refl_leaf():
    d = parse_derivation(json.dumps(REFL))
    assert d.rule == "Refl" and d.premises == () and validate(d) == []


def test_system_mismatch_is_a_format_error():
    doc = dict(REFL, rule="Refl-#")
    with pytest.raises(DerivationFormatError, match="system mismatch"):
        parse_derivation(json.dumps(doc))


def test_unknown_rule_and_arity():
    with pytest.raises(DerivationFormatError, match="unknown rule"):
        parse_derivation(json.dumps(dict(REFL, rule="Bot-##")))
    with pytest.raises(DerivationFormatError, match="arity"):
        parse_derivation(json.dumps(dict(REFL, rule="Trans")))
    with pytest.raises(ParseError):
        parse_derivation("{not json")


def test_malformed_judgment():
    doc = {"rule": "Refl", "conclusion": {"kind": "subtyp", "ctx": [], "lhs": "Top"}, "premises": []}
    with pytest.raises(DerivationFormatError):
        parse_derivation(json.dumps(doc))


def test_bad_bounds_file_shape():
    d = load_derivation(data_dir() / "bad_bounds.deriv.json")
    assert d.size() == 18
    assert validate(d) == []


def test_derivation_round_trip():
    d = load_derivation(data_dir() / "bad_bounds.deriv.json")
    d2 = parse_derivation(dump_derivation(d))
    assert [n.rule for _, n in d.walk()] == [n.rule for _, n in d2.walk()]
    n1, n2 = document_names(d), document_names(d2)
    for (_, a), (_, b) in zip(d.walk(), d2.walk()):
        assert show_judgment(a.conclusion, n1) == show_judgment(b.conclusion, n2)


def test_same_env_round_trip_is_alpha_identical():
    d = load_derivation(data_dir() / "bad_bounds.deriv.json")
    names = {n: s for n, s in document_names(d).items()}
    env = {s: n for n, s in names.items()}
    d2 = parse_derivation(dump_derivation(d), env=env)
    assert judgment_alpha_eq(d.conclusion, d2.conclusion)
