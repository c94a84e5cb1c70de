import json
from collections import Counter

import pytest

from conftest import mutants
from dotcalc import build as B
from dotcalc.corpus import bad_bounds_derivation, data_dir
from dotcalc.derivio import derivation_from_obj, derivation_to_obj, load_derivation
from dotcalc.parse import parse_context, parse_term, parse_type
from dotcalc.rules import (
    CONTEXT,
    EXPECTED_COUNTS,
    SHAPE,
    SIDE,
    SYSTEM,
    TYP,
    TYP_I,
    TYP_P,
    UNKNOWN,
    Derivation,
    Judgment,
    UnboundVariable,
    lookup,
    precise_closure,
    precise_types_of_var,
    rule_registry,
    typing,
    validate,
)
from dotcalc.syntax import TOP, All, App, Context, Lam, Name, TypDec, Var, alpha_eq


def test_registry_counts():
    reg = rule_registry()
    assert len(reg) == 66
    assert Counter(s.family for s in reg) == EXPECTED_COUNTS
    assert len({s.name for s in reg}) == 66


def test_registry_examples():
    assert [s.name for s in rule_registry()].count("<:-Sel-#") == 1
    assert lookup("Bot-##") is None
    assert lookup("Trans").arity == 2
    assert lookup("And₁-<:") is lookup("And1-<:")


def test_bad_bounds_validates():
    d = bad_bounds_derivation()
    assert validate(d) == []
    used = d.rules_used()
    for rule in ("Sub", "<:-Sel", "Sel-<:", "Trans", "All-I", "{}-I", "Def-Trm", "Let"):
        assert rule in used


def _rename_rule(d: Derivation, old: str, new: str) -> tuple[Derivation, tuple[int, ...]]:
    for path, node in d.walk():
        if node.rule == old:
            return d.replace_at(path, Derivation(new, node.conclusion, node.premises)), path
    raise AssertionError(old)


def test_system_mismatch_on_rename():
    d, path = _rename_rule(bad_bounds_derivation(), "Sel-<:", "Sel-<:-#")
    errs = validate(d)
    assert any(e.path == path and e.reason == SYSTEM for e in errs)


def test_unknown_rule():
    d, path = _rename_rule(bad_bounds_derivation(), "Trans", "Transitivity")
    assert [e.reason for e in validate(d) if e.path == path] == [UNKNOWN]


def test_def_typ_needs_tight_bounds():
    env = {}
    g = parse_context("s: Top", env)
    ok = B.def_typ(g, "A", TOP)
    assert validate(ok) == []
    j = ok.conclusion
    bad = Derivation("Def-Typ", Judgment(j.kind, g, subject=j.subject, type=parse_type("{A: Bot .. Top}")))
    assert [e.reason for e in validate(bad)] == [SHAPE]


def test_validation_reports_every_bad_node():
    d = bad_bounds_derivation()
    for old, new in (("Trans", "Nope1"), ("Def-Trm", "Nope2")):
        d, _ = _rename_rule(d, old, new)
    assert len([e for e in validate(d) if e.reason == UNKNOWN]) == 2


def test_all_i_freshness():
    env = {}
    g = parse_context("x: Top", env)
    x = env["x"]
    body = B.var(g.extend(x, TOP), x)
    # binder already in Γ: All-I over it must be rejected
    concl = typing(g, Lam(x, TOP, Var(x)), All(x, TOP, TOP))
    errs = validate(Derivation("All-I", concl, (body,)))
    assert errs and errs[0].reason in (SIDE, CONTEXT, SHAPE)


def test_duplicate_labels_rejected_by_andef():
    env = {}
    t = parse_term("nu(s: {a: Top} & {a: Top}) {a = s} /\\ {a = s}", env)
    g = Context().extend(t.self_, t.self_type)
    leg = B.def_trm("a", B.sub(B.var(g, t.self_), B.top(g, t.self_type)))
    d = B.and_def(leg, leg)
    assert any(e.reason == SIDE for e in validate(d))


def test_precise_discipline():
    env = {}
    g = parse_context("f: all(y: Top) Top", env)
    f = env["f"]
    for kind, rule in ((TYP_P, "Var!"), (TYP_I, "Var-##")):
        j = typing(g, App(f, f), TOP, kind)
        errs = validate(Derivation(rule, j, () if kind == TYP_P else (B.var(g, f, TYP_P),)))
        assert errs and errs[0].reason == SHAPE


def test_context_telescope_is_enforced():
    x, q = Name("x"), Name("q")
    g = Context().extend(x, parse_type("Top")).extend(Name("y"), TypDec("A", TOP, TOP))
    assert validate(B.var(g, x)) == []
    bad = Context().extend(x, parse_type("q.A", {"q": q}))
    assert [e.reason for e in validate(B.var(bad, x))] == [CONTEXT]


def test_precise_closure_examples():
    env = {}
    g = parse_context("f: all(y: Top) Top; x: mu(x: {A: Top .. Top} & {a: Top}); t: Top", env)
    assert len(precise_types_of_var(g, env["f"])) == 1
    assert precise_types_of_var(g, env["t"]) == [TOP]
    tys = precise_types_of_var(g, env["x"])
    expect = [
        g[env["x"]],
        parse_type("{A: Top .. Top} & {a: x.A}".replace("x.A", "Top")),
        parse_type("{A: Top .. Top}"),
        parse_type("{a: Top}"),
    ]
    # the opened body mentions x only through x itself, none here
    assert len(tys) == 4 and all(alpha_eq(a, b) for a, b in zip(tys, expect))
    for T, d in precise_closure(g, env["x"]):
        assert validate(d) == [] and d.conclusion.kind == TYP_P and alpha_eq(d.conclusion.type, T)
    with pytest.raises(UnboundVariable):
        precise_closure(g, Name("nope"))


def test_precise_closure_size_bound():
    env = {}
    g = parse_context("x: mu(x: {A: Top .. Top} & {B: Top .. Top} & {a: x.A})", env)
    t = g[env["x"]]
    ands, recs = str(t).count("And("), str(t).count("Rec(")
    # each intersection contributes both of its sides
    assert len(precise_types_of_var(g, env["x"])) == 1 + recs + 2 * ands


MUTATIONS = ("rule", "drop", "edit")


def test_mutations_of_bad_bounds_are_rejected():
    d = bad_bounds_derivation()
    seen = 0
    for rule, how, m in mutants(d):
        seen += 1
        if how != "edit":
            assert validate(m), (rule, how)
    assert seen > 18


def test_every_corpus_derivation_validates():
    files = sorted(data_dir().rglob("*.deriv.json"))
    assert files
    for f in files:
        assert validate(load_derivation(f)) == [], f.name


def test_json_round_trip_keeps_validity():
    d = bad_bounds_derivation()
    assert validate(derivation_from_obj(json.loads(json.dumps(derivation_to_obj(d))))) == []


def test_kind_constant():
    assert typing(Context(), Var(Name("x")), TOP).kind == TYP
