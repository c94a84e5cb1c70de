import json
import random

from hypothesis import given

from conftest import seeds
from dotcalc.evaluator import (
    ANSWER,
    HEAD_IS_OBJECT,
    HOLE,
    MISSING_LABEL,
    SELECT_ON_LAMBDA,
    UNBOUND,
    Answer,
    LetHole,
    LetVal,
    Stepped,
    Stuck,
    decompose,
    is_answer,
    matching_rules,
    plug,
    run,
    step,
)
from dotcalc.gen import random_term
from dotcalc.parse import parse_term
from dotcalc.syntax import Let, Name, SelTrm, Var, alpha_eq, free_vars


def p(src):
    return parse_term(src, {})


def test_decompose_examples():
    t = p("let x = lambda(y: Top) y in x.a")
    e, focus = decompose(t)
    assert e == LetVal(t.bound, t.rhs, HOLE) and focus == SelTrm(t.bound, "a")
    t = p("let x = (let y = lambda(z: Top) z in y) in x")
    assert decompose(t) == (HOLE, t)
    assert decompose(p("x")) is ANSWER


def test_decompose_let_hole():
    t = p("let x = f f in x")
    e, focus = decompose(t)
    assert isinstance(e, LetHole) and plug(e, focus) == t


def test_apply():
    t = p("let f = lambda(z: Top) z in f f")
    r = step(t)
    assert isinstance(r, Stepped) and r.rule == "Apply" and r.rules == ("Term", "Apply")
    assert r.next == Let(t.bound, t.rhs, Var(t.bound))


def test_project_substitutes_self():
    t = p("let o = nu(x: {a: Top}) {a = x} in o.a")
    r = step(t)
    assert r.rule == "Project"
    assert r.next == Let(t.bound, t.rhs, Var(t.bound))


def test_stuck_reasons():
    t = p("let y = nu(y: {a: Top}) {a = y.a} in y y")
    assert step(t) == Stuck(HEAD_IS_OBJECT, t.body)
    assert step(p("let f = lambda(z: Top) z in f.a")).reason == SELECT_ON_LAMBDA
    assert step(p("let o = nu(s: {a: Top}) {a = s} in o.b")).reason == MISSING_LABEL
    assert step(p("f f")).reason == UNBOUND


def test_is_answer_examples():
    assert is_answer(p("lambda(x: Top) x"))
    assert is_answer(p("let x = lambda(y: Top) y in x"))
    assert not is_answer(p("let x = lambda(y: Top) y in x x"))


def test_run_examples():
    tr = run(p("let x = (let y = lambda(z: Top) z in y) in x"), 1000)
    assert tr.outcome == "answer" and tr.rules == ("Let-Let", "Let-Var") and len(tr.states) == 3
    lam = p("lambda(x: {A: {a: Top} .. all(z: Top) Top}) let y = nu(y: {a: Top}) {a = y.a} in y y")
    tr = run(lam, 1000)
    assert tr.outcome == "answer" and tr.rules == ()
    tr = run(p("let f = lambda(z: Top) z in f f"), 0)
    assert tr.outcome == "fuel-exhausted" and len(tr.states) == 1


def test_let_let_avoids_capture():
    # u mentions a free y; the inner binder must not capture it
    env = {}
    t = parse_term("let x = (let y = lambda(z: Top) z in y) in y", env)
    r = step(t)
    assert r.rule == "Let-Let"
    assert env["y"] in free_vars(r.next)


def test_trace_exports():
    tr = run(p("let x = (let y = lambda(z: Top) z in y) in x"), 10)
    lines = tr.to_text().splitlines()
    assert lines[0].startswith("start") and lines[1].startswith("Let-Let") and lines[-1] == "answer"
    obj = json.loads(tr.to_json())
    assert obj["rules"] == ["Let-Let", "Let-Var"] and len(obj["states"]) == 3 and obj["outcome"] == "answer"


def test_trace_consecutive_states():
    tr = run(p("let a = (let b = (let c = lambda(z: Top) z in c) in b) in a a"), 50)
    for s, rule, nxt in zip(tr.states, tr.rules, tr.states[1:]):
        r = step(s)
        assert r.rule == rule and alpha_eq(r.next, nxt)


@given(seeds)
def test_determinism_and_answers(seed):
    t = random_term(random.Random(seed), [], 4, [Name("p")])
    dec = decompose(t)
    if dec is ANSWER:
        assert is_answer(t) and isinstance(step(t), Answer)
        return
    e, focus = dec
    assert plug(e, focus) == t
    assert len(matching_rules(e, focus)) <= 1
    assert not is_answer(t) and not isinstance(step(t), Answer)
