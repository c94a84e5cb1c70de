"""Small-step reduction for DOT terms.

Evaluation contexts are ``e ::= [] | let x = [] in t | let x = v in e``.
Answers are ``x | v | let x = v in n``.  A term that is not an answer
decomposes uniquely into a context and a focus; :func:`step` then fires
exactly one of Apply, Project, Let-Var or Let-Let at the focus, or
reports why none applies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

from .pretty import show, unique_names
from .syntax import (
    App,
    FldDef,
    Lam,
    Let,
    Name,
    New,
    SelTrm,
    Term,
    Var,
    def_items,
    free_vars,
    is_value,
    subst_var,
)

# ---------------------------------------------------------------- contexts


@dataclass(frozen=True)
class Hole:
    pass


@dataclass(frozen=True)
class LetHole:
    bound: Name
    body: Term


@dataclass(frozen=True)
class LetVal:
    bound: Name
    value: Term
    inner: EvalContext


EvalContext = Union[Hole, LetHole, LetVal]
HOLE = Hole()


def plug(e: EvalContext, t: Term) -> Term:
    """``e[t]``."""
    frames = []
    while not isinstance(e, Hole):
        frames.append(e)
        if isinstance(e, LetHole):
            break
        e = e.inner
    for f in reversed(frames):
        if isinstance(f, LetHole):
            t = Let(f.bound, t, f.body)
        else:
            t = Let(f.bound, f.value, t)
    return t


def bindings(e: EvalContext) -> dict[Name, Term]:
    """Values bound by the ``let x = v in`` frames of ``e``."""
    out = {}
    while isinstance(e, LetVal):
        out[e.bound] = e.value
        e = e.inner
    return out


def is_answer(t: Term) -> bool:
    while isinstance(t, Let) and is_value(t.rhs):
        t = t.body
    return isinstance(t, Var) or is_value(t)


@dataclass(frozen=True)
class AnswerMarker:
    pass


ANSWER = AnswerMarker()


def decompose(t: Term) -> tuple[EvalContext, Term] | AnswerMarker:
    """Split ``t`` into ``(e, focus)`` with ``t == plug(e, focus)``.

    The focus is an application or selection, a ``let x = y in t``
    (Let-Var) or a ``let x = (let y = s in t) in u`` (Let-Let).
    """
    frames: list[tuple[Name, Term]] = []
    cur = t
    while True:
        if isinstance(cur, Let):
            if is_value(cur.rhs):
                frames.append((cur.bound, cur.rhs))
                cur = cur.body
                continue
            if isinstance(cur.rhs, (Var, Let)):
                e, focus = HOLE, cur
            else:
                e, focus = LetHole(cur.bound, cur.body), cur.rhs
        elif isinstance(cur, (App, SelTrm)):
            e, focus = HOLE, cur
        else:
            return ANSWER
        for b, v in reversed(frames):
            e = LetVal(b, v, e)
        return e, focus


# ---------------------------------------------------------------- stepping

RULES = ("Apply", "Project", "Let-Var", "Let-Let")

HEAD_IS_OBJECT = "application head is an object"
SELECT_ON_LAMBDA = "selection on a lambda"
MISSING_LABEL = "missing field label"
UNBOUND = "unbound variable"
STUCK_REASONS = (HEAD_IS_OBJECT, SELECT_ON_LAMBDA, MISSING_LABEL, UNBOUND)


@dataclass(frozen=True)
class Stepped:
    rule: str
    next: Term
    congruence: bool = False  # fired under a non-empty context (Term rule)

    @property
    def rules(self) -> tuple[str, ...]:
        return ("Term", self.rule) if self.congruence else (self.rule,)


@dataclass(frozen=True)
class Answer:
    pass


@dataclass(frozen=True)
class Stuck:
    reason: str
    focus: Term


StepResult = Union[Stepped, Answer, Stuck]


def _match_apply(focus: Term, env: dict[Name, Term]) -> Term | None:
    if isinstance(focus, App) and isinstance(env.get(focus.fun), Lam):
        lam: Lam = env[focus.fun]
        return subst_var(lam.param, focus.arg, lam.body)
    return None


def _field(obj: New, label: str) -> FldDef | None:
    for d in def_items(obj.defs):
        if isinstance(d, FldDef) and d.label == label:
            return d
    return None


def _match_project(focus: Term, env: dict[Name, Term]) -> Term | None:
    if isinstance(focus, SelTrm) and isinstance(env.get(focus.receiver), New):
        obj: New = env[focus.receiver]
        d = _field(obj, focus.label)
        if d is not None:
            # the self variable is the let-bound variable
            return subst_var(obj.self_, focus.receiver, d.rhs)
    return None


def _match_let_var(focus: Term, env: dict[Name, Term]) -> Term | None:
    if isinstance(focus, Let) and isinstance(focus.rhs, Var):
        return subst_var(focus.bound, focus.rhs.name, focus.body)
    return None


def _match_let_let(focus: Term, env: dict[Name, Term]) -> Term | None:
    if isinstance(focus, Let) and isinstance(focus.rhs, Let):
        inner: Let = focus.rhs
        y, s, t = inner.bound, inner.rhs, inner.body
        u = focus.body
        if y in free_vars(u):
            # keep u's free y from being captured
            y2 = y.fresh()
            t = subst_var(y, y2, t)
            y = y2
        return Let(y, s, Let(focus.bound, t, u))
    return None


MATCHERS = {
    "Apply": _match_apply,
    "Project": _match_project,
    "Let-Var": _match_let_var,
    "Let-Let": _match_let_let,
}


def matching_rules(e: EvalContext, focus: Term) -> list[str]:
    """Every reduction rule whose left-hand side matches at the focus."""
    env = bindings(e)
    return [name for name, m in MATCHERS.items() if m(focus, env) is not None]


def _stuck(focus: Term, env: dict[Name, Term]) -> Stuck:
    if isinstance(focus, App):
        v = env.get(focus.fun)
        return Stuck(HEAD_IS_OBJECT if isinstance(v, New) else UNBOUND, focus)
    if isinstance(focus, SelTrm):
        v = env.get(focus.receiver)
        if isinstance(v, Lam):
            return Stuck(SELECT_ON_LAMBDA, focus)
        return Stuck(MISSING_LABEL if isinstance(v, New) else UNBOUND, focus)
    raise AssertionError("Let-Var and Let-Let always match their foci")


def step(t: Term) -> StepResult:
    dec = decompose(t)
    if isinstance(dec, AnswerMarker):
        return Answer()
    e, focus = dec
    env = bindings(e)
    for name, m in MATCHERS.items():
        out = m(focus, env)
        if out is not None:
            return Stepped(name, plug(e, out), congruence=not isinstance(e, Hole))
    return _stuck(focus, env)


# ---------------------------------------------------------------- traces

ANSWER_OUTCOME = "answer"
STUCK_OUTCOME = "stuck"
FUEL_OUTCOME = "fuel-exhausted"


@dataclass(frozen=True)
class Trace:
    states: tuple[Term, ...]
    rules: tuple[str, ...]
    outcome: str
    stuck: Stuck | None = field(default=None)

    @property
    def final(self) -> Term:
        return self.states[-1]

    def to_text(self) -> str:
        names = _trace_names(self)
        lines = [f"start    {show(self.states[0], names)}"]
        for rule, s in zip(self.rules, self.states[1:]):
            lines.append(f"{rule:<8} {show(s, names)}")
        if self.stuck is not None:
            lines.append(f"stuck    {self.stuck.reason}: {show(self.stuck.focus, names)}")
        else:
            lines.append(self.outcome)
        return "\n".join(lines)

    def to_json(self) -> str:
        names = _trace_names(self)
        obj = {
            "states": [show(s, names) for s in self.states],
            "rules": list(self.rules),
            "outcome": self.outcome,
        }
        if self.stuck is not None:
            obj["stuck"] = {"reason": self.stuck.reason, "focus": show(self.stuck.focus, names)}
        return json.dumps(obj, indent=1, ensure_ascii=False)


def _trace_names(tr: Trace) -> dict[Name, str]:
    free: list[Name] = []
    for s in tr.states:
        free.extend(sorted(free_vars(s), key=lambda n: n.uid))
    return unique_names(free)


def run(t: Term, fuel: int = 1000) -> Trace:
    states = [t]
    rules: list[str] = []
    for _ in range(fuel):
        r = step(states[-1])
        if isinstance(r, Answer):
            return Trace(tuple(states), tuple(rules), ANSWER_OUTCOME)
        if isinstance(r, Stuck):
            return Trace(tuple(states), tuple(rules), STUCK_OUTCOME, r)
        rules.append(r.rule)
        states.append(r.next)
    if is_answer(states[-1]):
        return Trace(tuple(states), tuple(rules), ANSWER_OUTCOME)
    return Trace(tuple(states), tuple(rules), FUEL_OUTCOME)
