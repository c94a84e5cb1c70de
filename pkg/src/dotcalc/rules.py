"""Judgments, derivation trees, the rule registry of all five systems, and
the derivation validator.

Each :class:`RuleSchema` carries a readable description of its premises,
conclusion and side conditions together with a checker.  A checker looks at
one node and its direct premises only; :func:`validate` walks the tree and
collects one :class:`ValidationError` per failing node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

from .pretty import show
from .syntax import (
    All,
    And,
    AndDef,
    App,
    Bot,
    Context,
    Def,
    Fld,
    FldDef,
    Lam,
    Let,
    Name,
    New,
    Rec,
    Sel,
    SelTrm,
    Term,
    Top,
    Type,
    TypDec,
    TypDef,
    Var,
    alpha_eq,
    ctx_alpha_eq,
    def_labels,
    free_vars,
    is_value,
    open_all,
    open_rec,
    subst_var,
)

TYP = "typ"
SUB = "subtyp"
TYP_T = "typ_tight"
SUB_T = "subtyp_tight"
TYP_P = "typ_precise"
TYP_I = "typ_invertible"
DEFS = "defs"

KINDS = (TYP, SUB, TYP_T, SUB_T, TYP_P, TYP_I, DEFS)
SUBTYPING_KINDS = (SUB, SUB_T)

# ValidationError reasons
UNKNOWN = "unknown-rule"
SYSTEM = "system-mismatch"
SHAPE = "shape-mismatch"
SIDE = "side-condition-failed"
CONTEXT = "context-mismatch"


# ---------------------------------------------------------------- judgments


@dataclass(frozen=True)
class Judgment:
    kind: str
    ctx: Context
    subject: Term | Def | None = None
    type: Type | None = None
    lhs: Type | None = None
    rhs: Type | None = None

    @property
    def is_subtyping(self) -> bool:
        return self.kind in SUBTYPING_KINDS

    def __str__(self) -> str:
        return show_judgment(self)


def typing(ctx: Context, t: Term, T: Type, kind: str = TYP) -> Judgment:
    return Judgment(kind, ctx, subject=t, type=T)


def subtyping(ctx: Context, S: Type, U: Type, kind: str = SUB) -> Judgment:
    return Judgment(kind, ctx, lhs=S, rhs=U)


def deftyping(ctx: Context, d: Def, T: Type) -> Judgment:
    return Judgment(DEFS, ctx, subject=d, type=T)


_TURNSTILE = {
    TYP: "⊢",
    SUB: "⊢",
    TYP_T: "⊢#",
    SUB_T: "⊢#",
    TYP_P: "⊢!",
    TYP_I: "⊢##",
    DEFS: "⊢",
}


def show_judgment(j: Judgment, names: dict[Name, str] | None = None) -> str:
    from .pretty import show_context

    ctx = show_context(j.ctx, names) or "∅"
    ts = _TURNSTILE.get(j.kind, "?")
    if j.is_subtyping:
        return f"{ctx} {ts} {show(j.lhs, names)} <: {show(j.rhs, names)}"
    return f"{ctx} {ts} {show(j.subject, names)} : {show(j.type, names)}"


def judgment_alpha_eq(a: Judgment, b: Judgment) -> bool:
    if a.kind != b.kind or not ctx_alpha_eq(a.ctx, b.ctx):
        return False
    pairs = [(a.subject, b.subject), (a.type, b.type), (a.lhs, b.lhs), (a.rhs, b.rhs)]
    for x, y in pairs:
        if (x is None) != (y is None):
            return False
        if x is not None and not alpha_eq(x, y):
            return False
    return True


def same_statement(a: Judgment, b: Judgment) -> bool:
    """Same subject/type (or lhs/rhs) up to alpha, ignoring kind and context."""
    if a.is_subtyping != b.is_subtyping:
        return False
    if a.is_subtyping:
        return alpha_eq(a.lhs, b.lhs) and alpha_eq(a.rhs, b.rhs)
    return alpha_eq(a.subject, b.subject) and alpha_eq(a.type, b.type)


# ---------------------------------------------------------------- derivations


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: Judgment
    premises: tuple[Derivation, ...] = ()

    def walk(self, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Derivation]]:
        """Pre-order traversal yielding (path, node)."""
        stack = [(path, self)]
        while stack:
            p, node = stack.pop()
            yield p, node
            for i in reversed(range(len(node.premises))):
                stack.append((p + (i,), node.premises[i]))

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def depth(self) -> int:
        if not self.premises:
            return 1
        return 1 + max(p.depth() for p in self.premises)

    def rules_used(self) -> set[str]:
        return {node.rule for _, node in self.walk()}

    def at(self, path: tuple[int, ...]) -> Derivation:
        node = self
        for i in path:
            node = node.premises[i]
        return node

    def replace_at(self, path: tuple[int, ...], new: Derivation) -> Derivation:
        if not path:
            return new
        i, rest = path[0], path[1:]
        premises = list(self.premises)
        premises[i] = premises[i].replace_at(rest, new)
        return Derivation(self.rule, self.conclusion, tuple(premises))


@dataclass(frozen=True)
class ValidationError:
    path: tuple[int, ...]
    reason: str
    detail: str

    def __str__(self) -> str:
        where = "/".join(map(str, self.path)) or "root"
        return f"[{where}] {self.reason}: {self.detail}"


class InvalidDerivation(ValueError):
    def __init__(self, errors: list[ValidationError]):
        self.errors = errors
        super().__init__("; ".join(map(str, errors[:3])))


# ---------------------------------------------------------------- schemas


class _Bad(Exception):
    def __init__(self, reason: str, detail: str):
        self.reason = reason
        self.detail = detail


def _need(cond: bool, reason: str, detail: str) -> None:
    if not cond:
        raise _Bad(reason, detail)


def _shape(cond: bool, detail: str) -> None:
    _need(cond, SHAPE, detail)


def _is(x: object, cls: type, what: str):
    _shape(isinstance(x, cls), what)
    return x


def _aeq(a, b, what: str) -> None:
    _shape(a is not None and b is not None and alpha_eq(a, b), what)


Checker = Callable[[Derivation], None]


@dataclass(frozen=True)
class RuleSchema:
    name: str
    system: str
    premise_kinds: tuple[str, ...]
    premise_shapes: tuple[str, ...]
    conclusion_shape: str
    side_conditions: tuple[str, ...]
    check: Checker = field(repr=False, compare=False)

    @property
    def arity(self) -> int:
        return len(self.premise_kinds)

    @property
    def family(self) -> str:
        """Registry grouping used for the per-system counts."""
        return _FAMILY[self.system]


_FAMILY = {
    TYP: "general-typing",
    SUB: "general-subtyping",
    DEFS: "definition",
    TYP_T: "tight",
    SUB_T: "tight",
    TYP_P: "precise",
    TYP_I: "invertible",
}


def _same_ctx(p: Judgment, j: Judgment, i: int) -> None:
    _need(ctx_alpha_eq(p.ctx, j.ctx), CONTEXT, f"premise {i} must use the conclusion's context")


def _extension(p: Judgment, j: Judgment, i: int, avoid: list) -> tuple[Name, Type]:
    """Premise ``i`` must live in ``Γ, y: T`` for a fresh ``y``; returns (y, T)."""
    _need(
        len(p.ctx) == len(j.ctx) + 1 and ctx_alpha_eq(p.ctx.prefix(len(j.ctx)), j.ctx),
        CONTEXT,
        f"premise {i} must extend the conclusion's context by one binding",
    )
    y, T = p.ctx.bindings[-1]
    _need(y not in j.ctx, SIDE, f"{y.name} must be fresh for the context")
    for x in avoid:
        _need(y not in free_vars(x), SIDE, f"{y.name} must not occur free in {show(x)}")
    return y, T


def _subject_var(j: Judgment) -> Name:
    return _is(j.subject, Var, "subject must be a variable").name


def _same_subject(p: Judgment, j: Judgment, i: int) -> None:
    _aeq(p.subject, j.subject, f"premise {i} must type the same subject")


# -- term typing (general, tight, precise share checkers)


def _chk_var(d: Derivation) -> None:
    j = d.conclusion
    x = _subject_var(j)
    T = j.ctx.get(x)
    _need(T is not None, SIDE, f"Γ({x.name}) is undefined")
    _aeq(T, j.type, f"type must be Γ({x.name})")


def _chk_all_i(d: Derivation) -> None:
    j, (p,) = d.conclusion, d.premises
    lam = _is(j.subject, Lam, "subject must be a lambda")
    ty = _is(j.type, All, "type must be a dependent function type")
    _aeq(lam.param_type, ty.domain, "parameter type must equal the domain")
    y, T = _extension(p.conclusion, j, 0, [lam, ty])
    _aeq(T, lam.param_type, "premise must bind the parameter at its declared type")
    _need(y not in free_vars(lam.param_type), SIDE, "x ∉ fv(T)")
    _aeq(p.conclusion.subject, subst_var(lam.param, y, lam.body), "premise must type the body")
    _aeq(p.conclusion.type, open_all(ty, y), "premise type must be the codomain")


def _chk_all_e(d: Derivation) -> None:
    j, (p0, p1) = d.conclusion, d.premises
    app = _is(j.subject, App, "subject must be an application")
    for i, p in enumerate(d.premises):
        _same_ctx(p.conclusion, j, i)
    _aeq(p0.conclusion.subject, Var(app.fun), "premise 0 must type the function")
    fty = _is(p0.conclusion.type, All, "premise 0 must give a dependent function type")
    _aeq(p1.conclusion.subject, Var(app.arg), "premise 1 must type the argument")
    _aeq(p1.conclusion.type, fty.domain, "argument type must be the domain")
    _aeq(j.type, open_all(fty, app.arg), "type must be the codomain at the argument")


def _chk_new_i(d: Derivation) -> None:
    j, (p,) = d.conclusion, d.premises
    obj = _is(j.subject, New, "subject must be an object")
    ty = _is(j.type, Rec, "type must be a recursive type")
    _aeq(Rec(obj.self_, obj.self_type), ty, "type must be mu of the object's self type")
    y, T = _extension(p.conclusion, j, 0, [obj])
    self_t = subst_var(obj.self_, y, obj.self_type)
    _aeq(T, self_t, "premise must bind the self variable at the self type")
    _aeq(p.conclusion.subject, subst_var(obj.self_, y, obj.defs), "premise must type the definitions")
    _aeq(p.conclusion.type, self_t, "definitions must have the self type")


def _chk_fld_e(d: Derivation) -> None:
    j, (p,) = d.conclusion, d.premises
    sel = _is(j.subject, SelTrm, "subject must be a selection")
    _same_ctx(p.conclusion, j, 0)
    _aeq(p.conclusion.subject, Var(sel.receiver), "premise must type the receiver")
    f = _is(p.conclusion.type, Fld, "premise must give a field declaration")
    _shape(f.label == sel.label, "field label must match the selection")
    _aeq(j.type, f.type, "type must be the field type")


def _chk_let(d: Derivation) -> None:
    j, (p0, p1) = d.conclusion, d.premises
    let = _is(j.subject, Let, "subject must be a let")
    _same_ctx(p0.conclusion, j, 0)
    _aeq(p0.conclusion.subject, let.rhs, "premise 0 must type the bound term")
    y, T = _extension(p1.conclusion, j, 1, [let])
    _aeq(T, p0.conclusion.type, "premise 1 must bind x at the bound term's type")
    _aeq(p1.conclusion.subject, subst_var(let.bound, y, let.body), "premise 1 must type the body")
    _aeq(p1.conclusion.type, j.type, "type must be the body type")
    _need(y not in free_vars(j.type), SIDE, "x ∉ fv(U)")


def _chk_rec_i(d: Derivation) -> None:
    j, (p,) = d.conclusion, d.premises
    x = _subject_var(j)
    _same_ctx(p.conclusion, j, 0)
    _same_subject(p.conclusion, j, 0)
    ty = _is(j.type, Rec, "type must be a recursive type")
    _aeq(p.conclusion.type, open_rec(ty, x), "premise type must be the opened body")


def _chk_rec_e(d: Derivation) -> None:
    j, (p,) = d.conclusion, d.premises
    x = _subject_var(j)
    _same_ctx(p.conclusion, j, 0)
    _same_subject(p.conclusion, j, 0)
    ty = _is(p.conclusion.type, Rec, "premise must give a recursive type")
    _aeq(j.type, open_rec(ty, x), "type must be the opened body")


def _chk_and_i(d: Derivation) -> None:
    j = d.conclusion
    _subject_var(j)
    ty = _is(j.type, And, "type must be an intersection")
    for i, (p, part) in enumerate(zip(d.premises, (ty.left, ty.right))):
        _same_ctx(p.conclusion, j, i)
        _same_subject(p.conclusion, j, i)
        _aeq(p.conclusion.type, part, f"premise {i} must give the {'left' if i == 0 else 'right'} conjunct")


def _chk_sub(d: Derivation) -> None:
    j, (p0, p1) = d.conclusion, d.premises
    for i, p in enumerate(d.premises):
        _same_ctx(p.conclusion, j, i)
    _same_subject(p0.conclusion, j, 0)
    _aeq(p1.conclusion.lhs, p0.conclusion.type, "subtyping must start at the premise type")
    _aeq(j.type, p1.conclusion.rhs, "type must be the supertype")


def _chk_and_e(side: int) -> Checker:
    def check(d: Derivation) -> None:
        j, (p,) = d.conclusion, d.premises
        _subject_var(j)
        _same_ctx(p.conclusion, j, 0)
        _same_subject(p.conclusion, j, 0)
        ty = _is(p.conclusion.type, And, "premise must give an intersection")
        _aeq(j.type, ty.left if side == 1 else ty.right, f"type must be conjunct {side}")

    return check


# -- subtyping


def _chk_top(d: Derivation) -> None:
    _is(d.conclusion.rhs, Top, "supertype must be Top")


def _chk_bot(d: Derivation) -> None:
    _is(d.conclusion.lhs, Bot, "subtype must be Bot")


def _chk_refl(d: Derivation) -> None:
    _aeq(d.conclusion.lhs, d.conclusion.rhs, "both sides must be equal")


def _chk_trans(d: Derivation) -> None:
    j, (p0, p1) = d.conclusion, d.premises
    for i, p in enumerate(d.premises):
        _same_ctx(p.conclusion, j, i)
    _aeq(p0.conclusion.lhs, j.lhs, "premise 0 must start at the subtype")
    _aeq(p0.conclusion.rhs, p1.conclusion.lhs, "premises must meet at the middle type")
    _aeq(p1.conclusion.rhs, j.rhs, "premise 1 must end at the supertype")


def _chk_and_sub(side: int) -> Checker:
    def check(d: Derivation) -> None:
        j = d.conclusion
        ty = _is(j.lhs, And, "subtype must be an intersection")
        _aeq(j.rhs, ty.left if side == 1 else ty.right, f"supertype must be conjunct {side}")

    return check


def _chk_sub_and(d: Derivation) -> None:
    j = d.conclusion
    ty = _is(j.rhs, And, "supertype must be an intersection")
    for i, (p, part) in enumerate(zip(d.premises, (ty.left, ty.right))):
        _same_ctx(p.conclusion, j, i)
        _aeq(p.conclusion.lhs, j.lhs, f"premise {i} must start at the subtype")
        _aeq(p.conclusion.rhs, part, f"premise {i} must end at conjunct {i + 1}")


def _chk_fld_fld(d: Derivation) -> None:
    j, (p,) = d.conclusion, d.premises
    lo = _is(j.lhs, Fld, "subtype must be a field declaration")
    hi = _is(j.rhs, Fld, "supertype must be a field declaration")
    _shape(lo.label == hi.label, "field labels must agree")
    _same_ctx(p.conclusion, j, 0)
    _aeq(p.conclusion.lhs, lo.type, "premise must start at the subtype's field type")
    _aeq(p.conclusion.rhs, hi.type, "premise must end at the supertype's field type")


def _chk_typ_typ(d: Derivation) -> None:
    j, (p0, p1) = d.conclusion, d.premises
    lo = _is(j.lhs, TypDec, "subtype must be a type declaration")
    hi = _is(j.rhs, TypDec, "supertype must be a type declaration")
    _shape(lo.label == hi.label, "type labels must agree")
    for i, p in enumerate(d.premises):
        _same_ctx(p.conclusion, j, i)
    _aeq(p0.conclusion.lhs, hi.lower, "premise 0 must be S2 <: S1 (lower bounds, contravariant)")
    _aeq(p0.conclusion.rhs, lo.lower, "premise 0 must be S2 <: S1 (lower bounds, contravariant)")
    _aeq(p1.conclusion.lhs, lo.upper, "premise 1 must be T1 <: T2 (upper bounds)")
    _aeq(p1.conclusion.rhs, hi.upper, "premise 1 must be T1 <: T2 (upper bounds)")


def _chk_all_all(d: Derivation) -> None:
    j, (p0, p1) = d.conclusion, d.premises
    lo = _is(j.lhs, All, "subtype must be a dependent function type")
    hi = _is(j.rhs, All, "supertype must be a dependent function type")
    _same_ctx(p0.conclusion, j, 0)
    _aeq(p0.conclusion.lhs, hi.domain, "premise 0 must be S2 <: S1 (domains, contravariant)")
    _aeq(p0.conclusion.rhs, lo.domain, "premise 0 must be S2 <: S1 (domains, contravariant)")
    y, T = _extension(p1.conclusion, j, 1, [lo, hi])
    _aeq(T, hi.domain, "premise 1 must bind the parameter at the smaller domain")
    _aeq(p1.conclusion.lhs, open_all(lo, y), "premise 1 must start at the subtype's codomain")
    _aeq(p1.conclusion.rhs, open_all(hi, y), "premise 1 must end at the supertype's codomain")


def _sel_premise(d: Derivation) -> tuple[Sel, TypDec]:
    j, (p,) = d.conclusion, d.premises
    _same_ctx(p.conclusion, j, 0)
    return p.conclusion, _is(p.conclusion.type, TypDec, "premise must give a type declaration")


def _chk_sub_sel(tight: bool) -> Checker:
    def check(d: Derivation) -> None:
        j = d.conclusion
        sel = _is(j.rhs, Sel, "supertype must be a type projection")
        pj, dec = _sel_premise(d)
        _aeq(pj.subject, Var(sel.receiver), "premise must type the projection's receiver")
        _shape(dec.label == sel.label, "type labels must agree")
        if tight:
            _need(alpha_eq(dec.lower, dec.upper), SIDE, "precise bounds must be tight {A: T..T}")
        _aeq(j.lhs, dec.lower, "subtype must be the lower bound")

    return check


def _chk_sel_sub(tight: bool) -> Checker:
    def check(d: Derivation) -> None:
        j = d.conclusion
        sel = _is(j.lhs, Sel, "subtype must be a type projection")
        pj, dec = _sel_premise(d)
        _aeq(pj.subject, Var(sel.receiver), "premise must type the projection's receiver")
        _shape(dec.label == sel.label, "type labels must agree")
        if tight:
            _need(alpha_eq(dec.lower, dec.upper), SIDE, "precise bounds must be tight {A: T..T}")
        _aeq(j.rhs, dec.upper, "supertype must be the upper bound")

    return check


# -- definitions


def _chk_def_trm(d: Derivation) -> None:
    j, (p,) = d.conclusion, d.premises
    fd = _is(j.subject, FldDef, "subject must be a field definition")
    f = _is(j.type, Fld, "type must be a field declaration")
    _shape(fd.label == f.label, "labels must agree")
    _same_ctx(p.conclusion, j, 0)
    _aeq(p.conclusion.subject, fd.rhs, "premise must type the field's right-hand side")
    _aeq(p.conclusion.type, f.type, "premise type must be the declared field type")


def _chk_def_typ(d: Derivation) -> None:
    j = d.conclusion
    td = _is(j.subject, TypDef, "subject must be a type definition")
    dec = _is(j.type, TypDec, "type must be a type declaration")
    _shape(td.label == dec.label, "labels must agree")
    _aeq(dec.lower, td.alias, "lower bound must equal the alias ({A = T}: {A: T..T})")
    _aeq(dec.upper, td.alias, "upper bound must equal the alias ({A = T}: {A: T..T})")


def _chk_anddef_i(d: Derivation) -> None:
    j = d.conclusion
    ad = _is(j.subject, AndDef, "subject must be an aggregate definition")
    ty = _is(j.type, And, "type must be an intersection")
    for i, (p, sub, part) in enumerate(zip(d.premises, (ad.left, ad.right), (ty.left, ty.right))):
        _same_ctx(p.conclusion, j, i)
        _aeq(p.conclusion.subject, sub, f"premise {i} must type definition part {i + 1}")
        _aeq(p.conclusion.type, part, f"premise {i} must give conjunct {i + 1}")
    overlap = set(def_labels(ad.left)) & set(def_labels(ad.right))
    _need(not overlap, SIDE, f"dom(d1), dom(d2) not disjoint: {', '.join(sorted(overlap))}")


# -- invertible


def _inv_subject(j: Judgment, value: bool) -> None:
    if value:
        _shape(is_value(j.subject), "subject must be a value")
    else:
        _subject_var(j)


def _chk_inv_base(value: bool) -> Checker:
    def check(d: Derivation) -> None:
        j, (p,) = d.conclusion, d.premises
        _inv_subject(j, value)
        _same_ctx(p.conclusion, j, 0)
        _same_subject(p.conclusion, j, 0)
        _aeq(p.conclusion.type, j.type, "type must be the precise type")

    return check


def _chk_inv_fld(d: Derivation) -> None:
    j, (p0, p1) = d.conclusion, d.premises
    _inv_subject(j, False)
    hi = _is(j.type, Fld, "type must be a field declaration")
    for i, p in enumerate(d.premises):
        _same_ctx(p.conclusion, j, i)
    _same_subject(p0.conclusion, j, 0)
    lo = _is(p0.conclusion.type, Fld, "premise 0 must give a field declaration")
    _shape(lo.label == hi.label, "field labels must agree")
    _aeq(p1.conclusion.lhs, lo.type, "premise 1 must start at the field type")
    _aeq(p1.conclusion.rhs, hi.type, "premise 1 must end at the new field type")


def _chk_inv_typ(d: Derivation) -> None:
    j, (p0, p1, p2) = d.conclusion, d.premises
    _inv_subject(j, False)
    hi = _is(j.type, TypDec, "type must be a type declaration")
    for i, p in enumerate(d.premises):
        _same_ctx(p.conclusion, j, i)
    _same_subject(p0.conclusion, j, 0)
    lo = _is(p0.conclusion.type, TypDec, "premise 0 must give a type declaration")
    _shape(lo.label == hi.label, "type labels must agree")
    _aeq(p1.conclusion.lhs, hi.lower, "premise 1 must be T' <: T")
    _aeq(p1.conclusion.rhs, lo.lower, "premise 1 must be T' <: T")
    _aeq(p2.conclusion.lhs, lo.upper, "premise 2 must be U <: U'")
    _aeq(p2.conclusion.rhs, hi.upper, "premise 2 must be U <: U'")


def _chk_inv_rec(d: Derivation) -> None:
    j, (p,) = d.conclusion, d.premises
    x = _subject_var(j)
    _same_ctx(p.conclusion, j, 0)
    _same_subject(p.conclusion, j, 0)
    ty = _is(j.type, Rec, "type must be a recursive type")
    _aeq(p.conclusion.type, open_rec(ty, x), "premise type must be the opened body")


def _chk_inv_all(value: bool) -> Checker:
    def check(d: Derivation) -> None:
        j, (p0, p1, p2) = d.conclusion, d.premises
        _inv_subject(j, value)
        hi = _is(j.type, All, "type must be a dependent function type")
        _same_ctx(p0.conclusion, j, 0)
        _same_ctx(p1.conclusion, j, 1)
        _same_subject(p0.conclusion, j, 0)
        lo = _is(p0.conclusion.type, All, "premise 0 must give a dependent function type")
        _aeq(p1.conclusion.lhs, hi.domain, "premise 1 must be S' <: S")
        _aeq(p1.conclusion.rhs, lo.domain, "premise 1 must be S' <: S")
        y, T = _extension(p2.conclusion, j, 2, [lo, hi])
        _aeq(T, hi.domain, "premise 2 must bind the parameter at S'")
        _aeq(p2.conclusion.lhs, open_all(lo, y), "premise 2 must start at the old codomain")
        _aeq(p2.conclusion.rhs, open_all(hi, y), "premise 2 must end at the new codomain")

    return check


def _chk_inv_and(value: bool) -> Checker:
    def check(d: Derivation) -> None:
        j = d.conclusion
        _inv_subject(j, value)
        ty = _is(j.type, And, "type must be an intersection")
        for i, (p, part) in enumerate(zip(d.premises, (ty.left, ty.right))):
            _same_ctx(p.conclusion, j, i)
            _same_subject(p.conclusion, j, i)
            _aeq(p.conclusion.type, part, f"premise {i} must give conjunct {i + 1}")

    return check


def _chk_inv_sel(value: bool) -> Checker:
    def check(d: Derivation) -> None:
        j, (p0, p1) = d.conclusion, d.premises
        _inv_subject(j, value)
        sel = _is(j.type, Sel, "type must be a type projection")
        for i, p in enumerate(d.premises):
            _same_ctx(p.conclusion, j, i)
        _same_subject(p0.conclusion, j, 0)
        _aeq(p1.conclusion.subject, Var(sel.receiver), "premise 1 must type the projection's receiver")
        dec = _is(p1.conclusion.type, TypDec, "premise 1 must give a type declaration")
        _shape(dec.label == sel.label, "type labels must agree")
        _need(alpha_eq(dec.lower, dec.upper), SIDE, "precise bounds must be tight {A: S..S}")
        _aeq(p0.conclusion.type, dec.lower, "premise 0 must give the alias type")

    return check


def _chk_inv_top(value: bool) -> Checker:
    def check(d: Derivation) -> None:
        j, (p,) = d.conclusion, d.premises
        _inv_subject(j, value)
        _is(j.type, Top, "type must be Top")
        _same_ctx(p.conclusion, j, 0)
        _same_subject(p.conclusion, j, 0)

    return check


# ---------------------------------------------------------------- registry


def _schema(name, system, premises, conclusion, check, side=()) -> RuleSchema:
    kinds = tuple(k for k, _ in premises)
    shapes = tuple(s for _, s in premises)
    return RuleSchema(name, system, kinds, shapes, conclusion, tuple(side), check)


def _typing_rules(tight: bool) -> list[RuleSchema]:
    sfx = "-#" if tight else ""
    T = TYP_T if tight else TYP
    S = SUB_T if tight else SUB
    return [
        _schema(f"Var{sfx}", T, [], "Γ ⊢ x: T", _chk_var, ["Γ(x) = T"]),
        _schema(
            f"All-I{sfx}", T, [(TYP, "Γ, x: T ⊢ t: U")], "Γ ⊢ λ(x: T)t: ∀(x: T)U", _chk_all_i,
            ["x ∉ fv(T)"],
        ),
        _schema(
            f"All-E{sfx}", T, [(T, "Γ ⊢ x: ∀(z: S)T"), (T, "Γ ⊢ y: S")], "Γ ⊢ x y: [z:=y]T", _chk_all_e
        ),
        _schema(f"{{}}-I{sfx}", T, [(DEFS, "Γ, x: T ⊢ d: T")], "Γ ⊢ ν(x: T)d: μ(x: T)", _chk_new_i),
        _schema(f"{{}}-E{sfx}", T, [(T, "Γ ⊢ x: {a: T}")], "Γ ⊢ x.a: T", _chk_fld_e),
        _schema(
            f"Let{sfx}", T, [(T, "Γ ⊢ t: T"), (TYP, "Γ, x: T ⊢ u: U")], "Γ ⊢ let x = t in u: U",
            _chk_let, ["x ∉ fv(U)"],
        ),
        _schema(f"Rec-I{sfx}", T, [(T, "Γ ⊢ x: T")], "Γ ⊢ x: μ(x: T)", _chk_rec_i),
        _schema(f"Rec-E{sfx}", T, [(T, "Γ ⊢ x: μ(z: T)")], "Γ ⊢ x: [z:=x]T", _chk_rec_e),
        _schema(f"And-I{sfx}", T, [(T, "Γ ⊢ x: T"), (T, "Γ ⊢ x: U")], "Γ ⊢ x: T ∧ U", _chk_and_i),
        _schema(f"Sub{sfx}", T, [(T, "Γ ⊢ t: T"), (S, "Γ ⊢ T <: U")], "Γ ⊢ t: U", _chk_sub),
    ]


def _subtyping_rules(tight: bool) -> list[RuleSchema]:
    sfx = "-#" if tight else ""
    S = SUB_T if tight else SUB
    T = TYP_T if tight else TYP
    rules = [
        _schema(f"Top{sfx}", S, [], "Γ ⊢ T <: ⊤", _chk_top),
        _schema(f"Bot{sfx}", S, [], "Γ ⊢ ⊥ <: T", _chk_bot),
        _schema(f"Refl{sfx}", S, [], "Γ ⊢ T <: T", _chk_refl),
        _schema(f"Trans{sfx}", S, [(S, "Γ ⊢ S <: T"), (S, "Γ ⊢ T <: U")], "Γ ⊢ S <: U", _chk_trans),
        _schema(f"And1-<:{sfx}", S, [], "Γ ⊢ T ∧ U <: T", _chk_and_sub(1)),
        _schema(f"And2-<:{sfx}", S, [], "Γ ⊢ T ∧ U <: U", _chk_and_sub(2)),
        _schema(f"<:-And{sfx}", S, [(S, "Γ ⊢ S <: T"), (S, "Γ ⊢ S <: U")], "Γ ⊢ S <: T ∧ U", _chk_sub_and),
        _schema(f"Fld-<:-Fld{sfx}", S, [(S, "Γ ⊢ T <: U")], "Γ ⊢ {a: T} <: {a: U}", _chk_fld_fld),
        _schema(
            f"Typ-<:-Typ{sfx}", S, [(S, "Γ ⊢ S2 <: S1"), (S, "Γ ⊢ T1 <: T2")],
            "Γ ⊢ {A: S1..T1} <: {A: S2..T2}", _chk_typ_typ,
        ),
        _schema(
            f"All-<:-All{sfx}", S, [(S, "Γ ⊢ S2 <: S1"), (SUB, "Γ, x: S2 ⊢ T1 <: T2")],
            "Γ ⊢ ∀(x: S1)T1 <: ∀(x: S2)T2", _chk_all_all,
        ),
    ]
    if tight:
        rules += [
            _schema("<:-Sel-#", S, [(TYP_P, "Γ ⊢! x: {A: T..T}")], "Γ ⊢# T <: x.A", _chk_sub_sel(True),
                    ["bounds tight"]),
            _schema("Sel-<:-#", S, [(TYP_P, "Γ ⊢! x: {A: T..T}")], "Γ ⊢# x.A <: T", _chk_sel_sub(True),
                    ["bounds tight"]),
        ]
    else:
        rules += [
            _schema("<:-Sel", S, [(T, "Γ ⊢ x: {A: S..T}")], "Γ ⊢ S <: x.A", _chk_sub_sel(False)),
            _schema("Sel-<:", S, [(T, "Γ ⊢ x: {A: S..T}")], "Γ ⊢ x.A <: T", _chk_sel_sub(False)),
        ]
    return rules


def _definition_rules() -> list[RuleSchema]:
    return [
        _schema("Def-Trm", DEFS, [(TYP, "Γ ⊢ t: U")], "Γ ⊢ {a = t}: {a: U}", _chk_def_trm),
        _schema("Def-Typ", DEFS, [], "Γ ⊢ {A = T}: {A: T..T}", _chk_def_typ),
        _schema(
            "AndDef-I", DEFS, [(DEFS, "Γ ⊢ d1: T1"), (DEFS, "Γ ⊢ d2: T2")], "Γ ⊢ d1 ∧ d2: T1 ∧ T2",
            _chk_anddef_i, ["dom(d1), dom(d2) disjoint"],
        ),
    ]


def _precise_rules() -> list[RuleSchema]:
    return [
        _schema("Var!", TYP_P, [], "Γ ⊢! x: T", _chk_var, ["Γ(x) = T"]),
        _schema("Rec-E!", TYP_P, [(TYP_P, "Γ ⊢! x: μ(z: T)")], "Γ ⊢! x: [z:=x]T", _chk_rec_e),
        _schema("And1-E!", TYP_P, [(TYP_P, "Γ ⊢! x: T ∧ U")], "Γ ⊢! x: T", _chk_and_e(1)),
        _schema("And2-E!", TYP_P, [(TYP_P, "Γ ⊢! x: T ∧ U")], "Γ ⊢! x: U", _chk_and_e(2)),
        _schema("All-I!", TYP_P, [(TYP, "Γ, x: T ⊢ t: U")], "Γ ⊢! λ(x: T)t: ∀(x: T)U", _chk_all_i,
                ["x ∉ fv(T)"]),
        _schema("{}-I!", TYP_P, [(DEFS, "Γ, x: T ⊢ d: T")], "Γ ⊢! ν(x: T)d: μ(x: T)", _chk_new_i),
    ]


def _invertible_rules() -> list[RuleSchema]:
    I = TYP_I
    return [
        _schema("Var-##", I, [(TYP_P, "Γ ⊢! x: T")], "Γ ⊢## x: T", _chk_inv_base(False)),
        _schema("Fld-<:-##", I, [(I, "Γ ⊢## x: {a: T}"), (SUB_T, "Γ ⊢# T <: U")], "Γ ⊢## x: {a: U}",
                _chk_inv_fld),
        _schema(
            "Typ-<:-##", I, [(I, "Γ ⊢## x: {A: T..U}"), (SUB_T, "Γ ⊢# T' <: T"), (SUB_T, "Γ ⊢# U <: U'")],
            "Γ ⊢## x: {A: T'..U'}", _chk_inv_typ,
        ),
        _schema("Rec-I-##", I, [(I, "Γ ⊢## x: T")], "Γ ⊢## x: μ(x: T)", _chk_inv_rec),
        _schema(
            "All-I-##", I, [(I, "Γ ⊢## x: ∀(z: S)T"), (SUB_T, "Γ ⊢# S' <: S"), (SUB, "Γ, y: S' ⊢ T <: T'")],
            "Γ ⊢## x: ∀(z: S')T'", _chk_inv_all(False),
        ),
        _schema("And-I-##", I, [(I, "Γ ⊢## x: T"), (I, "Γ ⊢## x: U")], "Γ ⊢## x: T ∧ U",
                _chk_inv_and(False)),
        _schema("Sel-##", I, [(I, "Γ ⊢## x: S"), (TYP_P, "Γ ⊢! y: {A: S..S}")], "Γ ⊢## x: y.A",
                _chk_inv_sel(False)),
        _schema("Top-##", I, [(I, "Γ ⊢## x: T")], "Γ ⊢## x: ⊤", _chk_inv_top(False)),
        _schema("Val-##", I, [(TYP_P, "Γ ⊢! v: T")], "Γ ⊢## v: T", _chk_inv_base(True)),
        _schema(
            "All-v-##", I, [(I, "Γ ⊢## v: ∀(z: S)T"), (SUB_T, "Γ ⊢# S' <: S"), (SUB, "Γ, y: S' ⊢ T <: T'")],
            "Γ ⊢## v: ∀(z: S')T'", _chk_inv_all(True),
        ),
        _schema("And-v-##", I, [(I, "Γ ⊢## v: T"), (I, "Γ ⊢## v: U")], "Γ ⊢## v: T ∧ U",
                _chk_inv_and(True)),
        _schema("Sel-v-##", I, [(I, "Γ ⊢## v: S"), (TYP_P, "Γ ⊢! y: {A: S..S}")], "Γ ⊢## v: y.A",
                _chk_inv_sel(True)),
        _schema("Top-v-##", I, [(I, "Γ ⊢## v: T")], "Γ ⊢## v: ⊤", _chk_inv_top(True)),
    ]


_REGISTRY: tuple[RuleSchema, ...] = tuple(
    _typing_rules(False)
    + _subtyping_rules(False)
    + _definition_rules()
    + _typing_rules(True)
    + _subtyping_rules(True)
    + _precise_rules()
    + _invertible_rules()
)
_BY_NAME: dict[str, RuleSchema] = {r.name: r for r in _REGISTRY}
assert len(_BY_NAME) == len(_REGISTRY), "rule names must be unique"

EXPECTED_COUNTS = {
    "general-typing": 10,
    "general-subtyping": 12,
    "definition": 3,
    "tight": 22,
    "precise": 6,
    "invertible": 13,
}

_ALIASES = str.maketrans({"₁": "1", "₂": "2"})


def rule_registry() -> tuple[RuleSchema, ...]:
    return _REGISTRY


def normalize_rule_name(name: str) -> str:
    return name.translate(_ALIASES)


def lookup(name: str) -> RuleSchema | None:
    return _BY_NAME.get(normalize_rule_name(name))


# ---------------------------------------------------------------- validation


def _judgment_shape_errors(j: Judgment) -> list[str]:
    problems = []
    if j.kind not in KINDS:
        return [f"unknown judgment kind {j.kind!r}"]
    if j.is_subtyping:
        if not isinstance(j.lhs, Type) or not isinstance(j.rhs, Type):
            problems.append("subtyping judgment needs lhs and rhs types")
    elif j.kind == DEFS:
        if not isinstance(j.subject, Def) or not isinstance(j.type, Type):
            problems.append("definition judgment needs definitions and a type")
    else:
        if not isinstance(j.subject, Term) or not isinstance(j.type, Type):
            problems.append("typing judgment needs a term and a type")
        elif j.kind in (TYP_P, TYP_I) and not (isinstance(j.subject, Var) or is_value(j.subject)):
            problems.append(f"{j.kind} subjects must be variables or values")
    return problems


def check_node(d: Derivation) -> tuple[str, str] | None:
    """Check one node against its schema; returns (reason, detail) or None."""
    schema = lookup(d.rule)
    if schema is None:
        return UNKNOWN, f"no rule named {d.rule!r}"
    j = d.conclusion
    if schema.system != j.kind:
        return SYSTEM, f"{schema.name} concludes {schema.system} judgments, not {j.kind}"
    shape_errors = _judgment_shape_errors(j)
    if shape_errors:
        return SHAPE, shape_errors[0]
    tele = j.ctx.telescope_errors()
    if tele:
        return CONTEXT, tele[0]
    if len(d.premises) != schema.arity:
        return SHAPE, f"{schema.name} takes {schema.arity} premise(s), got {len(d.premises)}"
    for i, (p, kind) in enumerate(zip(d.premises, schema.premise_kinds)):
        if p.conclusion.kind != kind:
            return SHAPE, f"premise {i} of {schema.name} must be a {kind} judgment, got {p.conclusion.kind}"
        if _judgment_shape_errors(p.conclusion):
            return SHAPE, f"premise {i} is malformed"
    try:
        schema.check(d)
    except _Bad as bad:
        return bad.reason, f"{schema.name}: {bad.detail}"
    return None


def validate(d: Derivation) -> list[ValidationError]:
    """All node errors in pre-order; an empty list means the tree is valid."""
    errors = []
    for path, node in d.walk():
        problem = check_node(node)
        if problem is not None:
            errors.append(ValidationError(path, *problem))
    return errors


def is_valid(d: Derivation) -> bool:
    return all(check_node(node) is None for _, node in d.walk())


def require_valid(d: Derivation) -> Derivation:
    errors = validate(d)
    if errors:
        raise InvalidDerivation(errors)
    return d


# ---------------------------------------------------------------- precise closure


class UnboundVariable(KeyError):
    pass


def precise_closure(g: Context, x: Name) -> list[tuple[Type, Derivation]]:
    """Every precise type of ``x`` with a derivation concluding ``Γ ⊢! x: T``.

    Starts from ``Γ(x)`` (Var!) and repeatedly opens a top-level recursive
    type (Rec-E!) or splits a top-level intersection (And1-E!/And2-E!).
    Each step removes a head constructor, so the loop terminates.
    """
    T = g.get(x)
    if T is None:
        raise UnboundVariable(x)
    out: list[tuple[Type, Derivation]] = []
    todo = [Derivation("Var!", typing(g, Var(x), T, TYP_P))]
    while todo:
        d = todo.pop(0)
        ty = d.conclusion.type
        if not any(alpha_eq(ty, seen) for seen, _ in out):
            out.append((ty, d))
        match ty:
            case Rec():
                todo.append(Derivation("Rec-E!", typing(g, Var(x), open_rec(ty, x), TYP_P), (d,)))
            case And(l, r):
                todo.append(Derivation("And1-E!", typing(g, Var(x), l, TYP_P), (d,)))
                todo.append(Derivation("And2-E!", typing(g, Var(x), r, TYP_P), (d,)))
    return out


def precise_types_of_var(g: Context, x: Name) -> list[Type]:
    return [t for t, _ in precise_closure(g, x)]


def precise_derivation(g: Context, x: Name, T: Type) -> Derivation | None:
    for ty, d in precise_closure(g, x):
        if alpha_eq(ty, T):
            return d
    return None
