"""Derivation transformers for the soundness lemmas.

Every function here is constructive: it rebuilds a derivation from the
one it is given and never searches.  Inputs are checked up front (valid
tree, inert context where required) and a :class:`ProofError` names the
violated precondition.

Pipeline used by the canonical-forms lemmas::

    general  --general_to_tight-->  tight  --tight_to_invertible-->  invertible
             --invert at the head constructor-->  precise + subtyping legs
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import build as B
from .inert import is_inert_context
from .rules import (
    DEFS,
    SUB,
    SUB_T,
    TYP,
    TYP_I,
    TYP_P,
    TYP_T,
    Derivation,
    Judgment,
    lookup,
    validate,
)
from .syntax import (
    All,
    And,
    Context,
    Fld,
    FldDef,
    Lam,
    Name,
    New,
    Rec,
    Type,
    TypDec,
    Var,
    alpha_eq,
    ctx_alpha_eq,
    def_labels,
    free_vars,
    is_value,
    open_all,
    subst_var,
)

NON_INERT = "non-inert-context"
INVALID = "invalid-input"
INVALID_DERIVATION = "invalid-input-derivation"
NOT_VAR_OR_VALUE = "subject-not-var-or-value"
NOT_LAST = "x-not-last"


class ProofError(ValueError):
    def __init__(self, code: str, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)


# ---------------------------------------------------------------- preconditions


def _require_valid(d: Derivation, code: str = INVALID) -> None:
    errors = validate(d)
    if errors:
        raise ProofError(code, str(errors[0]))


def _require_inert(g: Context) -> None:
    rep = is_inert_context(g, loose=True)
    if not rep.ok:
        raise ProofError(NON_INERT, f"{rep.offender.name}: {rep.report.first_violation.reason}")


def _require_root(g: Context, d: Derivation, code: str = INVALID) -> None:
    if not ctx_alpha_eq(g, d.conclusion.ctx):
        raise ProofError(code, "derivation is not rooted in the given context")


def _require_kind(d: Derivation, kinds: tuple[str, ...], code: str = INVALID) -> None:
    if d.conclusion.kind not in kinds:
        raise ProofError(code, f"expected a {'/'.join(kinds)} derivation, got {d.conclusion.kind}")


# ---------------------------------------------------------------- structural tools


def _subst_judgment(j: Judgment, x: Name, y: Name) -> Judgment:
    def s(part):
        return None if part is None else subst_var(x, y, part)

    ctx = Context(tuple((y if n == x else n, subst_var(x, y, t)) for n, t in j.ctx))
    return Judgment(j.kind, ctx, s(j.subject), s(j.type), s(j.lhs), s(j.rhs))


def rename(d: Derivation, x: Name, y: Name) -> Derivation:
    """Replace variable ``x`` by the fresh variable ``y`` everywhere in ``d``."""
    return Derivation(d.rule, _subst_judgment(d.conclusion, x, y), tuple(rename(p, x, y) for p in d.premises))


def _extension_binder(parent: Judgment, child: Derivation) -> Name | None:
    if len(child.conclusion.ctx) > len(parent.ctx):
        return child.conclusion.ctx.bindings[-1][0]
    return None


def weaken(d: Derivation, at: int, extra: tuple[tuple[Name, Type], ...]) -> Derivation:
    """Insert ``extra`` bindings at position ``at`` of every context in ``d``.

    Premise binders that collide with an inserted name are freshened first.
    """
    if not extra:
        return d
    taken = {n for n, _ in extra}
    for _, t in extra:
        taken |= free_vars(t)
    return _weaken(d, at, extra, taken)


def _weaken(d: Derivation, at: int, extra, taken: set[Name]) -> Derivation:
    j = d.conclusion
    b = j.ctx.bindings
    ctx = Context(b[:at] + tuple(extra) + b[at:])
    kids = []
    for p in d.premises:
        y = _extension_binder(j, p)
        if y is not None and y in taken:
            p = rename(p, y, y.fresh())
        kids.append(_weaken(p, at, extra, taken))
    return Derivation(d.rule, replace(j, ctx=ctx), tuple(kids))


def weaken_to(d: Derivation, g: Context) -> Derivation:
    """Weaken ``d`` (rooted in a prefix of ``g``) to context ``g``."""
    n = len(d.conclusion.ctx)
    if not ctx_alpha_eq(g.prefix(n), d.conclusion.ctx):
        raise ProofError(INVALID, "cannot weaken: context is not a prefix")
    return weaken(d, n, g.bindings[n:])


# ---------------------------------------------------------------- conversions


def to_general(d: Derivation) -> Derivation:
    """Embed a tight, precise or invertible derivation into general typing."""
    j = d.conclusion
    kind = j.kind
    if kind in (TYP, SUB, DEFS):
        return d
    if kind in (TYP_T, SUB_T):
        if d.rule == "<:-Sel-#":
            return B.sub_sel(to_general(d.premises[0]))
        if d.rule == "Sel-<:-#":
            return B.sel_sub(to_general(d.premises[0]))
        base = d.rule[: -len("-#")]
        kids = tuple(to_general(p) for p in d.premises)
        return Derivation(base, replace(j, kind=TYP if kind == TYP_T else SUB), kids)
    if kind == TYP_P:
        match d.rule:
            case "Var!":
                return Derivation("Var", replace(j, kind=TYP))
            case "Rec-E!":
                return Derivation("Rec-E", replace(j, kind=TYP), (to_general(d.premises[0]),))
            case "All-I!":
                return Derivation("All-I", replace(j, kind=TYP), d.premises)
            case "{}-I!":
                return Derivation("{}-I", replace(j, kind=TYP), d.premises)
            case "And1-E!" | "And2-E!":
                p = d.premises[0]
                ty: And = p.conclusion.type
                leg = (B.and1 if d.rule == "And1-E!" else B.and2)(j.ctx, ty.left, ty.right)
                return B.sub(to_general(p), leg)
    if kind == TYP_I:
        if is_value(j.subject):
            dp, leg = _value_legs(d)
            return _sub_unless_refl(to_general(dp), leg)
        return _inv_var_to_general(d)
    raise ProofError(INVALID, f"cannot embed rule {d.rule}")


def _sub_unless_refl(dt: Derivation, leg: Derivation) -> Derivation:
    return dt if leg.rule == "Refl" else B.sub(dt, leg)


def _inv_var_to_general(d: Derivation) -> Derivation:
    j = d.conclusion
    ps = d.premises
    match d.rule:
        case "Var-##":
            return to_general(ps[0])
        case "Fld-<:-##":
            return B.sub(to_general(ps[0]), B.fld_fld(to_general(ps[1]), j.type.label))
        case "Typ-<:-##":
            return B.sub(to_general(ps[0]), B.typ_typ(j.type.label, to_general(ps[1]), to_general(ps[2])))
        case "Rec-I-##":
            return Derivation("Rec-I", replace(j, kind=TYP), (to_general(ps[0]),))
        case "All-I-##":
            return B.sub(to_general(ps[0]), _all_leg(ps[0].conclusion.type, j.type, ps[1], ps[2]))
        case "And-I-##":
            return B.and_i(to_general(ps[0]), to_general(ps[1]))
        case "Sel-##":
            return B.sub(to_general(ps[0]), B.sub_sel(to_general(ps[1])))
        case "Top-##":
            return B.sub(to_general(ps[0]), B.top(j.ctx, ps[0].conclusion.type))
    raise ProofError(INVALID, f"unexpected rule {d.rule}")


def _all_leg(lo: All, hi: All, ddom: Derivation, dcod: Derivation) -> Derivation:
    j = ddom.conclusion
    return Derivation("All-<:-All", Judgment(SUB, j.ctx, lhs=lo, rhs=hi), (to_general(ddom), dcod))


def _value_legs(d: Derivation) -> tuple[Derivation, Derivation]:
    """For a value's invertible derivation: (its precise derivation, Γ ⊢ P <: T)."""
    j = d.conclusion
    ps = d.premises
    match d.rule:
        case "Val-##":
            dp = ps[0]
            return dp, B.refl(j.ctx, dp.conclusion.type)
        case "All-v-##":
            dp, leg = _value_legs(ps[0])
            return dp, _trans(leg, _all_leg(ps[0].conclusion.type, j.type, ps[1], ps[2]))
        case "And-v-##":
            dp, l1 = _value_legs(ps[0])
            _, l2 = _value_legs(ps[1])
            return dp, B.sub_and(l1, l2)
        case "Sel-v-##":
            dp, leg = _value_legs(ps[0])
            return dp, _trans(leg, B.sub_sel(to_general(ps[1])))
        case "Top-v-##":
            dp, _ = _value_legs(ps[0])
            return dp, B.top(j.ctx, dp.conclusion.type)
    raise ProofError(INVALID, f"unexpected rule {d.rule} for a value")


def _trans(d1: Derivation, d2: Derivation) -> Derivation:
    """``Trans`` that drops reflexive legs."""
    if d1.rule in ("Refl", "Refl-#"):
        return d2
    if d2.rule in ("Refl", "Refl-#"):
        return d1
    return B.trans(d1, d2)


# ---------------------------------------------------------------- ⊢ to ⊢#


def general_to_tight(g: Context, d: Derivation) -> Derivation:
    """Rewrite a general derivation in an inert context into tight typing."""
    _require_inert(g)
    _require_kind(d, (TYP, SUB), INVALID_DERIVATION)
    _require_valid(d, INVALID_DERIVATION)
    _require_root(g, d, INVALID_DERIVATION)
    return _g2t(g, d)


def _g2t(g: Context, d: Derivation) -> Derivation:
    j = d.conclusion
    if d.rule in ("<:-Sel", "Sel-<:"):
        lo, hi = sel_replacement(g, _g2t(g, d.premises[0]), _checked=True)
        return lo if d.rule == "<:-Sel" else hi
    schema = lookup(d.rule + "-#")
    kids = []
    for p, kind in zip(d.premises, schema.premise_kinds):
        kids.append(_g2t(g, p) if kind in (TYP_T, SUB_T) else p)
    return Derivation(schema.name, replace(j, kind=TYP_T if j.kind == TYP else SUB_T), tuple(kids))


def sel_replacement(g: Context, d: Derivation, _checked: bool = False) -> tuple[Derivation, Derivation]:
    """From ``Γ ⊢# x: {A: S..U}`` build ``Γ ⊢# S <: x.A`` and ``Γ ⊢# x.A <: U``."""
    T, dp, legS, legU = sel_premise(g, d, _checked=_checked)
    return B.trans(legS, B.sub_sel(dp)), B.trans(B.sel_sub(dp), legU)


def sel_premise(
    g: Context, d: Derivation, _checked: bool = False
) -> tuple[Type, Derivation, Derivation, Derivation]:
    """From ``Γ ⊢# x: {A: S..U}`` find T with ``Γ ⊢! x: {A: T..T}``, ``S <: T``, ``T <: U``."""
    if not _checked:
        _require_inert(g)
        _require_kind(d, (TYP_T,))
        _require_valid(d)
        _require_root(g, d)
    if not isinstance(d.conclusion.type, TypDec) or not isinstance(d.conclusion.subject, Var):
        raise ProofError(INVALID, "expected a typing x: {A: S..U}")
    return _sel_inv(tight_to_invertible(g, d, _checked=True))


def _sel_inv(i: Derivation) -> tuple[Type, Derivation, Derivation, Derivation]:
    j = i.conclusion
    if i.rule == "Var-##":
        dp = i.premises[0]
        dec: TypDec = dp.conclusion.type
        if not alpha_eq(dec.lower, dec.upper):
            raise ProofError(NON_INERT, "precise type member without tight bounds")
        T = dec.lower
        return T, dp, B.refl(j.ctx, T, tight=True), B.refl(j.ctx, T, tight=True)
    if i.rule == "Typ-<:-##":
        T, dp, s1, u1 = _sel_inv(i.premises[0])
        return T, dp, B.trans(i.premises[1], s1), B.trans(u1, i.premises[2])
    raise ProofError(INVALID, f"no type member can come from {i.rule}")


# ---------------------------------------------------------------- ⊢# to ⊢##


def tight_to_invertible(g: Context, d: Derivation, _checked: bool = False) -> Derivation:
    """Rewrite a tight typing of a variable or value into invertible typing.

    Restructuring order: the premise is converted first; Rec-E-# then
    inverts the converted premise at its μ-type (opening a precise μ with
    Rec-E!, or cancelling an enclosing Rec-I-##), and Sub-# pushes the
    subtyping leg into the invertible tree by induction on the leg.
    """
    j = d.conclusion
    if not (isinstance(j.subject, Var) or is_value(j.subject)):
        raise ProofError(NOT_VAR_OR_VALUE, "subject must be a variable or a value")
    if not _checked:
        _require_inert(g)
        _require_kind(d, (TYP_T,))
        _require_valid(d)
        _require_root(g, d)
    return _t2i(d)


def _inv_node(rule: str, j: Judgment, premises) -> Derivation:
    return Derivation(rule, replace(j, kind=TYP_I), tuple(premises))


def _t2i(d: Derivation) -> Derivation:
    j = d.conclusion
    var = isinstance(j.subject, Var)
    ps = d.premises
    match d.rule:
        case "Var-#":
            return B.inv_base(Derivation("Var!", replace(j, kind=TYP_P)))
        case "All-I-#":
            return B.inv_base(Derivation("All-I!", replace(j, kind=TYP_P), ps))
        case "{}-I-#":
            return B.inv_base(Derivation("{}-I!", replace(j, kind=TYP_P), ps))
        case "Rec-I-#":
            return _inv_node("Rec-I-##", j, [_t2i(ps[0])])
        case "And-I-#":
            return _inv_node("And-I-##" if var else "And-v-##", j, [_t2i(ps[0]), _t2i(ps[1])])
        case "Rec-E-#":
            return _open_rec(_t2i(ps[0]), j)
        case "Sub-#":
            return _close(_t2i(ps[0]), ps[1])
    raise ProofError(NOT_VAR_OR_VALUE, f"{d.rule} does not type a variable or value")


def _open_rec(i: Derivation, target: Judgment) -> Derivation:
    """From ``⊢## x: μ(z: T)`` to ``⊢## x: [z:=x]T``."""
    if i.rule == "Var-##":
        dp = i.premises[0]
        return B.inv_base(Derivation("Rec-E!", replace(target, kind=TYP_P), (dp,)))
    if i.rule == "Rec-I-##":
        return i.premises[0]
    raise ProofError(INVALID, f"cannot open a recursive type introduced by {i.rule}")


def _close(i: Derivation, s: Derivation) -> Derivation:
    """Invertible typing is closed under tight subtyping (in inert contexts)."""
    j = i.conclusion
    var = isinstance(j.subject, Var)
    ps = s.premises
    target = replace(j, type=s.conclusion.rhs)
    match s.rule:
        case "Refl-#":
            return i
        case "Trans-#":
            return _close(_close(i, ps[0]), ps[1])
        case "Top-#":
            return B.inv_top(i)
        case "<:-And-#":
            return B.inv_and(_close(i, ps[0]), _close(i, ps[1]))
        case "And1-<:-#" | "And2-<:-#":
            return _split_and(i, 0 if s.rule.startswith("And1") else 1)
        case "Fld-<:-Fld-#" if var:
            return B.inv_fld(i, ps[0])
        case "Typ-<:-Typ-#" if var:
            return B.inv_typ(i, ps[0], ps[1])
        case "All-<:-All-#":
            return _inv_node("All-I-##" if var else "All-v-##", target, [i, ps[0], ps[1]])
        case "<:-Sel-#":
            return B.inv_sel(i, ps[0])
        case "Sel-<:-#":
            return _unsel(i, ps[0])
    raise ProofError(NON_INERT, f"{s.rule} cannot apply to a {j.type.__class__.__name__} in an inert context")


def _split_and(i: Derivation, side: int) -> Derivation:
    if i.rule in ("And-I-##", "And-v-##"):
        return i.premises[side]
    if i.rule == "Var-##":
        return B.inv_base(B.and_e(i.premises[0], side + 1))
    raise ProofError(INVALID, f"cannot split an intersection introduced by {i.rule}")


def _unsel(i: Derivation, dp: Derivation) -> Derivation:
    """From ``⊢## t: y.A`` and ``⊢! y: {A: S..S}`` to ``⊢## t: S``."""
    if i.rule in ("Sel-##", "Sel-v-##"):
        inner = i.premises[0]
        if alpha_eq(inner.conclusion.type, dp.conclusion.type.lower):
            return inner
        raise ProofError(NON_INERT, "type member has two different precise aliases")
    raise ProofError(INVALID, f"cannot eliminate a projection introduced by {i.rule}")


# ---------------------------------------------------------------- narrowing


def narrow(d: Derivation, x: Name, t_new: Type, sub: Derivation) -> Derivation:
    """Replace ``Γ(x)`` by a subtype throughout a general derivation.

    ``sub`` must conclude ``Γ[x: t_new] ⊢ t_new <: Γ(x)``.
    """
    _require_kind(d, (TYP, SUB, DEFS))
    _require_kind(sub, (SUB,))
    _require_valid(d)
    _require_valid(sub)
    g = d.conclusion.ctx
    if x not in g:
        raise ProofError(INVALID, f"{x.name} is not bound in the derivation's context")
    g2 = g.replace(x, t_new)
    sj = sub.conclusion
    if not (ctx_alpha_eq(sj.ctx, g2) and alpha_eq(sj.lhs, t_new) and alpha_eq(sj.rhs, g[x])):
        raise ProofError(INVALID, "subtyping premise must conclude Γ[x: T'] ⊢ T' <: Γ(x)")
    return _narrow(d, x, t_new, sub)


def _narrow(d: Derivation, x: Name, t_new: Type, sub: Derivation) -> Derivation:
    j = d.conclusion
    ctx = j.ctx.replace(x, t_new)
    if d.rule == "Var" and isinstance(j.subject, Var) and j.subject.name == x:
        leaf = Derivation("Var", replace(j, ctx=ctx, type=t_new))
        return B.sub(leaf, weaken_to(sub, ctx))
    kids = tuple(_narrow(p, x, t_new, sub) for p in d.premises)
    return Derivation(d.rule, replace(j, ctx=ctx), kids)


def _narrow_last(d: Derivation, t_new: Type, dsub_tail: Derivation) -> Derivation:
    """Narrow the last binding of ``d``'s context; ``dsub_tail`` lives in the prefix."""
    g = d.conclusion.ctx
    x, _ = g.bindings[-1]
    g2 = g.replace(x, t_new)
    sub = weaken_to(dsub_tail, g2)
    return _narrow(d, x, t_new, sub)


# ---------------------------------------------------------------- substitution


def subst_deriv(d: Derivation, y: Name, dy: Derivation) -> Derivation:
    """From ``Γ, x: S ⊢ t: T`` and ``Γ ⊢ y: [x:=y]S`` build ``Γ ⊢ [x:=y]t: [x:=y]T``."""
    _require_kind(d, (TYP, SUB, DEFS))
    _require_kind(dy, (TYP,))
    _require_valid(d)
    _require_valid(dy)
    g = d.conclusion.ctx
    if not len(g):
        raise ProofError(NOT_LAST, "context is empty")
    x, S = g.bindings[-1]
    base = g.prefix(len(g) - 1)
    yj = dy.conclusion
    if not ctx_alpha_eq(yj.ctx, base):
        raise ProofError(INVALID, "argument derivation must live in Γ")
    if yj.subject != Var(y) or not alpha_eq(yj.type, subst_var(x, y, S)):
        raise ProofError(INVALID, "argument derivation must conclude Γ ⊢ y: [x:=y]S")
    return _subst(d, x, y, dy, len(base))


def _subst(d: Derivation, x: Name, y: Name, dy: Derivation, at: int) -> Derivation:
    j = d.conclusion
    b = j.ctx.bindings
    rest = tuple((n, subst_var(x, y, t)) for n, t in b[at + 1 :])
    ctx = Context(b[:at] + rest)
    if d.rule == "Var" and isinstance(j.subject, Var) and j.subject.name == x:
        return weaken(dy, at, rest)

    def s(part):
        return None if part is None else subst_var(x, y, part)

    nj = Judgment(j.kind, ctx, s(j.subject), s(j.type), s(j.lhs), s(j.rhs))
    return Derivation(d.rule, nj, tuple(_subst(p, x, y, dy, at) for p in d.premises))


# ---------------------------------------------------------------- values


def value_precise(g: Context, d: Derivation) -> tuple[Type, Derivation, Derivation]:
    """Peel ``Sub`` nodes: ``Γ ⊢ v: T`` gives ``Γ ⊢! v: T'`` and ``Γ ⊢ T' <: T``."""
    _require_kind(d, (TYP,))
    if not is_value(d.conclusion.subject):
        raise ProofError(INVALID, "subject must be a value")
    _require_valid(d)
    _require_root(g, d)
    dp, leg = _peel(d)
    return dp.conclusion.type, dp, leg


def _peel(d: Derivation) -> tuple[Derivation, Derivation]:
    j = d.conclusion
    if d.rule == "Sub":
        dp, leg = _peel(d.premises[0])
        return dp, _trans(leg, d.premises[1])
    if d.rule in ("All-I", "{}-I"):
        dp = Derivation(d.rule + "!", replace(j, kind=TYP_P), d.premises)
        return dp, B.refl(j.ctx, j.type)
    raise ProofError(INVALID, f"{d.rule} does not type a value")


# ---------------------------------------------------------------- canonical forms


@dataclass(frozen=True)
class CanonicalFunResult:
    context_type: Type  # Γ(z) = ∀(x: T')U', or the value's precise type
    domain_sub: Derivation  # Γ ⊢ T <: T'
    codomain_sub: Derivation  # Γ, y: T ⊢ U' <: U  (both opened at y)
    binder: Name  # the y above
    precise: Derivation  # Γ ⊢! z: ∀(x: T')U'
    tight: Derivation
    invertible: Derivation
    param: Name | None = None
    param_type: Type | None = None
    body: object | None = None
    body_typing: Derivation | None = None  # Γ, y: T ⊢ t: U


@dataclass(frozen=True)
class CanonicalObjResult:
    label: str
    precise: Derivation
    tight: Derivation
    invertible: Derivation
    field_type: Type | None = None  # T', opened at x
    sub: Derivation | None = None  # Γ ⊢ T' <: T
    context_type: Type | None = None  # Γ(x)
    defs: object | None = None
    field_term: object | None = None
    field_typing: Derivation | None = None  # Γ, x: S ⊢ t: T


def _to_invertible(g: Context, d: Derivation) -> tuple[Derivation, Derivation]:
    _require_inert(g)
    _require_kind(d, (TYP,))
    _require_valid(d)
    _require_root(g, d)
    dt = _g2t(g, d)
    return dt, _t2i(dt)


def _inv_all(i: Derivation) -> tuple[Derivation, Derivation, Derivation, Name]:
    """Invert ``⊢## t: ∀(x: T)U`` into (precise ∀(x: T')U', T <: T', cod leg, y)."""
    j = i.conclusion
    target: All = j.type
    if i.rule in ("Var-##", "Val-##"):
        dp = i.premises[0]
        y = target.param.fresh()
        return dp, B.refl(j.ctx, target.domain), B.refl(j.ctx.extend(y, target.domain), open_all(target, y)), y
    if i.rule in ("All-I-##", "All-v-##"):
        i0, d_dom, d_cod = i.premises
        dp, dom0, cod0, y0 = _inv_all(i0)
        w = d_cod.conclusion.ctx.bindings[-1][0]
        y = w.fresh()
        cod0 = rename(cod0, y0, y)
        d_cod = rename(d_cod, w, y)
        narrowed = _narrow_last(cod0, target.domain, to_general(d_dom))
        return dp, _trans(to_general(d_dom), dom0), _trans(narrowed, d_cod), y
    raise ProofError(INVALID, f"a function type cannot come from {i.rule}")


def canon_fun_var(g: Context, d: Derivation) -> CanonicalFunResult:
    j = d.conclusion
    if not isinstance(j.subject, Var) or not isinstance(j.type, All):
        raise ProofError(INVALID, "expected Γ ⊢ z: ∀(x: T)U")
    dt, di = _to_invertible(g, d)
    dp, dom, cod, y = _inv_all(di)
    if dp.rule != "Var!":
        raise ProofError(INVALID, f"precise function type must come from Var!, got {dp.rule}")
    return CanonicalFunResult(dp.conclusion.type, dom, cod, y, dp, dt, di)


def canon_fun_val(g: Context, d: Derivation) -> CanonicalFunResult:
    j = d.conclusion
    if not isinstance(j.subject, Lam) or not isinstance(j.type, All):
        raise ProofError(INVALID, "expected Γ ⊢ λ(x: T')t: ∀(x: T)U")
    dt, di = _to_invertible(g, d)
    dp, dom, cod, y = _inv_all(di)
    if dp.rule != "All-I!":
        raise ProofError(INVALID, f"precise type of a lambda must come from All-I!, got {dp.rule}")
    body = dp.premises[0]  # Γ, w: T' ⊢ t[w]: U'[w]
    w = body.conclusion.ctx.bindings[-1][0]
    body = rename(body, w, y)
    T = j.type.domain
    narrowed = _narrow_last(body, T, dom)  # Γ, y: T ⊢ t[y]: U'[y]
    typing_ = B.sub(narrowed, cod) if cod.rule != "Refl" else narrowed
    lam: Lam = j.subject
    return CanonicalFunResult(
        dp.conclusion.type, dom, cod, y, dp, dt, di,
        param=y, param_type=lam.param_type, body=subst_var(lam.param, y, lam.body), body_typing=typing_,
    )


def _inv_fld(i: Derivation) -> tuple[Derivation, Derivation]:
    """Invert ``⊢## x: {a: T}`` into (precise ``x: {a: T'}``, ``Γ ⊢ T' <: T``)."""
    if i.rule == "Var-##":
        dp = i.premises[0]
        return dp, B.refl(i.conclusion.ctx, dp.conclusion.type.type)
    if i.rule == "Fld-<:-##":
        dp, leg = _inv_fld(i.premises[0])
        return dp, _trans(leg, to_general(i.premises[1]))
    raise ProofError(INVALID, f"a field declaration cannot come from {i.rule}")


def canon_obj_var(g: Context, d: Derivation) -> CanonicalObjResult:
    j = d.conclusion
    if not isinstance(j.subject, Var) or not isinstance(j.type, Fld):
        raise ProofError(INVALID, "expected Γ ⊢ x: {a: T}")
    dt, di = _to_invertible(g, d)
    dp, leg = _inv_fld(di)
    root = dp
    while root.premises:
        root = root.premises[0]
    ctx_type = g[j.subject.name]
    if root.rule != "Var!" or not isinstance(ctx_type, Rec):
        raise ProofError(INVALID, "field typing must come from a recursive context type")
    return CanonicalObjResult(
        j.type.label, dp, dt, di, field_type=dp.conclusion.type.type, sub=leg, context_type=ctx_type
    )


def _find_def(dd: Derivation, label: str) -> Derivation | None:
    if dd.rule == "Def-Trm":
        return dd if dd.conclusion.subject.label == label else None
    for p in dd.premises:
        hit = _find_def(p, label)
        if hit is not None:
            return hit
    return None


def canon_obj_val(g: Context, d: Derivation, label: str | None = None) -> CanonicalObjResult:
    """From ``Γ ⊢ ν(x: S)d : μ(x: {a: T} ∧ …)`` recover ``{a = t}`` and ``Γ, x: S ⊢ t: T``."""
    j = d.conclusion
    if not isinstance(j.subject, New) or not isinstance(j.type, Rec):
        raise ProofError(INVALID, "expected Γ ⊢ ν(x: S)d: μ(x: …)")
    obj: New = j.subject
    if label is None:
        fields = [lab for lab in def_labels(obj.defs) if lab[0].islower()]
        if len(fields) != 1:
            raise ProofError(INVALID, "object has several fields; pass a label")
        label = fields[0]
    dt, di = _to_invertible(g, d)
    if di.rule != "Val-##" or di.premises[0].rule != "{}-I!":
        raise ProofError(INVALID, f"a recursive value type cannot come from {di.rule}")
    dp = di.premises[0]
    defs_d = dp.premises[0]
    hit = _find_def(defs_d, label)
    if hit is None:
        raise ProofError(INVALID, f"object defines no field {label}")
    fd: FldDef = hit.conclusion.subject
    return CanonicalObjResult(
        label, dp, dt, di, defs=defs_d.conclusion.subject, field_term=fd.rhs, field_typing=hit.premises[0],
        field_type=hit.conclusion.type.type,
    )
