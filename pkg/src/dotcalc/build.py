"""Smart constructors for derivation nodes.

Each function takes the premises (and whatever the premises cannot
determine) and computes the conclusion, so callers never spell out
judgments by hand.  Nothing here validates; pair with
:func:`dotcalc.rules.validate` when in doubt.
"""

from __future__ import annotations

from .rules import (
    SUB,
    SUB_T,
    TYP,
    TYP_I,
    TYP_P,
    TYP_T,
    Derivation,
    deftyping,
    subtyping,
    typing,
)
from .syntax import (
    BOT,
    TOP,
    All,
    And,
    AndDef,
    App,
    Context,
    Fld,
    FldDef,
    Lam,
    Let,
    Name,
    New,
    Rec,
    Sel,
    SelTrm,
    Type,
    TypDec,
    TypDef,
    Var,
    open_all,
    open_rec,
    subst_var,
)

_SUFFIX = {TYP: "", SUB: "", TYP_T: "-#", SUB_T: "-#", TYP_P: "!"}


def _kind(tight: bool, typing_: bool) -> str:
    if typing_:
        return TYP_T if tight else TYP
    return SUB_T if tight else SUB


# ---------------------------------------------------------------- typing


def var(g: Context, x: Name, kind: str = TYP) -> Derivation:
    return Derivation("Var" + _SUFFIX[kind], typing(g, Var(x), g[x], kind))


def sub(dt: Derivation, ds: Derivation) -> Derivation:
    j = dt.conclusion
    return Derivation("Sub" + _SUFFIX[j.kind], typing(j.ctx, j.subject, ds.conclusion.rhs, j.kind), (dt, ds))


def all_i(g: Context, body: Derivation, kind: str = TYP) -> Derivation:
    """``body`` concludes ``Γ, y: T ⊢ t: U``; yields ``λ(y: T)t : ∀(y: T)U``."""
    y, T = body.conclusion.ctx.bindings[-1]
    lam = Lam(y, T, body.conclusion.subject)
    return Derivation("All-I" + _SUFFIX[kind], typing(g, lam, All(y, T, body.conclusion.type), kind), (body,))


def all_e(df: Derivation, darg: Derivation) -> Derivation:
    j = df.conclusion
    f, a = j.subject.name, darg.conclusion.subject.name
    return Derivation(
        "All-E" + _SUFFIX[j.kind], typing(j.ctx, App(f, a), open_all(j.type, a), j.kind), (df, darg)
    )


def new_i(g: Context, defs: Derivation, kind: str = TYP) -> Derivation:
    """``defs`` concludes ``Γ, y: T ⊢ d: T``; yields ``ν(y: T)d : μ(y: T)``."""
    y, T = defs.conclusion.ctx.bindings[-1]
    obj = New(y, T, defs.conclusion.subject)
    return Derivation("{}-I" + _SUFFIX[kind], typing(g, obj, Rec(y, T), kind), (defs,))


def fld_e(d: Derivation) -> Derivation:
    j = d.conclusion
    f: Fld = j.type
    return Derivation("{}-E" + _SUFFIX[j.kind], typing(j.ctx, SelTrm(j.subject.name, f.label), f.type, j.kind), (d,))


def let(drhs: Derivation, dbody: Derivation) -> Derivation:
    j = drhs.conclusion
    y, _ = dbody.conclusion.ctx.bindings[-1]
    t = Let(y, j.subject, dbody.conclusion.subject)
    return Derivation("Let" + _SUFFIX[j.kind], typing(j.ctx, t, dbody.conclusion.type, j.kind), (drhs, dbody))


def rec_i(d: Derivation, binder: Name | None = None) -> Derivation:
    """Close ``x: T`` into ``x: μ(z: [x:=z]T)``."""
    j = d.conclusion
    x = j.subject.name
    z = binder or x.fresh()
    return Derivation("Rec-I" + _SUFFIX[j.kind], typing(j.ctx, j.subject, Rec(z, subst_var(x, z, j.type)), j.kind), (d,))


def rec_e(d: Derivation) -> Derivation:
    j = d.conclusion
    x = j.subject.name
    return Derivation("Rec-E" + _SUFFIX[j.kind], typing(j.ctx, j.subject, open_rec(j.type, x), j.kind), (d,))


def and_i(d1: Derivation, d2: Derivation) -> Derivation:
    j = d1.conclusion
    return Derivation(
        "And-I" + _SUFFIX[j.kind], typing(j.ctx, j.subject, And(j.type, d2.conclusion.type), j.kind), (d1, d2)
    )


def and_e(d: Derivation, side: int) -> Derivation:
    j = d.conclusion
    ty = j.type.left if side == 1 else j.type.right
    return Derivation(f"And{side}-E!", typing(j.ctx, j.subject, ty, TYP_P), (d,))


# ---------------------------------------------------------------- subtyping


def top(g: Context, T: Type, tight: bool = False) -> Derivation:
    return Derivation("Top-#" if tight else "Top", subtyping(g, T, TOP, _kind(tight, False)))


def bot(g: Context, T: Type, tight: bool = False) -> Derivation:
    return Derivation("Bot-#" if tight else "Bot", subtyping(g, BOT, T, _kind(tight, False)))


def refl(g: Context, T: Type, tight: bool = False) -> Derivation:
    return Derivation("Refl-#" if tight else "Refl", subtyping(g, T, T, _kind(tight, False)))


def trans(d1: Derivation, d2: Derivation) -> Derivation:
    j = d1.conclusion
    return Derivation("Trans" + _SUFFIX[j.kind], subtyping(j.ctx, j.lhs, d2.conclusion.rhs, j.kind), (d1, d2))


def trans_all(g: Context, ds: list[Derivation], T: Type, tight: bool = False) -> Derivation:
    """Compose a chain; an empty chain is ``Refl`` at ``T``.  Drops Refl links."""
    ds = [d for d in ds if d.rule not in ("Refl", "Refl-#")]
    if not ds:
        return refl(g, T, tight)
    out = ds[-1]
    for d in reversed(ds[:-1]):
        out = trans(d, out)
    return out


def and1(g: Context, T: Type, U: Type, tight: bool = False) -> Derivation:
    return Derivation("And1-<:" + ("-#" if tight else ""), subtyping(g, And(T, U), T, _kind(tight, False)))


def and2(g: Context, T: Type, U: Type, tight: bool = False) -> Derivation:
    return Derivation("And2-<:" + ("-#" if tight else ""), subtyping(g, And(T, U), U, _kind(tight, False)))


def sub_and(d1: Derivation, d2: Derivation) -> Derivation:
    j = d1.conclusion
    return Derivation(
        "<:-And" + _SUFFIX[j.kind], subtyping(j.ctx, j.lhs, And(j.rhs, d2.conclusion.rhs), j.kind), (d1, d2)
    )


def fld_fld(d: Derivation, label: str) -> Derivation:
    j = d.conclusion
    return Derivation(
        "Fld-<:-Fld" + _SUFFIX[j.kind], subtyping(j.ctx, Fld(label, j.lhs), Fld(label, j.rhs), j.kind), (d,)
    )


def typ_typ(label: str, dlo: Derivation, dhi: Derivation) -> Derivation:
    """``dlo``: S2 <: S1 and ``dhi``: T1 <: T2 give {A: S1..T1} <: {A: S2..T2}."""
    jl, jh = dlo.conclusion, dhi.conclusion
    lhs = TypDec(label, jl.rhs, jh.lhs)
    rhs = TypDec(label, jl.lhs, jh.rhs)
    return Derivation("Typ-<:-Typ" + _SUFFIX[jl.kind], subtyping(jl.ctx, lhs, rhs, jl.kind), (dlo, dhi))


def all_all(ddom: Derivation, dcod: Derivation) -> Derivation:
    """``ddom``: S2 <: S1; ``dcod``: ``Γ, y: S2 ⊢ T1 <: T2`` (T1, T2 opened at y)."""
    j = ddom.conclusion
    y, _ = dcod.conclusion.ctx.bindings[-1]
    lo = All(y, j.rhs, dcod.conclusion.lhs)
    hi = All(y, j.lhs, dcod.conclusion.rhs)
    return Derivation("All-<:-All" + _SUFFIX[j.kind], subtyping(j.ctx, lo, hi, j.kind), (ddom, dcod))


def sub_sel(d: Derivation) -> Derivation:
    """From ``x: {A: S..T}`` (general) or ``⊢! x: {A: T..T}`` (tight) to ``S <: x.A``."""
    j = d.conclusion
    dec: TypDec = j.type
    tight = j.kind == TYP_P
    name = "<:-Sel-#" if tight else "<:-Sel"
    return Derivation(name, subtyping(j.ctx, dec.lower, Sel(j.subject.name, dec.label), _kind(tight, False)), (d,))


def sel_sub(d: Derivation) -> Derivation:
    j = d.conclusion
    dec: TypDec = j.type
    tight = j.kind == TYP_P
    name = "Sel-<:-#" if tight else "Sel-<:"
    return Derivation(name, subtyping(j.ctx, Sel(j.subject.name, dec.label), dec.upper, _kind(tight, False)), (d,))


# ---------------------------------------------------------------- definitions


def def_trm(label: str, d: Derivation) -> Derivation:
    j = d.conclusion
    return Derivation("Def-Trm", deftyping(j.ctx, FldDef(label, j.subject), Fld(label, j.type)), (d,))


def def_typ(g: Context, label: str, T: Type) -> Derivation:
    return Derivation("Def-Typ", deftyping(g, TypDef(label, T), TypDec(label, T, T)))


def and_def(d1: Derivation, d2: Derivation) -> Derivation:
    j1, j2 = d1.conclusion, d2.conclusion
    return Derivation("AndDef-I", deftyping(j1.ctx, AndDef(j1.subject, j2.subject), And(j1.type, j2.type)), (d1, d2))


def and_defs(ds: list[Derivation]) -> Derivation:
    """Right-nested aggregate, matching :func:`dotcalc.syntax.and_defs`."""
    out = ds[-1]
    for d in reversed(ds[:-1]):
        out = and_def(d, out)
    return out


# ---------------------------------------------------------------- invertible


def _inv(rule: str, j, T: Type, premises) -> Derivation:
    return Derivation(rule, typing(j.ctx, j.subject, T, TYP_I), tuple(premises))


def _is_var(j) -> bool:
    return isinstance(j.subject, Var)


def inv_base(dp: Derivation) -> Derivation:
    """Var-## or Val-## over a precise derivation."""
    j = dp.conclusion
    return _inv("Var-##" if _is_var(j) else "Val-##", j, j.type, [dp])


def inv_fld(di: Derivation, ds: Derivation) -> Derivation:
    j = di.conclusion
    return _inv("Fld-<:-##", j, Fld(j.type.label, ds.conclusion.rhs), [di, ds])


def inv_typ(di: Derivation, dlo: Derivation, dhi: Derivation) -> Derivation:
    j = di.conclusion
    return _inv("Typ-<:-##", j, TypDec(j.type.label, dlo.conclusion.lhs, dhi.conclusion.rhs), [di, dlo, dhi])


def inv_rec(di: Derivation, binder: Name | None = None) -> Derivation:
    j = di.conclusion
    x = j.subject.name
    z = binder or x.fresh()
    return _inv("Rec-I-##", j, Rec(z, subst_var(x, z, j.type)), [di])


def inv_all(di: Derivation, ddom: Derivation, dcod: Derivation) -> Derivation:
    """``ddom``: ``⊢# S' <: S``; ``dcod``: ``Γ, y: S' ⊢ T <: T'``."""
    j = di.conclusion
    y, _ = dcod.conclusion.ctx.bindings[-1]
    rule = "All-I-##" if _is_var(j) else "All-v-##"
    return _inv(rule, j, All(y, ddom.conclusion.lhs, dcod.conclusion.rhs), [di, ddom, dcod])


def inv_and(d1: Derivation, d2: Derivation) -> Derivation:
    j = d1.conclusion
    rule = "And-I-##" if _is_var(j) else "And-v-##"
    return _inv(rule, j, And(j.type, d2.conclusion.type), [d1, d2])


def inv_sel(di: Derivation, dp: Derivation) -> Derivation:
    """``dp``: ``⊢! y: {A: S..S}``."""
    j = di.conclusion
    rule = "Sel-##" if _is_var(j) else "Sel-v-##"
    dec: TypDec = dp.conclusion.type
    return _inv(rule, j, Sel(dp.conclusion.subject.name, dec.label), [di, dp])


def inv_top(di: Derivation) -> Derivation:
    j = di.conclusion
    return _inv("Top-##" if _is_var(j) else "Top-v-##", j, TOP, [di])
