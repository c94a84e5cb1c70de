import random

import pytest

from dotcalc import build as B
from dotcalc.gen import DerivationGen, random_inert_context
from dotcalc.parse import parse_context, parse_term, parse_type
from dotcalc.proofs import (
    INVALID,
    NON_INERT,
    NOT_LAST,
    NOT_VAR_OR_VALUE,
    ProofError,
    canon_fun_val,
    canon_fun_var,
    canon_obj_val,
    canon_obj_var,
    general_to_tight,
    narrow,
    rename,
    sel_premise,
    sel_replacement,
    subst_deriv,
    tight_to_invertible,
    to_general,
    value_precise,
    weaken_to,
)
from dotcalc.rules import TYP_P, TYP_T, Derivation, same_statement, typing, validate
from dotcalc.search import bounded_search
from dotcalc.syntax import BOT, TOP, Name, Var, alpha_eq, ctx_alpha_eq


def derive(ctx, term, ty, depth=8):
    env = {}
    g = parse_context(ctx, env)
    d = bounded_search(g, parse_term(term, env), parse_type(ty, env) if ty else None)
    assert d, (ctx, term, ty)
    return g, env, d


def valid(d):
    errs = validate(d)
    assert errs == [], errs[:3]
    return d


def code(fn, *args):
    with pytest.raises(ProofError) as exc:
        fn(*args)
    return exc.value.code


# ---------------------------------------------------------------- ⊢ to ⊢#


def test_var_becomes_var_tight():
    g, env, d = derive("f: all(y: Top) Top", "f", "all(y: Top) Top")
    out = valid(general_to_tight(g, d))
    assert out.rule == "Var-#" and same_statement(out.conclusion, d.conclusion)


def test_sel_sub_replaced():
    env = {}
    g = parse_context("x: mu(x: {A: Top .. Top})", env)
    x = env["x"]
    d = B.sel_sub(B.rec_e(B.var(g, x)))
    assert valid(d).rule == "Sel-<:"
    out = valid(general_to_tight(g, d))
    used = out.rules_used()
    assert "Sel-<:-#" in used and "Sel-<:" not in used
    assert same_statement(out.conclusion, d.conclusion) and out.conclusion.kind == "subtyp_tight"
    sel = next(n for _, n in out.walk() if n.rule == "Sel-<:-#")
    assert sel.premises[0].conclusion.kind == TYP_P


def test_non_inert_rejected():
    g, env, d = derive("x: {A: Bot .. Top}", "x", "{A: Bot .. Top}")
    assert code(general_to_tight, g, d) == NON_INERT


def test_tight_identity_on_sel_free_trees():
    for seed in range(40):
        r = random.Random(seed)
        g = random_inert_context(r)
        d = DerivationGen(r).typ_var(g, r.choice(g.names), 3)
        t = general_to_tight(g, d)
        if not ({"Sel-<:-#", "<:-Sel-#"} & t.rules_used()):
            again = general_to_tight(g, to_general(t))
            assert [n.rule for _, n in again.walk()] == [n.rule for _, n in t.walk()]


# ---------------------------------------------------------------- Sel lemmas


def _mu_top():
    env = {}
    g = parse_context("x: mu(x: {A: Top .. Top})", env)
    x = env["x"]
    return g, x, B.rec_e(B.var(g, x, TYP_T))


def test_sel_replacement_simple():
    g, x, d = _mu_top()
    lo, hi = sel_replacement(g, valid(d))
    valid(lo), valid(hi)
    assert lo.conclusion.lhs == TOP and hi.conclusion.rhs == TOP
    assert alpha_eq(lo.conclusion.rhs, parse_type("x.A", {"x": x}))


def test_sel_premise_simple():
    g, x, d = _mu_top()
    T, dp, leg_s, leg_u = sel_premise(g, d)
    assert T == TOP and dp.conclusion.kind == TYP_P
    for leg in (dp, leg_s, leg_u):
        valid(leg)
    assert leg_s.rule == "Refl-#" and leg_u.rule == "Refl-#"


def test_sel_premise_widened():
    g, x, d = _mu_top()
    wide = B.sub(d, B.typ_typ("A", B.bot(g, TOP, True), B.refl(g, TOP, True)))
    assert valid(wide).conclusion.type == parse_type("{A: Bot .. Top}")
    T, dp, leg_s, leg_u = sel_premise(g, wide)
    assert T == TOP
    assert (leg_s.conclusion.lhs, leg_s.conclusion.rhs) == (BOT, TOP)
    assert (leg_u.conclusion.lhs, leg_u.conclusion.rhs) == (TOP, TOP)
    # the legs recompose through the precise bound
    chain = B.trans(leg_s, B.trans(B.sub_sel(dp), B.sel_sub(dp)))
    valid(chain)


def test_sel_premise_invalid_input():
    env = {}
    g = parse_context("x: all(y: Top) Top", env)
    fake = Derivation("Var-#", typing(g, Var(env["x"]), parse_type("{A: Top .. Top}"), TYP_T))
    assert code(sel_premise, g, fake) == INVALID


# ---------------------------------------------------------------- ⊢# to ⊢##


def test_var_to_invertible():
    g, env, d = derive("f: all(y: Top) Top", "f", "all(y: Top) Top")
    out = valid(tight_to_invertible(g, general_to_tight(g, d)))
    assert out.rule == "Var-##" and out.premises[0].rule == "Var!"


def test_rec_cycle_collapses():
    g, x, d = _mu_top()
    cyc = B.rec_i(d)
    assert valid(cyc).conclusion.type == g[x] or alpha_eq(cyc.conclusion.type, g[x])
    out = valid(tight_to_invertible(g, cyc))
    assert same_statement(out.conclusion, cyc.conclusion)
    assert out.rule == "Rec-I-##" and [n.rule for _, n in out.walk()].count("Rec-I-##") == 1
    assert out.premises[0].premises[0].rule == "Rec-E!"


def test_application_subject_rejected():
    g, env, d = derive("f: all(y: Top) Top", "f f", None)
    assert code(tight_to_invertible, g, general_to_tight(g, d)) == NOT_VAR_OR_VALUE


# ---------------------------------------------------------------- canonical forms


def test_canon_fun_var_identity():
    g, env, d = derive("f: all(y: Top) Top", "f", "all(y: Top) Top")
    res = canon_fun_var(g, d)
    assert alpha_eq(res.context_type, g[env["f"]])
    assert res.domain_sub.rule == "Refl" and res.codomain_sub.rule == "Refl"


def test_canon_fun_var_widened():
    g, env, d = derive("f: all(y: Top) Top", "f", "all(y: Bot) Top")
    res = canon_fun_var(g, d)
    assert (res.domain_sub.conclusion.lhs, res.domain_sub.conclusion.rhs) == (BOT, TOP)
    for leg in (res.domain_sub, res.codomain_sub, res.precise, res.tight, res.invertible):
        valid(leg)
    # codomain judgment lives in Γ, y: T
    assert res.codomain_sub.conclusion.ctx.bindings[-1] == (res.binder, BOT)


def test_canon_fun_var_on_object_is_invalid():
    env = {}
    g = parse_context("o: mu(o: {a: Top})", env)
    fake = Derivation("Var", typing(g, Var(env["o"]), parse_type("all(y: Top) Top")))
    assert code(canon_fun_var, g, fake) == INVALID


def test_canon_fun_val_identity():
    g, env, d = derive("", "lambda(y: Top) y", "all(y: Top) Top")
    res = canon_fun_val(g, d)
    assert res.param_type == TOP and res.body == Var(res.param)
    assert res.domain_sub.rule == "Refl"
    valid(res.body_typing)


def test_canon_fun_val_widened():
    g, env, d = derive("", "lambda(y: Top) y", "all(y: Bot) Top")
    res = canon_fun_val(g, d)
    assert res.param_type == TOP
    assert (res.domain_sub.conclusion.lhs, res.domain_sub.conclusion.rhs) == (BOT, TOP)
    bt = valid(res.body_typing).conclusion
    assert bt.ctx.bindings[-1][1] == BOT and bt.type == TOP


def test_canon_fun_val_object_invalid():
    g, env, d = derive("", "nu(s: {a: Top}) {a = s}", None)
    assert code(canon_fun_val, g, d) == INVALID


def test_canon_obj_var():
    g, env, d = derive("o: mu(o: {a: Top})", "o", "{a: Top}")
    res = canon_obj_var(g, d)
    assert res.field_type == TOP and res.sub.rule == "Refl"
    g, env, d = derive("o: mu(o: {a: Bot})", "o", "{a: Top}")
    res = canon_obj_var(g, d)
    assert res.field_type == BOT and (res.sub.conclusion.lhs, res.sub.conclusion.rhs) == (BOT, TOP)
    valid(res.sub)
    env = {}
    g = parse_context("f: all(y: Top) Top", env)
    fake = Derivation("Var", typing(g, Var(env["f"]), parse_type("{a: Top}")))
    assert code(canon_obj_var, g, fake) == INVALID


def test_canon_obj_val():
    g, env, d = derive("", "nu(x: {a: Top}) {a = x}", "mu(x: {a: Top})")
    res = canon_obj_val(g, d)
    assert res.label == "a" and isinstance(res.field_term, Var)
    ft = valid(res.field_typing).conclusion
    assert ft.type == TOP and ft.subject == res.field_term
    assert ft.ctx.bindings[-1][0] == res.field_term.name
    g2, env2, lam = derive("", "lambda(y: Top) y", None)
    assert code(canon_obj_val, g2, lam) == INVALID


def test_canon_obj_val_missing_label():
    g, env, d = derive("", "nu(x: {a: Top}) {a = x}", "mu(x: {a: Top})")
    assert code(canon_obj_val, g, d, "b") == INVALID
    fake = d.replace_at((), Derivation(d.rule, typing(g, d.conclusion.subject, parse_type("mu(x: {b: Top})")), d.premises))
    assert validate(fake)
    assert code(canon_obj_val, g, fake) == INVALID


# ---------------------------------------------------------------- narrowing, substitution


def test_narrow_untouched():
    env = {}
    g = parse_context("x: Top; f: all(y: Top) Top", env)
    d = B.var(g, env["f"])
    sub = B.bot(g.replace(env["x"], BOT), TOP)
    out = valid(narrow(d, env["x"], BOT, sub))
    assert out.rule == "Var" and out.conclusion.ctx[env["x"]] == BOT


def test_narrow_var():
    env = {}
    g = parse_context("x: Top", env)
    x = env["x"]
    g2 = g.replace(x, BOT)
    out = valid(narrow(B.var(g, x), x, BOT, B.bot(g2, TOP)))
    assert out.rule == "Sub" and out.premises[0].rule == "Var" and out.conclusion.type == TOP


def test_narrow_sel():
    env = {}
    g = parse_context("x: {A: Bot .. Top}", env)
    x = env["x"]
    d = valid(B.sel_sub(B.var(g, x)))
    new = parse_type("{A: Top .. Top}")
    g2 = g.replace(x, new)
    sub = B.typ_typ("A", B.bot(g2, TOP), B.refl(g2, TOP))
    out = valid(narrow(d, x, new, sub))
    assert ctx_alpha_eq(out.conclusion.ctx, g2) and same_statement(out.conclusion, d.conclusion)


def test_subst_var_case():
    env = {}
    g = parse_context("y: Top; x: Top", env)
    x, y = env["x"], env["y"]
    dy = B.var(g.prefix(1), y)
    out = valid(subst_deriv(B.var(g, x), y, dy))
    assert out.conclusion.subject == Var(y) and out.conclusion.type == TOP
    assert out.rule in ("Var", "Sub")


def test_subst_under_lambda():
    g, env, d = derive("y: Top; x: Top", "lambda(z: Top) x", "all(z: Top) Top")
    y = env["y"]
    out = valid(subst_deriv(d, y, B.var(g.prefix(1), y)))
    lam = out.conclusion.subject
    assert lam.body == Var(y) and len(out.conclusion.ctx) == 1


def test_subst_not_last():
    env = {}
    g = parse_context("x: Top; y: Top", env)
    d = B.var(g, env["x"])
    assert code(subst_deriv, d, env["y"], B.var(g.prefix(1), env["x"])) in (NOT_LAST, INVALID)


# ---------------------------------------------------------------- value_precise


def test_value_precise_identity():
    g, env, d = derive("", "lambda(y: Top) y", "all(y: Top) Top")
    T, dp, leg = value_precise(g, d)
    assert alpha_eq(T, d.conclusion.type) and leg.rule == "Refl"
    valid(dp)


def test_value_precise_widened():
    g, env, d = derive("", "lambda(y: Top) y", "Top")
    T, dp, leg = value_precise(g, d)
    assert alpha_eq(T, parse_type("all(y: Top) Top"))
    assert alpha_eq(leg.conclusion.lhs, T) and leg.conclusion.rhs == TOP
    valid(dp), valid(leg)


def test_value_precise_variable():
    g, env, d = derive("f: all(y: Top) Top", "f", None)
    assert code(value_precise, g, d) == INVALID


# ---------------------------------------------------------------- structural helpers


def test_rename_and_weaken():
    g, env, d = derive("f: all(y: Top) Top", "f", "Top")
    h = Name("h")
    valid(rename(d, env["f"], h))
    wide = g.extend(Name("extra"), TOP)
    out = valid(weaken_to(d, wide))
    assert len(out.conclusion.ctx) == 2


def test_to_general_round_trip():
    g, x, d = _mu_top()
    back = valid(to_general(d))
    assert back.conclusion.kind == "typ" and same_statement(back.conclusion, d.conclusion)
