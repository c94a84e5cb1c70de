"""
From general typing to canonical forms
======================================

A general derivation in an inert context is rewritten into tight typing,
then into invertible typing, and finally taken apart by a canonical-forms
lemma.

"""

from dotcalc.cli import render_tree
from dotcalc.parse import parse_context, parse_term, parse_type
from dotcalc.search import bounded_search

env = {}
g = parse_context("x: mu(x: {A: Top .. Top}); f: all(z: x.A) Top", env)
d = bounded_search(g, parse_term("f", env), parse_type("all(z: Bot) Top", env))
print("\n".join(render_tree(d, {})))

# tight typing: no custom subtyping left to exploit
from dotcalc.proofs import general_to_tight, tight_to_invertible

dt = general_to_tight(g, d)
print("\n".join(render_tree(dt, {})))

# invertible typing: introduction rules only, built on a precise lookup
di = tight_to_invertible(g, dt)
print("\n".join(render_tree(di, {})))

# canonical forms: f is bound to a function type whose domain is wider
from dotcalc.pretty import show
from dotcalc.proofs import canon_fun_var

res = canon_fun_var(g, d)
print("context type:", show(res.context_type))
print("\n".join(render_tree(res.domain_sub, {})))

# a type member read off a tight typing, with the Trans-# chain rebuilt
from dotcalc import build as B
from dotcalc.proofs import sel_premise
from dotcalc.syntax import Var

dx = bounded_search(g, Var(env["x"]), parse_type("{A: Bot .. Top}", env))
T, dp, lo, hi = sel_premise(g, general_to_tight(g, dx))
print(show(T))
print("\n".join(render_tree(B.trans(lo, hi), {})))
