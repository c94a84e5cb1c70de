"""
Bad bounds and why inert contexts matter
=========================================

A lambda whose parameter declares a type member with unrelated bounds
lets an object be applied as if it were a function.

"""

# the term and its hand-built derivation
from dotcalc.corpus import BAD_BOUNDS_SRC, bad_bounds_body, bad_bounds_contexts, bad_bounds_derivation
from dotcalc.cli import render_tree
from dotcalc.rules import validate

print(BAD_BOUNDS_SRC)
d = bad_bounds_derivation()
print("valid:", validate(d) == [], "nodes:", d.size())
print("\n".join(render_tree(d, {})))

# pulled out of the lambda, the body gets stuck at y y
from dotcalc.evaluator import run

print(run(bad_bounds_body()).to_text())

# with only y in scope, search finds no typing of y y
from dotcalc.parse import parse_term
from dotcalc.search import SearchConfig, bounded_search

(g_inert, env), (g_bad, env_bad) = bad_bounds_contexts()
print(bounded_search(g_inert, parse_term("y y", env), None, SearchConfig(max_depth=8)))

# once x is back in scope, {a: Top} <: x.A <: all(z: Top) Top closes the gap
found = bounded_search(g_bad, parse_term("y y", env_bad), None, SearchConfig(max_depth=6))
print("\n".join(render_tree(found, {})))

# the context with x is exactly what the inertness check rejects
from dotcalc.inert import is_inert_context

print(is_inert_context(g_bad))
