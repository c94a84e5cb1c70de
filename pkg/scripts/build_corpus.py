"""Regenerate src/dotcalc/data from the sources listed here.

Program derivations come from bounded search; coverage derivations come
from the seeded derivation generator plus a few hand-picked judgments,
pushed through the tight and invertible transformers.  Output is
deterministic.  Run:  python3 scripts/build_corpus.py
"""

from __future__ import annotations

import json
import random
import shutil
from pathlib import Path

from dotcalc.corpus import BAD_BOUNDS_SRC, LATTICE_TYPE, bad_bounds_derivation, lattice_target
from dotcalc.derivio import save_derivation
from dotcalc.gen import DerivationGen, random_inert_context
from dotcalc.parse import parse_context, parse_term, parse_type
from dotcalc.proofs import general_to_tight, tight_to_invertible
from dotcalc.rules import TYP, require_valid, rule_registry
from dotcalc.search import SearchConfig, bounded_search
from dotcalc.syntax import Context, Var, is_value

DATA = Path(__file__).resolve().parents[1] / "src" / "dotcalc" / "data"
EMPTY = Context(())

PROGRAMS = {
    "identity": "let f = lambda(z: Top) z in let a = lambda(w: Top) w in f a",
    "self_apply": "let f = lambda(z: Top) z in f f",
    "project_self": "let o = nu(x: {a: Top}) {a = x} in o.a",
    "let_let": "let x = (let y = lambda(z: Top) z in y) in x",
    "const": "let k = lambda(a: Top) lambda(b: Top) a in let i = lambda(z: Top) z in let k1 = k i in k1 k",
    "type_member": (
        "let o = nu(s: {T: Top .. Top} & {id: all(x: s.T) s.T}) {T = Top} /\\ {id = lambda(x: s.T) x} "
        "in let f = o.id in f o"
    ),
    "method_call": "let o = nu(s: {get: all(u: Top) Top}) {get = lambda(u: Top) s} in let g = o.get in g o",
    "nested_let": "let a = (let b = (let c = lambda(z: Top) z in c) in b) in a a",
    "field_chain": (
        "let p = nu(s: {inner: all(z: Top) Top}) {inner = lambda(z: Top) z} "
        "in let q = nu(t: {outer: Top}) {outer = p} in let r = q.outer in r"
    ),
    "two_fields": (
        "let o = nu(s: {a: all(z: Top) Top} & {b: all(z: Top) Top}) "
        "{a = lambda(z: Top) z} /\\ {b = lambda(z: Top) z} in let f = o.b in let g = o.a in f g"
    ),
    "church_true": (
        "let t = lambda(x: Top) lambda(y: Top) x in let u = lambda(z: Top) z "
        "in let v = lambda(z: Top) z in let t1 = t u in t1 v"
    ),
    "church_false": (
        "let f = lambda(x: Top) lambda(y: Top) y in let u = lambda(z: Top) z "
        "in let v = lambda(z: Top) z in let f1 = f u in f1 v"
    ),
    "abstract_box": (
        "let box = nu(b: {E: Top .. Top} & {put: all(x: b.E) b.E}) {E = Top} /\\ {put = lambda(x: b.E) x} "
        "in let p = box.put in let w = lambda(z: Top) z in p w"
    ),
    "bot_domain": "let f = lambda(z: Bot) z in let g = lambda(h: all(z: Bot) Top) h in g f",
    "higher_order": (
        "let app = lambda(f: all(z: Top) Top) lambda(a: Top) f a in let i = lambda(z: Top) z "
        "in let app1 = app i in app1 i"
    ),
    "dependent_result": (
        "let mk = lambda(u: Top) nu(s: {T: Top .. Top} & {v: Top}) {T = Top} /\\ {v = u} "
        "in let o = mk mk in o.v"
    ),
    "counter_like": (
        "let c = nu(s: {next: all(u: Top) Top} & {zero: Top}) {next = lambda(u: Top) s} /\\ {zero = s} "
        "in let n = c.next in let z = c.zero in n z"
    ),
    "object_in_lambda": "let f = lambda(z: Top) nu(s: {a: Top}) {a = z} in let o = f f in o.a",
    "compose": (
        "let comp = lambda(f: all(x: Top) Top) lambda(g: all(x: Top) Top) lambda(x: Top) let y = g x in f y "
        "in let i = lambda(x: Top) x in let c1 = comp i in let c2 = c1 i in c2 i"
    ),
    "path_alias": (
        "let o = nu(s: {A: all(x: Top) Top .. all(x: Top) Top} & {f: s.A}) "
        "{A = all(x: Top) Top} /\\ {f = lambda(x: Top) x} in let h = o.f in h o"
    ),
    "let_var_chain": "let a = lambda(z: Top) z in let b = a in let c = b in c a",
    "object_answer": "let o = nu(s: {me: Top}) {me = s} in o",
}

# types from the discussion of "good bounds": none is inert in strict mode
INERTNESS_VECTORS = [
    {"name": "lattice", "type": LATTICE_TYPE, "inert": False, "reason": "non-tight-bounds"},
    {
        "name": "upper-bounded-chain",
        "type": "mu(x: {A: Bot .. all(y: Bot) Top} & {B: x.A .. all(y: Bot) Top})",
        "inert": False,
        "reason": "non-tight-bounds",
    },
    {
        "name": "between-top-and-bot",
        "type": "mu(x: {A: Top .. Top} & {B: Bot .. Bot} & {C: x.B .. x.A})",
        "inert": False,
        "reason": "non-tight-bounds",
    },
    {"name": "tight-member", "type": "mu(x: {A: Top .. Top})", "inert": True, "reason": None},
    {"name": "function", "type": "all(x: {A: Bot .. Top}) x.A", "inert": True, "reason": None},
    {"name": "bad-bounds-declaration", "type": "{A: {a: Top} .. all(z: Top) Top}", "inert": False,
     "reason": "disallowed-constructor"},
    {"name": "duplicate-type", "type": "mu(x: {A: Top .. Top} & {A: Bot .. Bot})", "inert": False,
     "reason": "duplicate-type-label"},
    {"name": "duplicate-field", "type": "mu(x: {a: Top} & {a: Bot})", "inert": False,
     "reason": "duplicate-field-label"},
]

# judgments whose invertible form needs a rule the generator rarely reaches
HAND_PICKED = [
    ("x: mu(x: {A: Top .. Top}); f: all(z: Top) Top", "f", "x.A"),
    ("x: mu(x: {A: Top .. Top})", "lambda(z: Top) z", "x.A"),
    ("o: mu(o: {a: Bot})", "o", "{a: Top}"),
    ("", "lambda(z: Top) z", "all(z: Bot) Top"),
    ("x: mu(x: {A: Top .. Top})", "lambda(z: Top) z", "all(z: x.A) Top"),
    ("x: mu(x: {A: all(z: Top) Top .. all(z: Top) Top}); o: mu(o: {b: x.A})", "o.b", "all(z: Top) Top"),
]


def write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text.rstrip("\n") + "\n", encoding="utf-8")


def build_programs(cfg: SearchConfig) -> None:
    for name, src in PROGRAMS.items():
        d = bounded_search(EMPTY, parse_term(src, {}), None, cfg)
        if not d:
            raise SystemExit(f"{name}: no derivation found")
        require_valid(d)
        write(DATA / "programs" / f"{name}.dot", src)
        save_derivation(d, DATA / "programs" / f"{name}.deriv.json")


def build_bad_bounds() -> None:
    write(DATA / "bad_bounds.dot", BAD_BOUNDS_SRC)
    d = bad_bounds_derivation()
    require_valid(d)
    save_derivation(d, DATA / "bad_bounds.deriv.json")
    write(DATA / "bad_bounds_body.dot", "let y = nu(y: {a: Top}) {a = y.a} in y y")
    write(DATA / "bad_bounds_inert.ctx", "y: mu(y: {a: Top})")
    write(DATA / "bad_bounds_noninert.ctx", "x: {A: {a: Top} .. all(z: Top) Top}; y: mu(y: {a: Top})")


def build_lattice() -> None:
    src = f"lambda(x: {LATTICE_TYPE}) lambda(w: x.A) w"
    env: dict = {}
    t = parse_term(src, env)
    d = bounded_search(EMPTY, t, lattice_target({}), SearchConfig(max_depth=12))
    if not d:
        raise SystemExit("lattice: no derivation found")
    require_valid(d)
    write(DATA / "lattice.dot", src)
    save_derivation(d, DATA / "lattice.deriv.json")
    write(DATA / "lattice.ctx", f"x: {LATTICE_TYPE}")


def _pipeline(g: Context, d) -> list:
    out = [d]
    dt = general_to_tight(g, d)
    out.append(dt)
    j = d.conclusion
    if j.kind == TYP and (isinstance(j.subject, Var) or is_value(j.subject)):
        out.append(tight_to_invertible(g, dt))
    return out


def build_coverage(seeds: int = 400) -> None:
    want = {s.name for s in rule_registry()}
    covered: set[str] = set()
    chosen = []
    for ctx_src, subj, ty in HAND_PICKED:
        env: dict = {}
        g = parse_context(ctx_src, env)
        d = bounded_search(g, parse_term(subj, env), parse_type(ty, env), SearchConfig(max_depth=8))
        for dd in _pipeline(g, d):
            require_valid(dd)
            chosen.append(dd)
            covered |= dd.rules_used()
    for seed in range(seeds):
        if covered >= want:
            break
        r = random.Random(seed)
        g = random_inert_context(r)
        gen = DerivationGen(r)
        try:
            d = gen.typ_term(g, r.randint(0, 4)) if seed % 2 else gen.typ_var(g, r.choice(g.names), r.randint(0, 4))
        except (ValueError, IndexError):
            continue
        for dd in _pipeline(g, d):
            if not dd.rules_used() <= covered:
                require_valid(dd)
                chosen.append(dd)
                covered |= dd.rules_used()
    missing = want - covered
    if missing:
        raise SystemExit(f"coverage incomplete: {sorted(missing)}")
    (DATA / "coverage").mkdir(parents=True, exist_ok=True)
    for i, dd in enumerate(chosen):
        save_derivation(dd, DATA / "coverage" / f"cov{i:02d}_{dd.conclusion.kind}.deriv.json")


def main() -> None:
    for sub in ("programs", "coverage"):
        shutil.rmtree(DATA / sub, ignore_errors=True)
    cfg = SearchConfig(max_depth=8)
    build_bad_bounds()
    build_lattice()
    build_programs(cfg)
    build_coverage()
    write(DATA / "inertness_vectors.json", json.dumps(INERTNESS_VECTORS, indent=1))
    print(f"corpus written to {DATA}")


if __name__ == "__main__":
    main()
