"""The ``dot`` command.

Exit status is 0 on success, 1 when the answer is negative (invalid
derivation, stuck program, search gave up, proof precondition unmet) and
2 for usage, parse and file errors.  Reports go to standard output, one
fact per line, in a fixed order.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable

from . import corpus
from .derivio import DerivationFormatError, document_names, dump_derivation, parse_derivation
from .evaluator import ANSWER_OUTCOME, Answer, Stuck, run, step
from .inert import InertReport, is_inert_context, is_inert_type
from .parse import ParseError, parse_context, parse_defs, parse_term, parse_type
from .pretty import show, show_context
from .proofs import (
    ProofError,
    canon_fun_val,
    canon_fun_var,
    canon_obj_val,
    canon_obj_var,
    general_to_tight,
    narrow,
    subst_deriv,
    tight_to_invertible,
)
from .rules import Derivation, precise_closure, show_judgment, validate
from .search import NotFound, SearchConfig, bounded_search
from .syntax import Context, Name, free_vars

OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- input


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _source(args) -> str:
    if getattr(args, "expr", None) is not None:
        return args.expr
    if getattr(args, "file", None):
        return _read(args.file)
    raise UsageError("give a FILE or --expr")


def _context(args, env: dict) -> Context:
    if getattr(args, "ctx", None):
        return parse_context(_read(args.ctx).strip(), env)
    return Context(())


def _derivation(path: str, env: dict | None = None) -> Derivation:
    return parse_derivation(_read(path), True, env)


def _env_of(g: Context) -> dict[str, Name]:
    return {n.name: n for n in g.names}


# ---------------------------------------------------------------- output


def render_tree(d: Derivation, names: dict[Name, str] | None = None) -> list[str]:
    names = document_names(d) if names is None else names
    return ["  " * len(path) + f"{node.rule}  {show_judgment(node.conclusion, names)}" for path, node in d.walk()]


def _emit_derivation(d: Derivation, as_json: bool) -> None:
    if as_json:
        print(dump_derivation(d))
    else:
        print("\n".join(render_tree(d)))


def _summary(d: Derivation) -> str:
    return f"{d.size()} nodes, depth {d.depth()}, rules {', '.join(sorted(d.rules_used()))}"


def _inert_line(rep: InertReport, who: str = "") -> str:
    if rep.verdict:
        return "inert"
    v = rep.first_violation
    where = "/".join(v.path) or "root"
    prefix = f"{who}: " if who else ""
    return f"not inert: {prefix}{v.reason} at {where} ({v.detail})"


def _report_invalid(errors) -> int:
    print(f"invalid: {len(errors)} error(s)")
    for e in errors:
        print(f"  {e}")
    return FAIL


# ---------------------------------------------------------------- commands


def cmd_parse(args) -> int:
    src = _source(args)
    env: dict = {}
    node = {
        "term": parse_term,
        "type": parse_type,
        "defs": parse_defs,
        "ctx": parse_context,
    }[args.kind](src, env)
    print(repr(node))
    return OK


def cmd_print(args) -> int:
    src = _source(args)
    env: dict = {}
    if args.kind == "ctx":
        print(show_context(parse_context(src, env)))
        return OK
    parser = {"term": parse_term, "type": parse_type, "defs": parse_defs}[args.kind]
    print(show(parser(src, env)))
    return OK


def cmd_inert(args) -> int:
    loose = args.loose_inert
    if args.type is not None or args.file:
        t = parse_type(args.type if args.type is not None else _read(args.file), {})
        rep = is_inert_type(t, loose)
        print(_inert_line(rep))
        return OK if rep.verdict else FAIL
    if args.ctx:
        g = parse_context(_read(args.ctx).strip(), {})
        rep = is_inert_context(g, loose)
        print("inert" if rep.ok else _inert_line(rep.report, rep.offender.name))
        return OK if rep.ok else FAIL
    raise UsageError("give --type, a FILE, or --ctx")


def cmd_precise(args) -> int:
    env: dict = {}
    g = _context(args, env)
    if args.var not in env:
        raise UsageError(f"{args.var} is not bound in the context")
    x = env[args.var]
    for T, d in precise_closure(g, x):
        line = f"{show(T)}    by {' < '.join(n.rule for _, n in d.walk())}"
        print(line)
        if args.json:
            print(dump_derivation(d))
    return OK


def cmd_check(args) -> int:
    d = _derivation(args.deriv)
    errors = validate(d)
    if errors:
        return _report_invalid(errors)
    print("valid")
    print(f"conclusion  {show_judgment(d.conclusion, document_names(d))}")
    print(f"summary     {_summary(d)}")
    return OK


def cmd_infer(args) -> int:
    env: dict = {}
    g = _context(args, env)
    t = parse_term(_source(args), env)
    target = parse_type(args.target, env) if args.target else None
    res = bounded_search(g, t, target, SearchConfig(max_depth=args.depth))
    if isinstance(res, NotFound):
        print(f"not-found: {res.reason} (depth {args.depth}, {res.nodes} goals)")
        return FAIL
    if args.json:
        print(dump_derivation(res))
        return OK
    names = document_names(res)
    print(f"type  {show(res.conclusion.type, names)}")
    print("\n".join(render_tree(res, names)))
    return OK


def cmd_transform(args) -> int:
    d = _derivation(args.deriv)
    g = d.conclusion.ctx
    out = general_to_tight(g, d)
    if args.to == "invertible":
        out = tight_to_invertible(g, out)
    _emit_derivation(out, args.json)
    return OK


_CANON: dict[str, Callable] = {
    "fun-var": canon_fun_var,
    "fun-val": canon_fun_val,
    "obj-var": canon_obj_var,
    "obj-val": canon_obj_val,
}


def cmd_canon(args) -> int:
    d = _derivation(args.deriv)
    g = d.conclusion.ctx
    if args.lemma == "obj-val":
        res = canon_obj_val(g, d, args.label)
    else:
        res = _CANON[args.lemma](g, d)
    names = document_names(d)
    for key, val in vars(res).items():
        if val is None:
            continue
        if isinstance(val, Derivation):
            print(f"{key:13} {show_judgment(val.conclusion, names)}    [{val.rule}, {val.size()} nodes]")
        elif isinstance(val, Name):
            print(f"{key:13} {names.get(val, val.name)}")
        elif isinstance(val, str):
            print(f"{key:13} {val}")
        else:
            print(f"{key:13} {show(val, names)}")
    return OK


def cmd_narrow(args) -> int:
    env: dict = {}
    d = _derivation(args.deriv, env)
    env = _env_of(d.conclusion.ctx)
    if args.var not in env:
        raise UsageError(f"{args.var} is not bound in the derivation's context")
    t_new = parse_type(args.type, env)
    sub = _derivation(args.sub, dict(env))
    _emit_derivation(narrow(d, env[args.var], t_new, sub), args.json)
    return OK


def cmd_subst(args) -> int:
    d = _derivation(args.deriv)
    env = _env_of(d.conclusion.ctx)
    if args.var not in env:
        raise UsageError(f"{args.var} is not bound in the derivation's context")
    dy = _derivation(args.with_, dict(env))
    _emit_derivation(subst_deriv(d, env[args.var], dy), args.json)
    return OK


def _term_names(t) -> dict[Name, str]:
    from .pretty import unique_names

    return unique_names(sorted(free_vars(t), key=lambda n: n.uid))


def cmd_step(args) -> int:
    t = parse_term(_source(args), {})
    r = step(t)
    if isinstance(r, Answer):
        print("answer")
        return OK
    if isinstance(r, Stuck):
        print(f"stuck: {r.reason}: {show(r.focus, _term_names(r.focus))}")
        return FAIL
    print(f"{'/'.join(r.rules)}  {show(r.next, _term_names(r.next))}")
    return OK


def cmd_run(args) -> int:
    t = parse_term(_source(args), {})
    tr = run(t, args.fuel)
    print(tr.to_json() if args.json else tr.to_text())
    return OK if tr.outcome == ANSWER_OUTCOME else FAIL


def soundness_report(root: Path | None, fuel: int, depth: int) -> tuple[list[str], bool]:
    """Run every corpus program, re-deriving its type after each step."""
    cfg = SearchConfig(max_depth=depth)
    empty = Context(())
    lines, ok = [], True
    progs = corpus.programs(root)
    if not progs:
        return [f"no programs found in {root}"], False
    for prog in progs:
        problem = None
        errors = validate(prog.derivation)
        if errors:
            problem = f"derivation invalid: {errors[0]}"
        elif prog.derivation.conclusion.ctx.bindings:
            problem = "derivation is not in the empty context"
        tr = run(prog.term, fuel)
        if problem is None and tr.outcome != ANSWER_OUTCOME:
            problem = tr.outcome + (f" ({tr.stuck.reason})" if tr.stuck else "")
        if problem is None:
            for i, s in enumerate(tr.states[1:], 1):
                if isinstance(bounded_search(empty, s, prog.type, cfg), NotFound):
                    problem = f"type not re-derived after step {i}"
                    break
        names = document_names(prog.derivation)
        if problem is None:
            lines.append(f"PASS {prog.name}  steps={len(tr.rules)}  type={show(prog.type, names)}")
        else:
            ok = False
            lines.append(f"FAIL {prog.name}  {problem}")
    return lines, ok


def cmd_soundness(args) -> int:
    root = Path(args.dir) if args.dir else None
    if root is not None and not root.is_dir():
        raise UsageError(f"{root} is not a directory")
    if root is not None and (root / "programs").is_dir():
        root = root / "programs"
    lines, ok = soundness_report(root, args.fuel, args.depth)
    print("\n".join(lines))
    return OK if ok else FAIL


# ---------------------------------------------------------------- demos


def demo_bad_bounds(depth: int) -> int:
    lam = parse_term(corpus.read_text("bad_bounds.dot"), {})
    print("term")
    print(f"  {show(lam)}")

    d = parse_derivation(corpus.read_text("bad_bounds.deriv.json"))
    errors = validate(d)
    print("derivation")
    print(f"  {'valid' if not errors else 'INVALID'}: {_summary(d)}")
    print(f"  concludes {show_judgment(d.conclusion, document_names(d))}")

    g = Context(()).extend(lam.param, lam.param_type)
    rep = is_inert_context(g)
    print("context of the body")
    print(f"  {show_context(g)}")
    print(f"  {'inert' if rep.ok else _inert_line(rep.report, rep.offender.name)}")

    (gi, envi), (gn, envn) = corpus.bad_bounds_contexts()
    cfg = SearchConfig(max_depth=depth)
    print("search for y y")
    for label, ctx, env in (("inert", gi, envi), ("non-inert", gn, envn)):
        res = bounded_search(ctx, parse_term("y y", env), None, cfg)
        if isinstance(res, NotFound):
            print(f"  {label:9} [{show_context(ctx)}]: not-found")
        else:
            chain = [n for _, n in res.walk() if n.rule in ("<:-Sel", "Sel-<:")]
            steps = " <: ".join([show(chain[0].conclusion.lhs), show(chain[0].conclusion.rhs), show(chain[-1].conclusion.rhs)])
            print(f"  {label:9} [{show_context(ctx)}]: found at {show(res.conclusion.type)} via {steps}")

    body = corpus.bad_bounds_body()
    tr = run(body, 1000)
    print("evaluation of the body")
    for line in tr.to_text().splitlines():
        print(f"  {line}")
    return OK if not errors and tr.stuck is not None else FAIL


def demo_lattice(depth: int) -> int:
    src = corpus.read_text("lattice.dot")
    print("term")
    print(f"  {src}")
    d = parse_derivation(corpus.read_text("lattice.deriv.json"))
    errors = validate(d)
    print("derivation")
    print(f"  {'valid' if not errors else 'INVALID'}: {_summary(d)}")
    print(f"  concludes {show_judgment(d.conclusion, document_names(d))}")
    t = parse_type(corpus.LATTICE_TYPE, {})
    print("parameter type")
    print(f"  {_inert_line(is_inert_type(t))}")
    return OK if not errors else FAIL


DEMOS = {"bad-bounds": demo_bad_bounds, "lattice": demo_lattice}


def cmd_demo(args) -> int:
    return DEMOS[args.name](args.depth)


# ---------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dot", description="DOT calculus toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name: str, fn, help_: str, source: bool = False, **kw) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_, **kw)
        sp.set_defaults(fn=fn)
        if source:
            sp.add_argument("file", nargs="?", help="input file, or - for stdin")
            sp.add_argument("-e", "--expr", help="inline source instead of a file")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        return sp

    for name, fn in (("parse", cmd_parse), ("print", cmd_print)):
        sp = cmd(name, fn, f"{name} a term, type, definition or context", source=True)
        sp.add_argument("--kind", choices=("term", "type", "defs", "ctx"), default="term")

    sp = cmd("inert", cmd_inert, "decide inertness of a type or context")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--type")
    sp.add_argument("--ctx")
    sp.add_argument("--loose-inert", action="store_true", help="allow repeated field labels")

    sp = cmd("precise", cmd_precise, "list the precise types of a variable")
    sp.add_argument("var")
    sp.add_argument("--ctx", required=True)

    sp = cmd("check", cmd_check, "validate a derivation")
    sp.add_argument("--deriv", required=True)

    sp = cmd("infer", cmd_infer, "bounded search for a typing", source=True)
    sp.add_argument("--ctx")
    sp.add_argument("--target", help="type to check against")
    sp.add_argument("--depth", type=int, default=8)

    sp = cmd("transform", cmd_transform, "general to tight or invertible typing")
    sp.add_argument("--deriv", required=True)
    sp.add_argument("--to", choices=("tight", "invertible"), default="tight")

    sp = cmd("canon", cmd_canon, "canonical-forms decomposition")
    sp.add_argument("lemma", choices=sorted(_CANON))
    sp.add_argument("--deriv", required=True)
    sp.add_argument("--label", help="field label for obj-val")

    sp = cmd("narrow", cmd_narrow, "narrow a context binding")
    sp.add_argument("--deriv", required=True)
    sp.add_argument("--var", required=True)
    sp.add_argument("--type", required=True)
    sp.add_argument("--sub", required=True, help="derivation of the new type's subtyping")

    sp = cmd("subst", cmd_subst, "substitute a variable for the last binding")
    sp.add_argument("--deriv", required=True)
    sp.add_argument("--var", required=True, help="replacement variable y")
    sp.add_argument("--with", dest="with_", required=True, help="derivation typing y")

    cmd("step", cmd_step, "one reduction step", source=True)
    sp = cmd("run", cmd_run, "evaluate to an answer", source=True)
    sp.add_argument("--fuel", type=int, default=1000)

    sp = cmd("soundness", cmd_soundness, "run and re-type every corpus program")
    sp.add_argument("dir", nargs="?", help="corpus directory (default: the shipped corpus)")
    sp.add_argument("--fuel", type=int, default=1000)
    sp.add_argument("--depth", type=int, default=8)

    sp = cmd("demo", cmd_demo, "narrated walk-throughs")
    sp.add_argument("name", choices=sorted(DEMOS))
    sp.add_argument("--depth", type=int, default=8)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for flag in ("depth", "fuel"):
        if getattr(args, flag, 1) < (0 if flag == "fuel" else 1):
            parser.error(f"--{flag} out of range")
    try:
        return args.fn(args)
    except (ParseError, DerivationFormatError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except ProofError as exc:
        print(f"failed: {exc.code}: {exc.detail}" if exc.detail else f"failed: {exc.code}")
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
