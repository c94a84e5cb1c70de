"""The shipped corpus: example programs, contexts, derivations and test vectors.

Layout of the ``data`` directory::

    bad_bounds.dot             the bad-bounds lambda
    bad_bounds.deriv.json      its derivation in the empty context
    bad_bounds_body.dot        the extracted let-body
    bad_bounds_inert.ctx       context in which that body gets stuck
    bad_bounds_noninert.ctx    context with the bad type member
    lattice.dot / .deriv.json  lambda over a three-member lattice
    inertness_vectors.json     types with their expected strict verdicts
    programs/NAME.dot          closed programs, each with NAME.deriv.json
    coverage/*.deriv.json      derivations that together use every rule
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import build as B
from .derivio import load_derivation
from .parse import parse_context, parse_term, parse_type
from .rules import Derivation
from .syntax import Context, Let, Name, Term, Type


def data_dir() -> Path:
    return Path(str(resources.files("dotcalc") / "data"))


def read_text(name: str, root: Path | None = None) -> str:
    return ((root or data_dir()) / name).read_text(encoding="utf-8").strip()


@dataclass(frozen=True)
class Program:
    name: str
    source: str
    term: Term
    derivation: Derivation

    @property
    def type(self) -> Type:
        return self.derivation.conclusion.type


def load_program(path: Path) -> Program:
    src = path.read_text(encoding="utf-8").strip()
    deriv = path.with_name(path.name[: -len(".dot")] + ".deriv.json")
    return Program(path.stem, src, parse_term(src, {}), load_derivation(deriv))


def programs(root: Path | None = None) -> list[Program]:
    """Every ``NAME.dot`` with a sibling derivation, sorted by name."""
    root = root or data_dir() / "programs"
    return [load_program(p) for p in sorted(root.glob("*.dot")) if p.with_suffix(".deriv.json").exists()]


def coverage_derivations(root: Path | None = None) -> list[tuple[str, Derivation]]:
    root = root or data_dir() / "coverage"
    return [(p.name, load_derivation(p)) for p in sorted(root.glob("*.deriv.json"))]


def all_derivation_files(root: Path | None = None) -> list[Path]:
    root = root or data_dir()
    return sorted(root.rglob("*.deriv.json"))


def inertness_vectors(root: Path | None = None) -> list[dict]:
    return json.loads(read_text("inertness_vectors.json", root))


# ---------------------------------------------------------------- bad bounds

BAD_BOUNDS_SRC = "lambda(x: {A: {a: Top} .. all(z: Top) Top}) let y = nu(y: {a: Top}) {a = y.a} in y y"


def bad_bounds_derivation(term: Term | None = None) -> Derivation:
    """The typing of the bad-bounds lambda, rule by rule.

    Inside the lambda, ``x`` declares ``{a: ⊤} <: x.A <: ∀(z: ⊤)⊤``, so the
    object ``y`` can be used as a function.
    """
    lam = term if term is not None else parse_term(BAD_BOUNDS_SRC, {})
    x, xt, body = lam.param, lam.param_type, lam.body
    assert isinstance(body, Let)
    g1 = Context(()).extend(x, xt)

    obj = body.rhs
    y_self = obj.self_
    g_obj = g1.extend(y_self, obj.self_type)
    field = B.fld_e(B.var(g_obj, y_self))
    drhs = B.new_i(g1, B.def_trm("a", field))

    y: Name = body.bound
    g2 = g1.extend(y, drhs.conclusion.type)
    chain = B.trans(B.sub_sel(B.var(g2, x)), B.sel_sub(B.var(g2, x)))
    dfun = B.sub(B.rec_e(B.var(g2, y)), chain)
    darg = B.sub(B.var(g2, y), B.top(g2, B.var(g2, y).conclusion.type))
    return B.all_i(Context(()), B.let(drhs, B.all_e(dfun, darg)))


def bad_bounds_contexts() -> tuple[tuple[Context, dict], tuple[Context, dict]]:
    """``(inert, env)`` and ``(non-inert, env)``; each env maps names to binders."""
    out = []
    for name in ("bad_bounds_inert.ctx", "bad_bounds_noninert.ctx"):
        env: dict = {}
        out.append((parse_context(read_text(name), env), env))
    return out[0], out[1]


def bad_bounds_body() -> Term:
    """The let-body of the bad-bounds lambda, closed on its own."""
    return parse_term(read_text("bad_bounds_body.dot"), {})


LATTICE_TYPE = "mu(x: {A: Bot .. Top} & {B: x.A .. x.C} & {C: Bot .. Top})"


def lattice_target(env: dict) -> Type:
    return parse_type(f"all(x: {LATTICE_TYPE}) all(w: x.A) x.C", env)


__all__ = [
    "BAD_BOUNDS_SRC",
    "LATTICE_TYPE",
    "Program",
    "all_derivation_files",
    "bad_bounds_body",
    "bad_bounds_contexts",
    "bad_bounds_derivation",
    "coverage_derivations",
    "data_dir",
    "inertness_vectors",
    "lattice_target",
    "load_program",
    "programs",
    "read_text",
]
