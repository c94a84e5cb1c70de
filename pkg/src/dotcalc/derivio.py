"""Reading and writing ``.deriv.json`` derivation documents.

A document is a tree of nodes::

    {"rule": "Sub",
     "conclusion": {"kind": "typ", "ctx": ["x: Top"], "subject": "x", "type": "Top"},
     "premises": [ ... ]}

Subtyping kinds use ``lhs``/``rhs`` instead of ``subject``/``type``.  All
types, terms and definitions are surface-syntax strings.  Free variable
names are resolved through one environment shared by the whole document,
so ``x`` means the same variable in every node.
"""

from __future__ import annotations

import json
from collections.abc import Iterable
from pathlib import Path

from .parse import ParseError, SourceSpan, parse_context, parse_defs, parse_term, parse_type
from .pretty import show, show_context, unique_names
from .rules import DEFS, KINDS, Derivation, Judgment, lookup
from .syntax import Context, Name, free_vars


class DerivationFormatError(ValueError):
    """A document that does not describe a derivation tree."""

    def __init__(self, path: tuple[int, ...], message: str):
        self.path = path
        self.message = message
        where = "/".join(map(str, path)) or "root"
        super().__init__(f"[{where}] {message}")


# ---------------------------------------------------------------- loading


def _judgment(obj: object, env: dict[str, Name], path: tuple[int, ...]) -> Judgment:
    if not isinstance(obj, dict):
        raise DerivationFormatError(path, "conclusion must be an object")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise DerivationFormatError(path, f"unknown judgment kind {kind!r}")
    raw_ctx = obj.get("ctx", [])
    if isinstance(raw_ctx, str):
        raw_ctx = [raw_ctx] if raw_ctx.strip() else []
    if not isinstance(raw_ctx, list) or not all(isinstance(b, str) for b in raw_ctx):
        raise DerivationFormatError(path, "ctx must be a list of 'x: T' strings")

    def field(key: str, parser):
        text = obj.get(key)
        if not isinstance(text, str):
            raise DerivationFormatError(path, f"{kind} judgment needs a string field {key!r}")
        try:
            return parser(text, env)
        except ParseError as exc:
            raise DerivationFormatError(path, f"{key}: {exc}") from None

    try:
        bindings: list = []
        for b in raw_ctx:
            bindings.extend(parse_context(b, env).bindings)
        ctx = Context(tuple(bindings))
    except ParseError as exc:
        raise DerivationFormatError(path, f"ctx: {exc}") from None

    if kind in ("subtyp", "subtyp_tight"):
        return Judgment(kind, ctx, lhs=field("lhs", parse_type), rhs=field("rhs", parse_type))
    subject_key = "subject" if "subject" in obj else ("defs" if kind == DEFS else "term")
    subject = field(subject_key, parse_defs if kind == DEFS else parse_term)
    return Judgment(kind, ctx, subject=subject, type=field("type", parse_type))


def _node(obj: object, env: dict[str, Name], path: tuple[int, ...], strict: bool) -> Derivation:
    if not isinstance(obj, dict):
        raise DerivationFormatError(path, "node must be an object")
    rule = obj.get("rule")
    if not isinstance(rule, str):
        raise DerivationFormatError(path, "node needs a string 'rule'")
    # conclusions are parsed before premises so binder names introduced in a
    # premise context cannot shadow a free variable of the conclusion
    conclusion = _judgment(obj.get("conclusion"), env, path)
    premises = obj.get("premises", [])
    if not isinstance(premises, list):
        raise DerivationFormatError(path, "premises must be a list")
    if strict:
        schema = lookup(rule)
        if schema is None:
            raise DerivationFormatError(path, f"unknown rule {rule!r}")
        if schema.system != conclusion.kind:
            raise DerivationFormatError(
                path, f"system mismatch: {schema.name} concludes {schema.system}, not {conclusion.kind}"
            )
        if schema.arity != len(premises):
            raise DerivationFormatError(
                path, f"arity mismatch: {schema.name} takes {schema.arity} premise(s), got {len(premises)}"
            )
    kids = tuple(_node(p, env, path + (i,), strict) for i, p in enumerate(premises))
    return Derivation(rule, conclusion, kids)


def derivation_from_obj(obj: object, strict: bool = True, env: dict[str, Name] | None = None) -> Derivation:
    return _node(obj, {} if env is None else env, (), strict)


def parse_derivation(doc: str | bytes, strict: bool = True, env: dict[str, Name] | None = None) -> Derivation:
    """Load a derivation document.

    With ``strict`` (the default) rule names must resolve, each rule must
    belong to its conclusion's judgment kind, and premise counts must match
    the schema.  ``strict=False`` defers those checks to the validator.
    """
    try:
        obj = json.loads(doc)
    except json.JSONDecodeError as exc:
        span = SourceSpan(exc.pos, exc.pos, exc.lineno, exc.colno)
        raise ParseError(span, f"invalid JSON: {exc.msg}") from None
    except UnicodeDecodeError as exc:
        raise ParseError(SourceSpan(exc.start, exc.end, 1, exc.start + 1), "input is not UTF-8") from None
    return derivation_from_obj(obj, strict, env)


def load_derivation(path: str | Path, strict: bool = True) -> Derivation:
    return parse_derivation(Path(path).read_bytes(), strict)


# ---------------------------------------------------------------- saving


def _judgment_names(j: Judgment) -> Iterable[Name]:
    for n, t in j.ctx:
        yield n
        yield from sorted(free_vars(t), key=lambda v: v.uid)
    for part in (j.subject, j.type, j.lhs, j.rhs):
        if part is not None:
            yield from sorted(free_vars(part), key=lambda v: v.uid)


def document_names(d: Derivation) -> dict[Name, str]:
    """Distinct display names for every free variable in the tree."""
    order: list[Name] = []
    for _, node in d.walk():
        order.extend(_judgment_names(node.conclusion))
    return unique_names(order)


def judgment_to_obj(j: Judgment, names: dict[Name, str]) -> dict:
    ctx = show_context(j.ctx, names)
    out: dict = {"kind": j.kind, "ctx": ctx.split("; ") if ctx else []}
    if j.is_subtyping:
        out["lhs"] = show(j.lhs, names)
        out["rhs"] = show(j.rhs, names)
    else:
        out["subject"] = show(j.subject, names)
        out["type"] = show(j.type, names)
    return out


def derivation_to_obj(d: Derivation, names: dict[Name, str] | None = None) -> dict:
    names = document_names(d) if names is None else names
    return {
        "rule": d.rule,
        "conclusion": judgment_to_obj(d.conclusion, names),
        "premises": [derivation_to_obj(p, names) for p in d.premises],
    }


def dump_derivation(d: Derivation, indent: int | None = 1) -> str:
    return json.dumps(derivation_to_obj(d), indent=indent, ensure_ascii=False)


def save_derivation(d: Derivation, path: str | Path) -> None:
    Path(path).write_text(dump_derivation(d) + "\n", encoding="utf-8")
