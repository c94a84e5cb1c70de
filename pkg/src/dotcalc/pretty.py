"""Printing DOT syntax back to the concrete grammar of :mod:`dotcalc.parse`.

Binders keep their display name unless that would capture another variable
visible in their scope, in which case a numeric suffix is appended.  Free
variables print under the name given in ``names`` (default: their own
display name).
"""

from __future__ import annotations

from collections.abc import Iterable

from .syntax import (
    All,
    And,
    AndDef,
    App,
    Bot,
    Context,
    Fld,
    FldDef,
    Lam,
    Let,
    Name,
    New,
    Node,
    Rec,
    Sel,
    SelTrm,
    Top,
    TypDec,
    TypDef,
    Var,
    free_vars,
)


def unique_names(names: Iterable[Name], taken: set[str] | None = None) -> dict[Name, str]:
    """Give each distinct variable a distinct display string."""
    taken = set() if taken is None else taken
    out: dict[Name, str] = {}
    for n in names:
        if n in out:
            continue
        text = _fresh_text(n.name, taken)
        taken.add(text)
        out[n] = text
    return out


def _fresh_text(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    stem = base.rstrip("0123456789") or base
    i = 1
    while f"{stem}{i}" in taken:
        i += 1
    return f"{stem}{i}"


class _Printer:
    def __init__(self, names: dict[Name, str] | None):
        self.names: dict[Name, str] = dict(names or {})

    def var(self, n: Name) -> str:
        return self.names.get(n, n.name)

    def binder(self, b: Name, scope: list[Node]) -> tuple[str, dict[Name, str]]:
        """Pick a display name for ``b``; returns it and the saved mapping."""
        visible = set()
        for s in scope:
            visible |= free_vars(s)
        visible.discard(b)
        clash = {self.var(v) for v in visible}
        text = _fresh_text(b.name, clash)
        saved = dict(self.names)
        self.names[b] = text
        return text, saved

    # types

    def type_(self, t) -> str:
        match t:
            case Top():
                return "Top"
            case Bot():
                return "Bot"
            case All(p, dom, cod):
                d = self.type_(dom)
                x, saved = self.binder(p, [cod])
                c = self.type_(cod)
                self.names = saved
                return f"all({x}: {d}) {c}"
            case Rec(s, body):
                x, saved = self.binder(s, [body])
                b = self.type_(body)
                self.names = saved
                return f"mu({x}: {b})"
            case Fld(a, ty):
                return f"{{{a}: {self.type_(ty)}}}"
            case TypDec(a, lo, hi):
                return f"{{{a}: {self.type_(lo)} .. {self.type_(hi)}}}"
            case Sel(r, a):
                return f"{self.var(r)}.{a}"
            case And(l, r):
                left = self.type_(l)
                if isinstance(l, (And, All)):
                    left = f"({left})"
                return f"{left} & {self.type_(r)}"
        raise TypeError(f"not a type: {t!r}")

    # terms

    def term(self, t) -> str:
        match t:
            case Var(n):
                return self.var(n)
            case SelTrm(r, a):
                return f"{self.var(r)}.{a}"
            case App(f, a):
                return f"{self.var(f)} {self.var(a)}"
            case Lam(p, pt, body):
                ty = self.type_(pt)
                x, saved = self.binder(p, [body])
                b = self.term(body)
                self.names = saved
                return f"lambda({x}: {ty}) {b}"
            case New(s, st, defs):
                x, saved = self.binder(s, [st, defs])
                ty = self.type_(st)
                d = self.defs(defs)
                self.names = saved
                return f"nu({x}: {ty}) {d}"
            case Let(b, rhs, body):
                r = self.term(rhs)
                x, saved = self.binder(b, [body])
                u = self.term(body)
                self.names = saved
                return f"let {x} = {r} in {u}"
        raise TypeError(f"not a term: {t!r}")

    def defs(self, d) -> str:
        match d:
            case FldDef(a, rhs):
                return f"{{{a} = {self.term(rhs)}}}"
            case TypDef(a, alias):
                return f"{{{a} = {self.type_(alias)}}}"
            case AndDef(l, r):
                return f"{self.defs(l)} /\\ {self.defs(r)}"
        raise TypeError(f"not a definition: {d!r}")

    def any(self, x) -> str:
        if isinstance(x, (FldDef, TypDef, AndDef)):
            return self.defs(x)
        if isinstance(x, (Var, SelTrm, App, Lam, New, Let)):
            return self.term(x)
        return self.type_(x)


def show(x: Node, names: dict[Name, str] | None = None) -> str:
    """Render a type, term or definition in concrete syntax."""
    return _Printer(names).any(x)


def show_context(g: Context, names: dict[Name, str] | None = None) -> str:
    p = _Printer(names)
    return "; ".join(f"{p.var(n)}: {p.type_(t)}" for n, t in g)
