"""Concrete syntax for DOT terms, types, definitions and contexts.

Grammar (ASCII; a few Unicode aliases are accepted)::

    term  ::= 'let' x '=' term 'in' term
            | 'lambda' '(' x ':' type ')' term
            | 'nu' '(' x ':' type ')' defs
            | x '.' a | x y | x | '(' term ')'
    defs  ::= def ('/\\' def)*          right-nested
    def   ::= '{' a '=' term '}' | '{' A '=' type '}'
    type  ::= prim ('&' type)?          right-assoc, lowest precedence
    prim  ::= 'Top' | 'Bot' | 'all' '(' x ':' type ')' type | 'mu' '(' x ':' type ')'
            | '{' a ':' type '}' | '{' A ':' type '..' type '}' | x '.' A | '(' type ')'
    ctx   ::= (x ':' type (';' x ':' type)* ';'?)?

Term labels start with a lowercase letter, type labels with an uppercase one.
Free variables are resolved through an ``env`` mapping display names to
:class:`~dotcalc.syntax.Name`; names missing from it are created once and
recorded, so repeated occurrences share one identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .syntax import (
    BOT,
    TOP,
    All,
    And,
    App,
    Context,
    Def,
    Fld,
    FldDef,
    Lam,
    Let,
    Name,
    New,
    Rec,
    Sel,
    SelTrm,
    Term,
    Type,
    TypDec,
    TypDef,
    Var,
    and_defs,
)

KEYWORDS = {"let", "in", "lambda", "nu", "mu", "all", "Top", "Bot"}

_UNICODE = {"λ": "lambda", "ν": "nu", "μ": "mu", "∀": "all", "⊤": "Top", "⊥": "Bot"}


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("span start after end")


class ParseError(Exception):
    def __init__(self, span: SourceSpan, message: str, expected: list[str] | None = None):
        self.span = span
        self.message = message or "syntax error"
        self.expected = list(expected or [])
        super().__init__(f"{span.line}:{span.column}: {self.message}")


@dataclass
class Token:
    kind: str  # IDENT, SYM, EOF
    text: str
    span: SourceSpan


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>(?:\#|//)[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>\.\.|/\\|[.:=(){}&;∧])
  | (?P<uni>[λνμ∀⊤⊥])
    """,
    re.VERBOSE,
)


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            span = SourceSpan(pos, pos + 1, line, pos - line_start + 1)
            raise ParseError(span, f"unexpected character {src[pos]!r}")
        kind = m.lastgroup
        text = m.group()
        span = SourceSpan(pos, m.end(), line, pos - line_start + 1)
        if kind == "ident":
            tokens.append(Token("IDENT", text, span))
        elif kind == "sym":
            tokens.append(Token("SYM", text, span))
        elif kind == "uni":
            tokens.append(Token("IDENT", _UNICODE[text], span))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", SourceSpan(pos, pos, line, pos - line_start + 1)))
    return tokens


@dataclass
class _Parser:
    tokens: list[Token]
    env: dict[str, Name]
    pos: int = 0
    scope: list[tuple[str, Name]] = field(default_factory=list)

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def fail(self, message: str, expected: list[str] | None = None, tok: Token | None = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        raise ParseError(tok.span, f"{message} (found {found!r})", expected)

    def at(self, text: str) -> bool:
        return self.tok.kind != "EOF" and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}", [text])
        tok = self.tok
        self.pos += 1
        return tok

    def ident(self, what: str = "identifier") -> Token:
        tok = self.tok
        if tok.kind != "IDENT" or tok.text in KEYWORDS:
            self.fail(f"expected {what}", [what])
        self.pos += 1
        return tok

    def expect_end(self) -> None:
        if self.tok.kind != "EOF":
            self.fail("unexpected trailing input", ["end of input"])

    # -- names

    def lookup(self, text: str) -> Name:
        for name, n in reversed(self.scope):
            if name == text:
                return n
        if text not in self.env:
            self.env[text] = Name(text)
        return self.env[text]

    def bind(self, text: str) -> Name:
        n = Name(text)
        self.scope.append((text, n))
        return n

    def unbind(self) -> None:
        self.scope.pop()

    # -- types

    def type_(self) -> Type:
        parts = [self.prim_type()]
        while self.at("&") or self.at("∧"):
            self.pos += 1
            parts.append(self.prim_type())
        out = parts.pop()
        while parts:
            out = And(parts.pop(), out)
        return out

    def prim_type(self) -> Type:
        tok = self.tok
        if tok.kind == "IDENT":
            if tok.text == "Top":
                self.pos += 1
                return TOP
            if tok.text == "Bot":
                self.pos += 1
                return BOT
            if tok.text == "all":
                self.pos += 1
                self.expect("(")
                x = self.ident("parameter name").text
                self.expect(":")
                dom = self.type_()
                self.expect(")")
                p = self.bind(x)
                cod = self.type_()
                self.unbind()
                return All(p, dom, cod)
            if tok.text == "mu":
                self.pos += 1
                self.expect("(")
                x = self.ident("self name").text
                self.expect(":")
                s = self.bind(x)
                body = self.type_()
                self.unbind()
                self.expect(")")
                return Rec(s, body)
            if tok.text not in KEYWORDS:
                self.pos += 1
                receiver = self.lookup(tok.text)
                self.expect(".")
                lab = self.tok
                if lab.kind != "IDENT" or not lab.text[0].isupper() or lab.text in KEYWORDS:
                    self.fail("type projection needs a type label (uppercase)", ["type label"])
                self.pos += 1
                return Sel(receiver, lab.text)
        if self.at("("):
            self.pos += 1
            t = self.type_()
            self.expect(")")
            return t
        if self.at("{"):
            self.pos += 1
            lab = self.ident("member label")
            self.expect(":")
            first = self.type_()
            if lab.text[0].isupper():
                if not self.at(".."):
                    self.fail(f"type member {lab.text} needs bounds 'S .. U'", [".."])
                self.pos += 1
                second = self.type_()
                self.expect("}")
                return TypDec(lab.text, first, second)
            if self.at(".."):
                self.fail(f"field {lab.text} cannot have bounds", ["}"])
            self.expect("}")
            return Fld(lab.text, first)
        self.fail("expected a type", ["Top", "Bot", "all", "mu", "{", "x.A", "("])

    # -- terms

    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "IDENT":
            if tok.text == "let":
                self.pos += 1
                x = self.ident("variable").text
                self.expect("=")
                rhs = self.term()
                self.expect("in")
                b = self.bind(x)
                body = self.term()
                self.unbind()
                return Let(b, rhs, body)
            if tok.text == "lambda":
                self.pos += 1
                self.expect("(")
                x = self.ident("parameter name").text
                self.expect(":")
                pt = self.type_()
                self.expect(")")
                p = self.bind(x)
                body = self.term()
                self.unbind()
                return Lam(p, pt, body)
            if tok.text == "nu":
                self.pos += 1
                self.expect("(")
                x = self.ident("self name").text
                self.expect(":")
                s = self.bind(x)
                st = self.type_()
                self.expect(")")
                defs = self.defs()
                self.unbind()
                return New(s, st, defs)
            if tok.text not in KEYWORDS:
                self.pos += 1
                head = self.lookup(tok.text)
                if self.at("."):
                    self.pos += 1
                    lab = self.tok
                    if lab.kind != "IDENT" or not lab.text[0].islower() or lab.text in KEYWORDS:
                        self.fail("selection needs a term label (lowercase)", ["term label"])
                    self.pos += 1
                    self.no_chain()
                    return SelTrm(head, lab.text)
                nxt = self.tok
                if nxt.kind == "IDENT" and nxt.text not in KEYWORDS:
                    self.pos += 1
                    arg = self.lookup(nxt.text)
                    self.no_chain()
                    return App(head, arg)
                if self.at("("):
                    self.fail("application argument must be a variable (ANF)", ["variable"])
                return Var(head)
        if self.at("("):
            open_tok = self.tok
            self.pos += 1
            t = self.term()
            self.expect(")")
            if self.at(".") or self.tok.kind == "IDENT" and self.tok.text not in KEYWORDS:
                self.fail(
                    "selection and application take variables, not compound terms (ANF)",
                    ["variable"],
                    tok=open_tok,
                )
            return t
        self.fail("expected a term", ["let", "lambda", "nu", "variable", "("])

    def no_chain(self) -> None:
        if self.at(".") or (self.tok.kind == "IDENT" and self.tok.text not in KEYWORDS):
            self.fail("selection and application take variables, not compound terms (ANF)")

    def defs(self) -> Def:
        items = [self.def_()]
        while self.at("/\\") or self.at("∧"):
            self.pos += 1
            items.append(self.def_())
        return and_defs(items)

    def def_(self) -> Def:
        self.expect("{")
        lab = self.ident("member label").text
        self.expect("=")
        if lab[0].isupper():
            d: Def = TypDef(lab, self.type_())
        else:
            d = FldDef(lab, self.term())
        self.expect("}")
        return d

    def context(self) -> Context:
        bindings: list[tuple[Name, Type]] = []
        while self.tok.kind != "EOF":
            x = self.ident("variable").text
            self.expect(":")
            # the binding's own name is in scope for its type (self-reference);
            # earlier bindings are resolved through env
            n = self.env.get(x) or Name(x)
            self.env[x] = n
            bindings.append((n, self.type_()))
            if not self.at(";"):
                break
            self.pos += 1
        return Context(tuple(bindings))


def _run(src: str | bytes, env: dict[str, Name] | None, rule: str):
    if isinstance(src, bytes):
        try:
            src = src.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(SourceSpan(exc.start, exc.end, 1, exc.start + 1), "input is not UTF-8")
    env = {} if env is None else env
    p = _Parser(tokenize(src), env)
    try:
        result = getattr(p, rule)()
        p.expect_end()
    except RecursionError:
        raise ParseError(p.tok.span, "input nested too deeply") from None
    return result


def parse_term(src: str | bytes, env: dict[str, Name] | None = None) -> Term:
    return _run(src, env, "term")


def parse_type(src: str | bytes, env: dict[str, Name] | None = None) -> Type:
    return _run(src, env, "type_")


def parse_defs(src: str | bytes, env: dict[str, Name] | None = None) -> Def:
    return _run(src, env, "defs")


def parse_context(src: str | bytes, env: dict[str, Name] | None = None) -> Context:
    """Parse ``x: T; y: U``.  Each name is added to ``env`` as it is bound."""
    return _run(src, env, "context")
