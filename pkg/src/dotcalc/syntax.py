"""Abstract syntax of DOT: types, terms, definitions and typing contexts.

Variables are identified by a globally unique integer ``uid``; the ``name``
is only a display hint.  Every binder created by the parser or by
freshening gets a new uid, so capture can only happen when a transformation
deliberately reuses an existing :class:`Name` as a binder.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

_uids = itertools.count(1)


@dataclass(frozen=True, eq=False)
class Name:
    """A variable.  Equality and hashing go through ``uid`` only."""

    name: str
    uid: int = field(default_factory=lambda: next(_uids))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Name) and other.uid == self.uid

    def __hash__(self) -> int:
        return hash(self.uid)

    def fresh(self) -> Name:
        return Name(self.name)

    def __repr__(self) -> str:
        return f"{self.name}#{self.uid}"


# ---------------------------------------------------------------- types


class Type:
    __slots__ = ()

    def __and__(self, other: Type) -> And:
        return And(self, other)


@dataclass(frozen=True)
class Top(Type):
    pass


@dataclass(frozen=True)
class Bot(Type):
    pass


@dataclass(frozen=True)
class All(Type):
    """Dependent function type ``all(param: domain) codomain``."""

    param: Name
    domain: Type
    codomain: Type


@dataclass(frozen=True)
class Rec(Type):
    """Recursive type ``mu(self: body)``."""

    self_: Name
    body: Type


@dataclass(frozen=True)
class Fld(Type):
    label: str
    type: Type


@dataclass(frozen=True)
class TypDec(Type):
    label: str
    lower: Type
    upper: Type


@dataclass(frozen=True)
class Sel(Type):
    """Type projection ``receiver.label``."""

    receiver: Name
    label: str


@dataclass(frozen=True)
class And(Type):
    left: Type
    right: Type


TOP = Top()
BOT = Bot()


# ---------------------------------------------------------------- terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: Name


@dataclass(frozen=True)
class Lam(Term):
    param: Name
    param_type: Type
    body: Term


@dataclass(frozen=True)
class New(Term):
    """Object ``nu(self: self_type) defs``."""

    self_: Name
    self_type: Type
    defs: Def


@dataclass(frozen=True)
class SelTrm(Term):
    receiver: Name
    label: str


@dataclass(frozen=True)
class App(Term):
    fun: Name
    arg: Name


@dataclass(frozen=True)
class Let(Term):
    bound: Name
    rhs: Term
    body: Term


Value = Union[Lam, New]


def is_value(t: object) -> bool:
    return isinstance(t, (Lam, New))


# ---------------------------------------------------------------- definitions


class Def:
    __slots__ = ()


@dataclass(frozen=True)
class FldDef(Def):
    label: str
    rhs: Term


@dataclass(frozen=True)
class TypDef(Def):
    label: str
    alias: Type


@dataclass(frozen=True)
class AndDef(Def):
    left: Def
    right: Def


Node = Union[Type, Term, Def]


def and_defs(defs: Iterable[Def]) -> Def:
    """Join definitions right-nested, the same way ``&`` nests types."""
    items = list(defs)
    if not items:
        raise ValueError("an object needs at least one definition")
    result = items[-1]
    for d in reversed(items[:-1]):
        result = AndDef(d, result)
    return result


def and_types(types: Iterable[Type]) -> Type:
    items = list(types)
    if not items:
        return TOP
    result = items[-1]
    for t in reversed(items[:-1]):
        result = And(t, result)
    return result


def conjuncts(t: Type) -> list[Type]:
    """Flatten nested intersections left to right (iteratively)."""
    out: list[Type] = []
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, And):
            stack.append(cur.right)
            stack.append(cur.left)
        else:
            out.append(cur)
    return out


def def_items(d: Def) -> list[Def]:
    out: list[Def] = []
    stack = [d]
    while stack:
        cur = stack.pop()
        if isinstance(cur, AndDef):
            stack.append(cur.right)
            stack.append(cur.left)
        else:
            out.append(cur)
    return out


def def_labels(d: Def) -> list[str]:
    return [item.label for item in def_items(d)]  # type: ignore[attr-defined]


# ---------------------------------------------------------------- free variables


def free_vars(x: Node) -> frozenset[Name]:
    out: set[Name] = set()
    _fv(x, frozenset(), out)
    return frozenset(out)


def _fv(x: Node, bound: frozenset[Name], out: set[Name]) -> None:
    match x:
        case Top() | Bot():
            pass
        case All(p, dom, cod):
            _fv(dom, bound, out)
            _fv(cod, bound | {p}, out)
        case Rec(s, body):
            _fv(body, bound | {s}, out)
        case Fld(_, t):
            _fv(t, bound, out)
        case TypDec(_, lo, hi):
            _fv(lo, bound, out)
            _fv(hi, bound, out)
        case Sel(r, _):
            if r not in bound:
                out.add(r)
        case And(l, r):
            _fv(l, bound, out)
            _fv(r, bound, out)
        case Var(n):
            if n not in bound:
                out.add(n)
        case Lam(p, pt, body):
            _fv(pt, bound, out)
            _fv(body, bound | {p}, out)
        case New(s, st, defs):
            inner = bound | {s}
            _fv(st, inner, out)
            _fv(defs, inner, out)
        case SelTrm(r, _):
            if r not in bound:
                out.add(r)
        case App(f, a):
            for n in (f, a):
                if n not in bound:
                    out.add(n)
        case Let(b, rhs, body):
            _fv(rhs, bound, out)
            _fv(body, bound | {b}, out)
        case FldDef(_, t):
            _fv(t, bound, out)
        case TypDef(_, t):
            _fv(t, bound, out)
        case AndDef(l, r):
            _fv(l, bound, out)
            _fv(r, bound, out)
        case _:
            raise TypeError(f"not a DOT syntax node: {x!r}")


# ---------------------------------------------------------------- substitution


def subst_var(x: Name, y: Name, target: Node) -> Node:
    """Replace free occurrences of ``x`` by ``y`` in ``target``.

    A binder that is the very name ``y`` and whose scope mentions ``x`` is
    freshened first, so the result never captures ``y``.
    """
    if x == y:
        return target
    return _subst(x, y, target)


def _ren(n: Name, x: Name, y: Name) -> Name:
    return y if n == x else n


def _binder(b: Name, scope: list[Node], x: Name, y: Name) -> tuple[Name, list[Node], bool]:
    """Handle a binder ``b`` over ``scope``.  Returns (binder, scope, keep_going)."""
    if b == x:
        return b, scope, False
    if b == y and any(x in free_vars(s) for s in scope):
        b2 = b.fresh()
        scope = [_subst(b, b2, s) for s in scope]
        return b2, scope, True
    return b, scope, True


def _subst(x: Name, y: Name, t: Node) -> Node:
    match t:
        case Top() | Bot():
            return t
        case All(p, dom, cod):
            dom = _subst(x, y, dom)
            p, (cod,), go = _binder(p, [cod], x, y)
            return All(p, dom, _subst(x, y, cod) if go else cod)
        case Rec(s, body):
            s, (body,), go = _binder(s, [body], x, y)
            return Rec(s, _subst(x, y, body) if go else body)
        case Fld(a, ty):
            return Fld(a, _subst(x, y, ty))
        case TypDec(a, lo, hi):
            return TypDec(a, _subst(x, y, lo), _subst(x, y, hi))
        case Sel(r, a):
            return Sel(_ren(r, x, y), a)
        case And(l, r):
            return And(_subst(x, y, l), _subst(x, y, r))
        case Var(n):
            return Var(_ren(n, x, y))
        case Lam(p, pt, body):
            pt = _subst(x, y, pt)
            p, (body,), go = _binder(p, [body], x, y)
            return Lam(p, pt, _subst(x, y, body) if go else body)
        case New(s, st, defs):
            s, (st, defs), go = _binder(s, [st, defs], x, y)
            if go:
                st, defs = _subst(x, y, st), _subst(x, y, defs)
            return New(s, st, defs)
        case SelTrm(r, a):
            return SelTrm(_ren(r, x, y), a)
        case App(f, a):
            return App(_ren(f, x, y), _ren(a, x, y))
        case Let(b, rhs, body):
            rhs = _subst(x, y, rhs)
            b, (body,), go = _binder(b, [body], x, y)
            return Let(b, rhs, _subst(x, y, body) if go else body)
        case FldDef(a, rhs):
            return FldDef(a, _subst(x, y, rhs))
        case TypDef(a, alias):
            return TypDef(a, _subst(x, y, alias))
        case AndDef(l, r):
            return AndDef(_subst(x, y, l), _subst(x, y, r))
    raise TypeError(f"not a DOT syntax node: {t!r}")


def open_all(t: All, y: Name) -> Type:
    """Codomain of ``t`` with its parameter renamed to ``y``."""
    return subst_var(t.param, y, t.codomain)  # type: ignore[return-value]


def open_rec(t: Rec, y: Name) -> Type:
    return subst_var(t.self_, y, t.body)  # type: ignore[return-value]


# ---------------------------------------------------------------- alpha-equivalence


def alpha_eq(lhs: Node, rhs: Node) -> bool:
    """Structural equality up to consistent renaming of bound variables."""
    return _aeq(lhs, rhs, {}, {}, 0)


def _same_var(a: Name, b: Name, la: dict, lb: dict) -> bool:
    ia, ib = la.get(a), lb.get(b)
    if ia is None and ib is None:
        return a == b
    return ia == ib


def _bind(env: dict, n: Name, level: int) -> dict:
    env = dict(env)
    env[n] = level
    return env


def _aeq(a: Node, b: Node, la: dict, lb: dict, lvl: int) -> bool:
    if type(a) is not type(b):
        return False
    match a:
        case Top() | Bot():
            return True
        case All(p, dom, cod):
            return _aeq(dom, b.domain, la, lb, lvl) and _aeq(
                cod, b.codomain, _bind(la, p, lvl), _bind(lb, b.param, lvl), lvl + 1
            )
        case Rec(s, body):
            return _aeq(body, b.body, _bind(la, s, lvl), _bind(lb, b.self_, lvl), lvl + 1)
        case Fld(lab, t):
            return lab == b.label and _aeq(t, b.type, la, lb, lvl)
        case TypDec(lab, lo, hi):
            return (
                lab == b.label
                and _aeq(lo, b.lower, la, lb, lvl)
                and _aeq(hi, b.upper, la, lb, lvl)
            )
        case Sel(r, lab):
            return lab == b.label and _same_var(r, b.receiver, la, lb)
        case And(l, r):
            return _aeq(l, b.left, la, lb, lvl) and _aeq(r, b.right, la, lb, lvl)
        case Var(n):
            return _same_var(n, b.name, la, lb)
        case Lam(p, pt, body):
            return _aeq(pt, b.param_type, la, lb, lvl) and _aeq(
                body, b.body, _bind(la, p, lvl), _bind(lb, b.param, lvl), lvl + 1
            )
        case New(s, st, defs):
            la2, lb2 = _bind(la, s, lvl), _bind(lb, b.self_, lvl)
            return _aeq(st, b.self_type, la2, lb2, lvl + 1) and _aeq(
                defs, b.defs, la2, lb2, lvl + 1
            )
        case SelTrm(r, lab):
            return lab == b.label and _same_var(r, b.receiver, la, lb)
        case App(f, x):
            return _same_var(f, b.fun, la, lb) and _same_var(x, b.arg, la, lb)
        case Let(n, rhs, body):
            return _aeq(rhs, b.rhs, la, lb, lvl) and _aeq(
                body, b.body, _bind(la, n, lvl), _bind(lb, b.bound, lvl), lvl + 1
            )
        case FldDef(lab, rhs):
            return lab == b.label and _aeq(rhs, b.rhs, la, lb, lvl)
        case TypDef(lab, alias):
            return lab == b.label and _aeq(alias, b.alias, la, lb, lvl)
        case AndDef(l, r):
            return _aeq(l, b.left, la, lb, lvl) and _aeq(r, b.right, la, lb, lvl)
    raise TypeError(f"not a DOT syntax node: {a!r}")


def size(x: Node) -> int:
    """Number of AST nodes (names and labels not counted)."""
    n = 0
    stack: list[Node] = [x]
    while stack:
        cur = stack.pop()
        n += 1
        match cur:
            case All(_, d, c):
                stack += [d, c]
            case Rec(_, b) | Fld(_, b):
                stack.append(b)
            case TypDec(_, lo, hi):
                stack += [lo, hi]
            case And(l, r) | AndDef(l, r):
                stack += [l, r]
            case Lam(_, pt, body):
                stack += [pt, body]
            case New(_, st, d):
                stack += [st, d]
            case Let(_, r, b):
                stack += [r, b]
            case FldDef(_, t) | TypDef(_, t):
                stack.append(t)
    return n


# ---------------------------------------------------------------- contexts


class ContextError(ValueError):
    pass


@dataclass(frozen=True)
class Context:
    """An ordered telescope of variable bindings."""

    bindings: tuple[tuple[Name, Type], ...] = ()

    @classmethod
    def of(cls, *pairs: tuple[Name, Type]) -> Context:
        return cls(tuple(pairs))

    def __iter__(self) -> Iterator[tuple[Name, Type]]:
        return iter(self.bindings)

    def __len__(self) -> int:
        return len(self.bindings)

    def __contains__(self, x: object) -> bool:
        return any(n == x for n, _ in self.bindings)

    def __getitem__(self, x: Name) -> Type:
        for n, t in reversed(self.bindings):
            if n == x:
                return t
        raise KeyError(x)

    def get(self, x: Name) -> Type | None:
        for n, t in reversed(self.bindings):
            if n == x:
                return t
        return None

    @property
    def names(self) -> list[Name]:
        return [n for n, _ in self.bindings]

    def extend(self, x: Name, t: Type) -> Context:
        return Context(self.bindings + ((x, t),))

    def concat(self, other: Context | Iterable[tuple[Name, Type]]) -> Context:
        return Context(self.bindings + tuple(other))

    def replace(self, x: Name, t: Type) -> Context:
        """The context ``Γ[x: t]``."""
        if x not in self:
            raise ContextError(f"{x.name} is not bound")
        return Context(tuple((n, t if n == x else u) for n, u in self.bindings))

    def prefix(self, n: int) -> Context:
        return Context(self.bindings[:n])

    def index(self, x: Name) -> int:
        for i, (n, _) in enumerate(self.bindings):
            if n == x:
                return i
        raise KeyError(x)

    def telescope_errors(self) -> list[str]:
        """Violations of: distinct names, types mention only earlier names."""
        errors = []
        seen: set[Name] = set()
        for n, t in self.bindings:
            if n in seen:
                errors.append(f"{n.name} bound twice")
            stray = free_vars(t) - seen - {n}
            if stray:
                errors.append(
                    f"type of {n.name} mentions unbound {', '.join(sorted(v.name for v in stray))}"
                )
            seen.add(n)
        return errors


def ctx_alpha_eq(a: Context, b: Context) -> bool:
    if len(a) != len(b):
        return False
    return all(n1 == n2 and alpha_eq(t1, t2) for (n1, t1), (n2, t2) in zip(a, b))
