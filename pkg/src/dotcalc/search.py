"""Bounded, goal-directed search for general typing derivations.

General DOT typing is undecidable, so this is a heuristic prover with a
depth bound: ``not-found`` means only that nothing turned up within the
bound.  Transitivity is the expensive rule; its middle type is drawn from
a finite pool:

* types occurring in the context (precise types of each variable and
  their well-scoped subterms),
* projections ``x.A`` for every type member reachable by precise typing,
  together with their bounds,
* ``⊤``, ``⊥`` and the well-scoped subterms of the goal.

The depth bound counts every rule except the syntax-directed ones (Let,
Def-Trm, Def-Typ, AndDef-I), which are forced by the term and therefore
cannot cause divergence.  Search is sequential with a fixed rule order and
iterative deepening, so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import build as B
from .proofs import to_general
from .rules import Derivation, precise_closure
from .syntax import (
    BOT,
    TOP,
    All,
    And,
    AndDef,
    App,
    Bot,
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
    Top,
    Type,
    TypDec,
    TypDef,
    Var,
    alpha_eq,
    free_vars,
    open_all,
    open_rec,
    subst_var,
)

DEFAULT_RULE_ORDER = (
    "Refl",
    "Top",
    "Bot",
    "And1-<:",
    "And2-<:",
    "<:-And",
    "Fld-<:-Fld",
    "Typ-<:-Typ",
    "All-<:-All",
    "<:-Sel",
    "Sel-<:",
    "Trans",
)


@dataclass(frozen=True)
class SearchConfig:
    max_depth: int = 8
    max_nodes: int = 200_000
    rule_order: tuple[str, ...] = DEFAULT_RULE_ORDER

    def __post_init__(self) -> None:
        if self.max_depth < 1 or self.max_nodes < 1:
            raise ValueError("search bounds must be positive")
        unknown = set(self.rule_order) - set(DEFAULT_RULE_ORDER)
        if unknown:
            raise ValueError(f"unknown subtyping rules in rule_order: {sorted(unknown)}")


@dataclass(frozen=True)
class NotFound:
    nodes: int
    reason: str = "no derivation within bounds"

    def __bool__(self) -> bool:
        return False


class _OutOfBudget(Exception):
    pass


def _key(g: Context, *parts) -> tuple:
    # uids make free variables unambiguous; binders are compared by repr,
    # which is stricter than alpha-equivalence but safe for a failure memo
    return (tuple((n.uid, repr(t)) for n, t in g), *map(repr, parts))


def _subterms(t: Type):
    yield t
    match t:
        case All(_, dom, cod):
            yield from _subterms(dom)
            yield from _subterms(cod)
        case Rec(_, body):
            yield from _subterms(body)
        case Fld(_, ty):
            yield from _subterms(ty)
        case TypDec(_, lo, hi):
            yield from _subterms(lo)
            yield from _subterms(hi)
        case And(a, b):
            yield from _subterms(a)
            yield from _subterms(b)


def _add(pool: list[Type], t: Type) -> None:
    if not any(alpha_eq(t, p) for p in pool):
        pool.append(t)


@dataclass
class _Search:
    cfg: SearchConfig
    nodes: int = 0
    failed: set = field(default_factory=set)
    pools: dict = field(default_factory=dict)
    closures: dict = field(default_factory=dict)

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.cfg.max_nodes:
            raise _OutOfBudget

    # -- context facts

    def precise(self, g: Context, x: Name) -> list[Derivation]:
        k = (_key(g), x.uid)
        if k not in self.closures:
            self.closures[k] = [to_general(d) for _, d in precise_closure(g, x)]
        return self.closures[k]

    def members(self, g: Context, x: Name, label: str) -> list[Derivation]:
        """General typings ``x: {A: S..U}`` read off precise typing."""
        return [
            d for d in self.precise(g, x)
            if isinstance(d.conclusion.type, TypDec) and d.conclusion.type.label == label
        ]

    def pool(self, g: Context) -> list[Type]:
        k = _key(g)
        if k in self.pools:
            return self.pools[k]
        dom = set(g.names)
        pool: list[Type] = []
        for x in g.names:
            for d in self.precise(g, x):
                P = d.conclusion.type
                if isinstance(P, TypDec):
                    _add(pool, Sel(x, P.label))
                for s in _subterms(P):
                    if free_vars(s) <= dom:
                        _add(pool, s)
        _add(pool, TOP)
        _add(pool, BOT)
        self.pools[k] = pool
        return pool

    def middles(self, g: Context, S: Type, U: Type) -> list[Type]:
        dom = set(g.names)
        out = list(self.pool(g))
        for s in _subterms(U):
            if free_vars(s) <= dom:
                _add(out, s)
        return [m for m in out if not alpha_eq(m, S) and not alpha_eq(m, U)]

    # -- subtyping

    def sub(self, g: Context, S: Type, U: Type, k: int) -> Derivation | None:
        if k < 1:
            return None
        key = ("sub", _key(g, S, U), k)
        if key in self.failed:
            return None
        self.tick()
        for rule in self.cfg.rule_order:
            d = self._sub_rule(rule, g, S, U, k)
            if d is not None:
                return d
        self.failed.add(key)
        return None

    def _sub_rule(self, rule: str, g: Context, S: Type, U: Type, k: int) -> Derivation | None:
        match rule:
            case "Refl":
                return B.refl(g, S) if alpha_eq(S, U) else None
            case "Top":
                return B.top(g, S) if isinstance(U, Top) else None
            case "Bot":
                return B.bot(g, U) if isinstance(S, Bot) else None
        if k < 2:
            return None
        match rule:
            case "And1-<:" | "And2-<:" if isinstance(S, And):
                part = S.left if rule == "And1-<:" else S.right
                leg = (B.and1 if rule == "And1-<:" else B.and2)(g, S.left, S.right)
                if alpha_eq(part, U):
                    return leg
                rest = self.sub(g, part, U, k - 1)
                return B.trans(leg, rest) if rest is not None else None
            case "<:-And" if isinstance(U, And):
                d1 = self.sub(g, S, U.left, k - 1)
                d2 = d1 and self.sub(g, S, U.right, k - 1)
                return B.sub_and(d1, d2) if d2 is not None else None
            case "Fld-<:-Fld" if isinstance(S, Fld) and isinstance(U, Fld) and S.label == U.label:
                d = self.sub(g, S.type, U.type, k - 1)
                return B.fld_fld(d, S.label) if d is not None else None
            case "Typ-<:-Typ" if isinstance(S, TypDec) and isinstance(U, TypDec) and S.label == U.label:
                lo = self.sub(g, U.lower, S.lower, k - 1)
                hi = lo and self.sub(g, S.upper, U.upper, k - 1)
                return B.typ_typ(S.label, lo, hi) if hi is not None else None
            case "All-<:-All" if isinstance(S, All) and isinstance(U, All):
                dom = self.sub(g, U.domain, S.domain, k - 1)
                if dom is None:
                    return None
                y = U.param.fresh()
                g2 = g.extend(y, U.domain)
                cod = self.sub(g2, open_all(S, y), open_all(U, y), k - 1)
                return B.all_all(dom, cod) if cod is not None else None
            case "<:-Sel" if isinstance(U, Sel):
                for dm in self.members(g, U.receiver, U.label):
                    if dm.depth() >= k:
                        continue
                    leg = B.sub_sel(dm)
                    if alpha_eq(dm.conclusion.type.lower, S):
                        return leg
                    rest = self.sub(g, S, dm.conclusion.type.lower, k - 1)
                    if rest is not None:
                        return B.trans(rest, leg)
                return None
            case "Sel-<:" if isinstance(S, Sel):
                for dm in self.members(g, S.receiver, S.label):
                    if dm.depth() >= k:
                        continue
                    leg = B.sel_sub(dm)
                    if alpha_eq(dm.conclusion.type.upper, U):
                        return leg
                    rest = self.sub(g, dm.conclusion.type.upper, U, k - 1)
                    if rest is not None:
                        return B.trans(leg, rest)
                return None
            case "Trans" if k >= 3:
                for M in self.middles(g, S, U):
                    d1 = self.sub(g, S, M, k - 1)
                    if d1 is None:
                        continue
                    d2 = self.sub(g, M, U, k - 1)
                    if d2 is not None:
                        return B.trans(d1, d2)
        return None

    # -- typing

    def synth(self, g: Context, t: Term, k: int) -> list[Derivation]:
        """Derivations of ``Γ ⊢ t: T`` for the natural types T of t."""
        if k < 1:
            return []
        self.tick()
        match t:
            case Var(x):
                if x not in g:
                    return []
                return [d for d in self.precise(g, x) if d.depth() <= k]
            case Lam(p, pt, body):
                y = self._fresh_for(g, p, t)
                g2 = g.extend(y, pt)
                return [B.all_i(g, d) for d in self.synth(g2, subst_var(p, y, body), k - 1)]
            case New(s, st, defs):
                y = self._fresh_for(g, s, t)
                T = subst_var(s, y, st)
                dd = self.defs(g.extend(y, T), subst_var(s, y, defs), T, k - 1)
                return [B.new_i(g, dd)] if dd is not None else []
            case SelTrm(x, a):
                out = []
                for F in self._field_types(g, x, a):
                    d = self.check(g, Var(x), F, k - 1)
                    if d is not None:
                        out.append(B.fld_e(d))
                return out
            case App(f, z):
                out = []
                for F in self._fun_types(g, f):
                    df = self.check(g, Var(f), F, k - 1)
                    if df is None:
                        continue
                    dz = self.check(g, Var(z), F.domain, k - 1)
                    if dz is not None:
                        out.append(B.all_e(df, dz))
                return out
            case Let(x, rhs, body):
                out = []
                for d1 in self.synth(g, rhs, k):
                    y = self._fresh_for(g, x, t)
                    g2 = g.extend(y, d1.conclusion.type)
                    b = subst_var(x, y, body)
                    for d2 in self.synth(g2, b, k):
                        U = d2.conclusion.type
                        if y in free_vars(U):
                            d2 = self._escape(g2, d2, y, k)
                            if d2 is None:
                                continue
                        out.append(B.let(d1, d2))
                return out
        return []

    def _escape(self, g: Context, d: Derivation, y: Name, k: int) -> Derivation | None:
        """Widen a body type that mentions the let-bound ``y`` to one that does not."""
        U = d.conclusion.type
        for M in self.pool(g):
            if y in free_vars(M):
                continue
            s = self.sub(g, U, M, k - 1)
            if s is not None:
                return B.sub(d, s)
        return None

    def check(self, g: Context, t: Term, T: Type, k: int) -> Derivation | None:
        """A derivation of ``Γ ⊢ t: T`` within depth ``k``."""
        if k < 1:
            return None
        key = ("typ", _key(g, t, T), k)
        if key in self.failed:
            return None
        self.tick()
        d = self._check(g, t, T, k)
        if d is None:
            self.failed.add(key)
        return d

    def _check(self, g: Context, t: Term, T: Type, k: int) -> Derivation | None:
        if isinstance(t, Let):
            for d1 in self.synth(g, t.rhs, k):
                y = self._fresh_for(g, t.bound, t, T)
                g2 = g.extend(y, d1.conclusion.type)
                d2 = self.check(g2, subst_var(t.bound, y, t.body), T, k)
                if d2 is not None:
                    return B.let(d1, d2)
            return None
        if isinstance(t, Lam) and isinstance(T, All) and alpha_eq(t.param_type, T.domain):
            y = self._fresh_for(g, t.param, t, T)
            body = self.check(g.extend(y, T.domain), subst_var(t.param, y, t.body), open_all(T, y), k - 1)
            if body is not None:
                return B.all_i(g, body)
        cands = self.synth(g, t, k - 1) if not isinstance(t, Var) else self.synth(g, t, k)
        for d in cands:
            if alpha_eq(d.conclusion.type, T):
                return d
        for d in cands:
            if d.depth() >= k:
                continue
            s = self.sub(g, d.conclusion.type, T, k - 1)
            if s is not None:
                return B.sub(d, s)
        if isinstance(t, Var):
            if isinstance(T, And):
                d1 = self.check(g, t, T.left, k - 1)
                d2 = d1 and self.check(g, t, T.right, k - 1)
                if d2 is not None:
                    return B.and_i(d1, d2)
            if isinstance(T, Rec):
                d = self.check(g, t, open_rec(T, t.name), k - 1)
                if d is not None:
                    return B.rec_i(d, T.self_)
        return None

    def defs(self, g: Context, d: Def, T: Type, k: int) -> Derivation | None:
        match d, T:
            case AndDef(d1, d2), And(T1, T2):
                a = self.defs(g, d1, T1, k)
                b = a and self.defs(g, d2, T2, k)
                return B.and_def(a, b) if b is not None else None
            case FldDef(a, t), Fld(b, U) if a == b:
                dt = self.check(g, t, U, k)
                return B.def_trm(a, dt) if dt is not None else None
            case TypDef(a, S), TypDec(b, lo, hi) if a == b and alpha_eq(S, lo) and alpha_eq(S, hi):
                return B.def_typ(g, a, S)
        return None

    # -- candidates

    def _fresh_for(self, g: Context, x: Name, *avoid) -> Name:
        taken = set(g.names)
        for a in avoid:
            taken |= free_vars(a)
        return x if x not in taken else x.fresh()

    def _fun_types(self, g: Context, f: Name) -> list[All]:
        out: list[Type] = []
        if f in g:
            for d in self.precise(g, f):
                if isinstance(d.conclusion.type, All):
                    _add(out, d.conclusion.type)
        for P in self.pool(g):
            if isinstance(P, All):
                _add(out, P)
        return out

    def _field_types(self, g: Context, x: Name, a: str) -> list[Fld]:
        out: list[Type] = []
        if x in g:
            for d in self.precise(g, x):
                P = d.conclusion.type
                if isinstance(P, Fld) and P.label == a:
                    _add(out, P)
        for P in self.pool(g):
            if isinstance(P, Fld) and P.label == a:
                _add(out, P)
        return out


def bounded_search(
    g: Context, t: Term, target: Type | None = None, cfg: SearchConfig | None = None
) -> Derivation | NotFound:
    """Find ``Γ ⊢ t: target`` (or ``Γ ⊢ t: T`` for some T) within ``cfg``'s bounds."""
    cfg = cfg or SearchConfig()
    s = _Search(cfg)
    try:
        for k in range(1, cfg.max_depth + 1):
            if target is None:
                found = s.synth(g, t, k)
                if found:
                    return found[0]
            else:
                d = s.check(g, t, target, k)
                if d is not None:
                    return d
    except _OutOfBudget:
        return NotFound(s.nodes, "node budget exhausted")
    return NotFound(s.nodes)


def bounded_subtype(g: Context, S: Type, U: Type, cfg: SearchConfig | None = None) -> Derivation | NotFound:
    cfg = cfg or SearchConfig()
    s = _Search(cfg)
    try:
        for k in range(1, cfg.max_depth + 1):
            d = s.sub(g, S, U, k)
            if d is not None:
                return d
    except _OutOfBudget:
        return NotFound(s.nodes, "node budget exhausted")
    return NotFound(s.nodes)
