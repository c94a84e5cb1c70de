"""Seeded random generators for syntax, inert contexts and derivations.

Derivations are built forwards with :mod:`dotcalc.build`, choosing a rule
that fits the types at hand, so every produced tree is valid by
construction (the fuzz tests re-validate anyway).  All randomness flows
through the :class:`random.Random` passed in.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import build as B
from .proofs import to_general
from .rules import Derivation, precise_closure
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
    alpha_eq,
    and_defs,
    and_types,
    free_vars,
    open_all,
)

TERM_LABELS = ("a", "b", "c")
TYPE_LABELS = ("A", "B", "C")
VAR_NAMES = ("x", "y", "z", "w", "u", "v")


def _name(r: random.Random) -> Name:
    return Name(r.choice(VAR_NAMES))


# ---------------------------------------------------------------- plain syntax


def random_type(r: random.Random, scope: list[Name], depth: int = 3) -> Type:
    """Any well-scoped type; projections pick a random in-scope receiver."""
    leaves = ["top", "bot"] + (["sel"] if scope else [])
    kinds = leaves if depth <= 0 else leaves + ["all", "rec", "fld", "dec", "and"]
    k = r.choice(kinds)
    if k == "top":
        return TOP
    if k == "bot":
        return BOT
    if k == "sel":
        return Sel(r.choice(scope), r.choice(TYPE_LABELS))
    if k == "fld":
        return Fld(r.choice(TERM_LABELS), random_type(r, scope, depth - 1))
    if k == "dec":
        return TypDec(r.choice(TYPE_LABELS), random_type(r, scope, depth - 1), random_type(r, scope, depth - 1))
    if k == "and":
        return And(random_type(r, scope, depth - 1), random_type(r, scope, depth - 1))
    x = _name(r)
    if k == "all":
        return All(x, random_type(r, scope, depth - 1), random_type(r, scope + [x], depth - 1))
    return Rec(x, random_type(r, scope + [x], depth - 1))


def random_defs(r: random.Random, scope: list[Name], depth: int, distinct: bool = True) -> Def:
    n = r.randint(1, 3)
    labels = r.sample(TERM_LABELS + TYPE_LABELS, n) if distinct else [r.choice(TERM_LABELS + TYPE_LABELS) for _ in range(n)]
    items: list[Def] = []
    for lab in labels:
        if lab[0].isupper():
            items.append(TypDef(lab, random_type(r, scope, depth - 1)))
        else:
            items.append(FldDef(lab, random_term(r, scope, depth - 1)))
    return and_defs(items)


def random_value(r: random.Random, scope: list[Name], depth: int = 3) -> Term:
    x = _name(r)
    if r.random() < 0.5:
        return Lam(x, random_type(r, scope, depth - 1), random_term(r, scope + [x], depth - 1))
    return New(x, random_type(r, scope + [x], depth - 1), random_defs(r, scope + [x], depth))


def random_term(r: random.Random, scope: list[Name], depth: int = 3, free: list[Name] | None = None) -> Term:
    """Any ANF term; variables come from ``scope`` plus optional ``free`` names."""
    pool = scope + (free or [])
    kinds = ["value"] + (["var", "app", "sel"] if pool else [])
    if depth > 0:
        kinds += ["let", "let", "let"]
    k = r.choice(kinds)
    if k == "var":
        return Var(r.choice(pool))
    if k == "app":
        return App(r.choice(pool), r.choice(pool))
    if k == "sel":
        return SelTrm(r.choice(pool), r.choice(TERM_LABELS))
    if k == "value" or depth <= 0:
        return random_value(r, scope, max(depth, 1))
    x = _name(r)
    return Let(x, random_term(r, scope, depth - 1, free), random_term(r, scope + [x], depth - 1, free))


# ---------------------------------------------------------------- inert contexts


def _record(r: random.Random, self_: Name, scope: list[Name], depth: int) -> Type:
    n = r.randint(1, 3)
    tlabels = r.sample(TYPE_LABELS, r.randint(0, min(n, 2)))
    flabels = r.sample(TERM_LABELS, n - len(tlabels)) if n > len(tlabels) else []
    members: list[Type] = []
    for A in tlabels:
        T = random_type(r, scope, depth - 1)
        members.append(TypDec(A, T, T))
    defined = [Sel(self_, A) for A in tlabels]
    for a in flabels:
        if defined and r.random() < 0.4:
            members.append(Fld(a, r.choice(defined)))
        else:
            members.append(Fld(a, random_type(r, scope, depth - 1)))
    r.shuffle(members)
    return Rec(self_, and_types(members))


def random_inert_type(r: random.Random, scope: list[Name], depth: int = 2) -> Type:
    x = _name(r)
    if r.random() < 0.35:
        return All(x, random_type(r, scope, depth), random_type(r, scope + [x], depth))
    return _record(r, x, scope, depth)


def random_inert_context(r: random.Random, n: int | None = None, depth: int = 2) -> Context:
    n = r.randint(1, 4) if n is None else n
    g = Context()
    for _ in range(n):
        x = _name(r)
        g = g.extend(x, random_inert_type(r, g.names, depth))
    return g


# ---------------------------------------------------------------- derivations


@dataclass
class DerivationGen:
    """Forward generator of valid general derivations."""

    r: random.Random
    type_depth: int = 2
    used: set[str] = field(default_factory=set)

    # -- helpers

    def _precise(self, g: Context, x: Name) -> list[Derivation]:
        return [d for _, d in precise_closure(g, x)]

    def _members(self, g: Context) -> list[tuple[Name, Derivation]]:
        """Precise type-member typings ``x: {A: T..U}`` available in ``g``."""
        out = []
        for x in g.names:
            for d in self._precise(g, x):
                if isinstance(d.conclusion.type, TypDec):
                    out.append((x, d))
        return out

    def _scope_type(self, g: Context, depth: int | None = None) -> Type:
        """A random type whose projections name real type members of ``g``."""
        depth = self.type_depth if depth is None else depth
        sels = [Sel(x, d.conclusion.type.label) for x, d in self._members(g)]
        t = random_type(self.r, [], depth)
        return self._graft(t, sels)

    def _graft(self, t: Type, sels: list[Sel]) -> Type:
        # swap some leaves for real projections
        match t:
            case All(p, dom, cod):
                return All(p, self._graft(dom, sels), self._graft(cod, sels))
            case Rec(s, body):
                return Rec(s, self._graft(body, sels))
            case Fld(a, ty):
                return Fld(a, self._graft(ty, sels))
            case TypDec(A, lo, hi):
                return TypDec(A, self._graft(lo, sels), self._graft(hi, sels))
            case And(a, b):
                return And(self._graft(a, sels), self._graft(b, sels))
        if sels and self.r.random() < 0.4:
            return self.r.choice(sels)
        return t

    # -- subtyping

    def sub_from(self, g: Context, S: Type, depth: int) -> Derivation:
        """Some ``Γ ⊢ S <: U``."""
        r = self.r
        opts = ["refl", "top"]
        if depth > 0:
            opts += ["trans", "and_r"]
            match S:
                case And():
                    opts += ["and1", "and2", "and1", "and2"]
                case Fld():
                    opts += ["fld", "fld"]
                case TypDec():
                    opts += ["typ", "typ"]
                case All():
                    opts += ["all", "all"]
                case Sel(x, A) if self._typdec(g, x, A, 0) is not None:
                    opts += ["sel", "sel", "sel"]
        if S == BOT:
            opts += ["bot"]
        k = r.choice(opts)
        match k:
            case "refl":
                return B.refl(g, S)
            case "top":
                return B.top(g, S)
            case "bot":
                return B.bot(g, self._scope_type(g))
            case "trans":
                d1 = self.sub_from(g, S, depth - 1)
                return B.trans(d1, self.sub_from(g, d1.conclusion.rhs, depth - 1))
            case "and_r":
                return B.sub_and(self.sub_from(g, S, depth - 1), self.sub_from(g, S, depth - 1))
            case "and1":
                return B.and1(g, S.left, S.right)
            case "and2":
                return B.and2(g, S.left, S.right)
            case "fld":
                return B.fld_fld(self.sub_from(g, S.type, depth - 1), S.label)
            case "typ":
                return B.typ_typ(S.label, self.sub_to(g, S.lower, depth - 1), self.sub_from(g, S.upper, depth - 1))
            case "all":
                ddom = self.sub_to(g, S.domain, depth - 1)
                y = S.param.fresh()
                g2 = g.extend(y, ddom.conclusion.lhs)
                return B.all_all(ddom, self.sub_from(g2, open_all(S, y), depth - 1))
            case "sel":
                return B.sel_sub(self._typdec(g, S.receiver, S.label, depth - 1))
        raise AssertionError(k)

    def sub_to(self, g: Context, U: Type, depth: int) -> Derivation:
        """Some ``Γ ⊢ S <: U``."""
        r = self.r
        opts = ["refl", "bot"]
        if depth > 0:
            opts += ["trans", "and_l"]
            match U:
                case And():
                    opts += ["and_r"]
                case Fld():
                    opts += ["fld", "fld"]
                case TypDec():
                    opts += ["typ", "typ"]
                case All():
                    opts += ["all", "all"]
                case Sel(x, A) if self._typdec(g, x, A, 0) is not None:
                    opts += ["sel", "sel", "sel"]
        if U == TOP:
            opts += ["top"]
        k = r.choice(opts)
        match k:
            case "refl":
                return B.refl(g, U)
            case "bot":
                return B.bot(g, U)
            case "top":
                return B.top(g, self._scope_type(g))
            case "trans":
                d2 = self.sub_to(g, U, depth - 1)
                return B.trans(self.sub_to(g, d2.conclusion.lhs, depth - 1), d2)
            case "and_l":
                side = self._scope_type(g, 1)
                return B.and1(g, U, side) if r.random() < 0.5 else B.and2(g, side, U)
            case "and_r":
                return B.sub_and(B.and1(g, U.left, U.right), B.and2(g, U.left, U.right))
            case "fld":
                return B.fld_fld(self.sub_to(g, U.type, depth - 1), U.label)
            case "typ":
                return B.typ_typ(U.label, self.sub_from(g, U.lower, depth - 1), self.sub_to(g, U.upper, depth - 1))
            case "all":
                ddom = self.sub_from(g, U.domain, depth - 1)
                y = U.param.fresh()
                g2 = g.extend(y, U.domain)
                dcod = self.sub_to(g2, open_all(U, y), depth - 1)
                # All-<:-All wants S2 <: S1 with S2 the supertype's domain
                return B.all_all(ddom, dcod)
            case "sel":
                return B.sub_sel(self._typdec(g, U.receiver, U.label, depth - 1))
        raise AssertionError(k)

    # -- typing

    def _typdec(self, g: Context, x: Name, A: str, depth: int) -> Derivation | None:
        """Some ``Γ ⊢ x: {A: S..U}``, possibly widened."""
        hits = [
            d for d in self._precise(g, x) if isinstance(d.conclusion.type, TypDec) and d.conclusion.type.label == A
        ]
        if not hits:
            return None
        d = to_general(self.r.choice(hits))
        if depth > 0 and self.r.random() < 0.5:
            dec: TypDec = d.conclusion.type
            leg = B.typ_typ(A, self.sub_to(g, dec.lower, depth - 1), self.sub_from(g, dec.upper, depth - 1))
            d = B.sub(d, leg)
        return d

    def typ_var(self, g: Context, x: Name, depth: int) -> Derivation:
        """Some ``Γ ⊢ x: T``."""
        r = self.r
        d = to_general(r.choice(self._precise(g, x)))
        if depth <= 0:
            return d
        k = r.choice(["plain", "sub", "sub", "and", "rec"])
        if k == "sub":
            return B.sub(d, self.sub_from(g, d.conclusion.type, depth - 1))
        if k == "and":
            return B.and_i(d, self.typ_var(g, x, depth - 1))
        if k == "rec":
            return B.rec_i(d)
        return d

    def typ_value(self, g: Context, depth: int) -> Derivation:
        """A lambda or object with its introduction derivation, maybe widened."""
        r = self.r
        if r.random() < 0.5:
            y = _name(r)
            T = self._scope_type(g)
            body = self.typ_term(g.extend(y, T), max(depth - 1, 0))
            d = B.all_i(g, body)
        else:
            d = self.typ_object(g, depth)
        if depth > 0 and r.random() < 0.4:
            d = B.sub(d, self.sub_from(g, d.conclusion.type, depth - 1))
        return d

    def typ_object(self, g: Context, depth: int) -> Derivation:
        r = self.r
        y = _name(r)
        n = r.randint(1, 3)
        labels = r.sample(TERM_LABELS + TYPE_LABELS, n)
        parts: list[tuple[str, object]] = []  # (label, T) or (label, derivation in g)
        for lab in labels:
            if lab[0].isupper():
                parts.append((lab, self._scope_type(g)))
            elif parts and any(p[0][0].islower() for p in parts) and r.random() < 0.3:
                prev = r.choice([p for p in parts if p[0][0].islower()])
                parts.append((lab, ("self", prev[0])))
            else:
                parts.append((lab, self.typ_term(g, max(depth - 1, 0))))
        member_types = []
        for lab, p in parts:
            if isinstance(p, Type):
                member_types.append(TypDec(lab, p, p))
            elif isinstance(p, tuple):
                member_types.append(Fld(lab, _field_type(member_types, p[1])))
            else:
                member_types.append(Fld(lab, p.conclusion.type))
        T = and_types(member_types)
        g2 = g.extend(y, T)
        from .proofs import weaken_to

        defs = []
        for (lab, p), mt in zip(parts, member_types):
            if isinstance(p, Type):
                defs.append(B.def_typ(g2, lab, p))
            elif isinstance(p, tuple):
                recv = [d for d in self._precise(g2, y) if _is_field(d.conclusion.type, p[1])]
                defs.append(B.def_trm(lab, B.fld_e(to_general(recv[0]))))
            else:
                defs.append(B.def_trm(lab, weaken_to(p, g2)))
        return B.new_i(g, B.and_defs(defs))

    def typ_term(self, g: Context, depth: int) -> Derivation:
        """Some ``Γ ⊢ t: T`` for a random term ``t``."""
        r = self.r
        opts = ["value"]
        if g.names:
            opts += ["var", "var"]
            if self._apps(g):
                opts += ["app", "app"]
            if self._fields(g):
                opts += ["sel", "sel"]
        if depth > 0:
            opts += ["let", "let"]
        k = r.choice(opts)
        if k == "var":
            return self.typ_var(g, r.choice(g.names), depth)
        if k == "app":
            return self._app(g, depth)
        if k == "sel":
            x, d = r.choice(self._fields(g))
            d = to_general(d)
            if depth > 0 and r.random() < 0.4:
                d = B.sub(d, B.fld_fld(self.sub_from(g, d.conclusion.type.type, depth - 1), d.conclusion.type.label))
            return B.fld_e(d)
        if k == "value" or depth <= 0:
            return self.typ_value(g, max(depth - 1, 0))
        d1 = self.typ_term(g, depth - 1)
        y = _name(r)
        g2 = g.extend(y, d1.conclusion.type)
        d2 = self.typ_term(g2, depth - 1)
        if y in free_vars(d2.conclusion.type):
            d2 = B.sub(d2, B.top(g2, d2.conclusion.type))
        return B.let(d1, d2)

    def _fields(self, g: Context) -> list[tuple[Name, Derivation]]:
        return [(x, d) for x in g.names for d in self._precise(g, x) if isinstance(d.conclusion.type, Fld)]

    def _apps(self, g: Context) -> list[tuple[Derivation, Name, Derivation]]:
        """(function typing, argument, argument typing at the domain) triples."""
        out = []
        funs = [d for x in g.names for d in self._precise(g, x) if isinstance(d.conclusion.type, All)]
        for df in funs:
            dom = df.conclusion.type.domain
            for z in g.names:
                for dz in self._precise(g, z):
                    if alpha_eq(dz.conclusion.type, dom):
                        out.append((df, z, to_general(dz)))
                    elif dom == TOP:
                        out.append((df, z, B.sub(to_general(dz), B.top(g, dz.conclusion.type))))
        return out

    def _app(self, g: Context, depth: int) -> Derivation:
        df, z, dz = self.r.choice(self._apps(g))
        df = to_general(df)
        if depth > 0 and self.r.random() < 0.5:
            # widen the function type covariantly in its codomain
            fty: All = df.conclusion.type
            y = fty.param.fresh()
            gy = g.extend(y, fty.domain)
            dcod = self.sub_from(gy, open_all(fty, y), depth - 1)
            df = B.sub(df, B.all_all(B.refl(g, fty.domain), dcod))
        return B.all_e(df, dz)


def _field_type(members: list[Type], label: str) -> Type:
    for m in members:
        if isinstance(m, Fld) and m.label == label:
            return m.type
    raise KeyError(label)


def _is_field(t: Type, label: str) -> bool:
    return isinstance(t, Fld) and t.label == label
