"""Inert types and contexts.

A type is inert when it is a dependent function type, or a recursive type
whose body is an intersection of field declarations and tight type
declarations ``{A: T..T}`` with distinct type labels.  By default field
labels must be distinct as well (``loose=True`` drops that requirement).
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

from .syntax import All, And, Context, Fld, Name, Rec, Type, TypDec, alpha_eq

NON_TIGHT = "non-tight-bounds"
DUP_TYPE = "duplicate-type-label"
DUP_FIELD = "duplicate-field-label"
DISALLOWED = "disallowed-constructor"
NON_RECORD = "non-record-body"


@dataclass(frozen=True)
class Violation:
    path: tuple[str, ...]  # e.g. ("body", "right", "left")
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class InertReport:
    verdict: bool
    first_violation: Violation | None = None

    def __post_init__(self) -> None:
        if not self.verdict and self.first_violation is None:
            raise ValueError("a negative report needs a violation")

    def __bool__(self) -> bool:
        return self.verdict


_OK = InertReport(True)


def _record_conjuncts(body: Type) -> Iterator[tuple[tuple, Type]]:
    """Flatten nested intersections left to right.

    Paths are kept as linked ``(step, parent)`` cells so the walk stays
    linear; ``_path`` spells one out when a violation is reported.
    """
    stack: list[tuple[tuple, Type]] = [(("body", None), body)]
    while stack:
        cell, t = stack.pop()
        if isinstance(t, And):
            stack.append((("right", cell), t.right))
            stack.append((("left", cell), t.left))
        else:
            yield cell, t


def _path(cell: tuple | None) -> tuple[str, ...]:
    out = []
    while cell is not None:
        out.append(cell[0])
        cell = cell[1]
    return tuple(reversed(out))


def is_inert_type(t: Type, loose: bool = False) -> InertReport:
    if isinstance(t, All):
        return _OK
    if not isinstance(t, Rec):
        return InertReport(False, Violation((), DISALLOWED, f"{type(t).__name__} is neither ∀ nor μ"))
    types: set[str] = set()
    fields: set[str] = set()
    for cell, c in _record_conjuncts(t.body):
        match c:
            case TypDec(label, lo, hi):
                if not alpha_eq(lo, hi):
                    return InertReport(False, Violation(_path(cell), NON_TIGHT, f"{label} has distinct bounds"))
                if label in types:
                    return InertReport(False, Violation(_path(cell), DUP_TYPE, f"{label} declared twice"))
                types.add(label)
            case Fld(label, _):
                if label in fields and not loose:
                    return InertReport(False, Violation(_path(cell), DUP_FIELD, f"{label} declared twice"))
                fields.add(label)
            case _:
                return InertReport(
                    False, Violation(_path(cell), NON_RECORD, f"{type(c).__name__} is not a member declaration")
                )
    return _OK


@dataclass(frozen=True)
class ContextReport:
    ok: bool
    offender: Name | None = None
    report: InertReport | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_inert_context(g: Context, loose: bool = False) -> ContextReport:
    for x, t in g:
        r = is_inert_type(t, loose)
        if not r.verdict:
            return ContextReport(False, x, r)
    return ContextReport(True)


class NotInertRecord(ValueError):
    pass


def record_members(t: Type, loose: bool = False) -> dict[str, Fld | TypDec]:
    """Label-keyed members of an inert μ-type; the self variable stays free."""
    if not isinstance(t, Rec):
        raise NotInertRecord("record_members needs a recursive type")
    rep = is_inert_type(t, loose)
    if not rep.verdict:
        raise NotInertRecord(f"type is not inert: {rep.first_violation.reason}")
    out: dict[str, Fld | TypDec] = {}
    for _, c in _record_conjuncts(t.body):
        out.setdefault(c.label, c)
    return out
