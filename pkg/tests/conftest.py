import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from dotcalc.gen import random_term, random_type
from dotcalc.parse import parse_type
from dotcalc.rules import Derivation, Judgment, rule_registry
from dotcalc.syntax import Name, Var

settings.register_profile("default", deadline=None, max_examples=150, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
types = seeds.map(lambda s: random_type(random.Random(s), [], 3))
terms = seeds.map(lambda s: random_term(random.Random(s), [], 3))


@pytest.fixture
def env():
    return {}


def mutants(d: Derivation):
    """Single-node mutations: rename the rule, drop a premise, edit the conclusion."""
    q = Name("q")
    odd = parse_type("q.Q", {"q": q})
    for path, node in d.walk():
        j = node.conclusion
        sib = [s for s in rule_registry() if s.system == j.kind and s.name != node.rule and s.arity == len(node.premises)]
        if sib:
            yield node.rule, "rule", d.replace_at(path, Derivation(sib[0].name, j, node.premises))
        if node.premises:
            yield node.rule, "drop", d.replace_at(path, Derivation(node.rule, j, node.premises[:-1]))
        if j.is_subtyping:
            edits = [Judgment(j.kind, j.ctx, lhs=j.lhs, rhs=odd), Judgment(j.kind, j.ctx, lhs=odd, rhs=j.rhs)]
        elif j.kind == "defs":
            edits = [Judgment(j.kind, j.ctx, subject=j.subject, type=odd)]
        else:
            edits = [Judgment(j.kind, j.ctx, subject=j.subject, type=odd), Judgment(j.kind, j.ctx, subject=Var(q), type=j.type)]
        for e in edits:
            yield node.rule, "edit", d.replace_at(path, Derivation(node.rule, e, node.premises))


# one line per acceptance criterion, echoed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
