"""
A lattice of type members
=========================

Three type members ordered A <: B <: C.  The declaration is fine inside a
lambda, but it is not inert, so no object could ever be built with it.

"""

from dotcalc.corpus import LATTICE_TYPE, lattice_target, read_text
from dotcalc.inert import is_inert_type
from dotcalc.parse import parse_term, parse_type

print(is_inert_type(parse_type(LATTICE_TYPE)))

# the lambda needs a deeper search than the default
from dotcalc.search import SearchConfig, bounded_search
from dotcalc.syntax import Context

t = parse_term(read_text("lattice.dot"), {})
for depth in (8, 12):
    d = bounded_search(Context(), t, lattice_target({}), SearchConfig(max_depth=depth))
    print(depth, "found" if d else d)

# the subtyping used: x.A <: x.B <: x.C through the bounds of B
print(sorted(d.rules_used()))
