"""
Running the corpus
==================

Every shipped program evaluates to an answer, and each intermediate term
is re-typed at the program's original type.

"""

from dotcalc.cli import soundness_report
from dotcalc.corpus import data_dir

lines, ok = soundness_report(data_dir(), fuel=1000, depth=8)
print("\n".join(lines))
print("all sound" if ok else "FAILURES")

# one trace in full
from dotcalc.corpus import programs
from dotcalc.evaluator import run

prog = {p.name: p for p in programs()}["compose"]
print(prog.source)
print(run(prog.term).to_text())
