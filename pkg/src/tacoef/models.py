"""Built-in models: the reliable-broadcast automaton, its sketch, and the
compiled sketch of the example divisibility formula."""

from __future__ import annotations

from .errors import UnknownModel
from .sketch import SketchAutomaton
from .textio import parse_ta

ST87 = """\
# echo-based reliable broadcast; x counts ECHO messages of correct processes
env param n t f
env resilience n >= 3*t + 1
env resilience t >= f
env size n - f
locations l0 l1 l2 l3
initial l0 l1
shared x
rule r1 l1 -> l2 when true inc x
rule r2 l0 -> l2 when x >= t - f + 1 inc x
rule r3 l2 -> l3 when x >= n - t - f
"""

# l1 and r1 removed, the constant of r2's guard left open
ST87_SKETCH = """\
env param n t f
env resilience n >= 3*t + 1
env resilience t >= f
env size n - f
indet a
locations l0 l2 l3
initial l0
shared x
rule r2 l0 -> l2 when x >= t - f + a inc x
rule r3 l2 -> l3 when x >= n - t - f
"""

EXAMPLE_FORMULA = "forall x1 x2 exists y1 y2 : (x1 | y1) or (x2 | y1 and x1 = 2*x2 + y2)"

MODEL_NAMES = ("st87", "st87-sketch", "fig7")


def builtin_model(name: str) -> SketchAutomaton:
    if name == "st87":
        return parse_ta(ST87)
    if name == "st87-sketch":
        return parse_ta(ST87_SKETCH)
    if name == "fig7":
        from .pad import parse_formula
        from .reduction import compile_formula

        return compile_formula(parse_formula(EXAMPLE_FORMULA)).sketch
    raise UnknownModel(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")


DEFAULT_TARGETS = {"st87": "l3", "st87-sketch": "l3", "fig7": "end"}
