"""Exception hierarchy shared by all tacoef modules."""

from __future__ import annotations


class TAError(Exception):
    """Base class for every error raised by tacoef."""


class UnknownVariable(TAError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class IntegerOverflow(TAError, ArithmeticError):
    pass


class RuleNotEnabled(TAError):
    def __init__(self, rule_id: str, index: int | None = None):
        self.rule_id = rule_id
        self.index = index
        where = "" if index is None else f"@{index}"
        super().__init__(f"rule {rule_id!r} is not enabled{where}")


class UnknownRule(TAError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class InvalidAutomaton(TAError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class InvalidConfiguration(TAError, ValueError):
    pass


class UnassignedIndeterminate(TAError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class NonPositiveFactor(TAError, ValueError):
    pass


class StateCapExceeded(TAError):
    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"explored more than {cap} configurations")


class HorizonRequired(TAError, ValueError):
    pass


class FormulaSyntaxError(TAError, ValueError):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} at position {pos}")


class FragmentViolation(TAError, ValueError):
    pass


class UnsupportedLift(TAError, ValueError):
    pass


class NameCollision(TAError, ValueError):
    pass


class MultipleInitialLocations(TAError, ValueError):
    pass


class AtomFalse(TAError, ValueError):
    pass


class UnknownModel(TAError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class DocumentError(TAError, ValueError):
    """Syntax or validation problems in an automaton document.

    ``diagnostics`` is a list of ``(line_number, message)`` pairs; line 0
    marks whole-document problems such as a missing ``initial`` section.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        text = "; ".join(
            f"line {line}: {msg}" if line else msg for line, msg in self.diagnostics
        )
        super().__init__(text)
