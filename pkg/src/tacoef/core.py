"""Threshold automata over parametric environments and their step semantics.

All arithmetic is exact and range-checked against signed 64-bit integers;
values outside that range raise :class:`IntegerOverflow` instead of wrapping.
"""

from __future__ import annotations

import enum
import graphlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    IntegerOverflow,
    InvalidConfiguration,
    RuleNotEnabled,
    UnknownRule,
    UnknownVariable,
)

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1


def checked(value: int) -> int:
    if value < INT64_MIN or value > INT64_MAX:
        raise IntegerOverflow(f"{value} does not fit in a signed 64-bit integer")
    return value


class Cmp(str, enum.Enum):
    GE = ">="
    LT = "<"
    EQ = "="

    def holds(self, lhs: int, rhs: int) -> bool:
        if self is Cmp.GE:
            return lhs >= rhs
        if self is Cmp.LT:
            return lhs < rhs
        return lhs == rhs


def _clean(coeffs: Mapping[str, int]) -> dict[str, int]:
    return {k: int(v) for k, v in coeffs.items() if v != 0}


@dataclass(frozen=True)
class LinearExpr:
    """``const + sum(coeffs[p] * p)`` over parameter names."""

    const: int = 0
    coeffs: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _clean(self.coeffs))

    @classmethod
    def of(cls, const: int = 0, **coeffs: int) -> LinearExpr:
        return cls(const, coeffs)

    def evaluate(self, valuation: Mapping[str, int]) -> int:
        total = checked(self.const)
        for name, coeff in self.coeffs.items():
            try:
                value = valuation[name]
            except KeyError:
                raise UnknownVariable(f"no value for parameter {name!r}") from None
            total = checked(total + checked(coeff * value))
        return total

    def names(self) -> set[str]:
        return set(self.coeffs)

    def shift(self, delta: int) -> LinearExpr:
        return LinearExpr(self.const + delta, self.coeffs)

    def __hash__(self):
        return hash((self.const, tuple(sorted(self.coeffs.items()))))


@dataclass(frozen=True)
class LinearConstraint:
    lhs: LinearExpr
    cmp: Cmp
    rhs: LinearExpr

    def holds(self, valuation: Mapping[str, int]) -> bool:
        return self.cmp.holds(self.lhs.evaluate(valuation), self.rhs.evaluate(valuation))

    def names(self) -> set[str]:
        return self.lhs.names() | self.rhs.names()


@dataclass(frozen=True)
class Environment:
    """Parameters, resilience condition (a conjunction) and size function."""

    params: tuple[str, ...]
    resilience: tuple[LinearConstraint, ...] = ()
    size_fn: LinearExpr = field(default_factory=LinearExpr)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "resilience", tuple(self.resilience))

    def admits(self, p: Mapping[str, int]) -> bool:
        return all(c.holds(p) for c in self.resilience)

    def size(self, p: Mapping[str, int]) -> int:
        return self.size_fn.evaluate(p)


@dataclass(frozen=True)
class Guard:
    """Threshold guard ``factor * var <cmp> rhs`` with ``cmp`` in {GE, LT}."""

    var: str
    factor: int
    cmp: Cmp
    rhs: LinearExpr

    def holds(self, g: Mapping[str, int], p: Mapping[str, int]) -> bool:
        try:
            value = g[self.var]
        except KeyError:
            raise UnknownVariable(f"no value for shared variable {self.var!r}") from None
        return self.cmp.holds(checked(self.factor * value), self.rhs.evaluate(p))


def eval_guard(guard: Guard, g: Mapping[str, int], p: Mapping[str, int]) -> bool:
    return guard.holds(g, p)


def eq_guards(var: str, rhs: LinearExpr, factor: int = 1) -> tuple[Guard, Guard]:
    """``factor * var = rhs`` as the pair ``>= rhs`` and ``< rhs + 1``."""
    return (Guard(var, factor, Cmp.GE, rhs), Guard(var, factor, Cmp.LT, rhs.shift(1)))


@dataclass(frozen=True)
class Rule:
    """A transition rule; ``guards`` is a conjunction, ``update`` maps shared
    variables to their increment (0 or 1)."""

    id: str
    src: str
    dst: str
    guards: tuple = ()
    update: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "guards", tuple(self.guards))
        object.__setattr__(self, "update", _clean(self.update))

    @property
    def increments(self) -> tuple[str, ...]:
        return tuple(v for v, k in self.update.items() if k)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class _Structure:
    """Structural checks shared by threshold automata and sketches."""

    env: Environment
    locations: tuple[str, ...]
    initial: tuple[str, ...]
    shared: tuple[str, ...]
    rules: tuple[Rule, ...]

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise UnknownRule(f"no rule named {rule_id!r}")

    def is_acyclic(self) -> bool:
        graph: dict[str, set[str]] = {loc: set() for loc in self.locations}
        for r in self.rules:
            graph.setdefault(r.dst, set()).add(r.src)
        try:
            graphlib.TopologicalSorter(graph).prepare()
        except graphlib.CycleError:
            return False
        return True

    def _structural_diagnostics(self) -> list[Diagnostic]:
        out = []

        def dupes(kind, names):
            seen = set()
            for n in names:
                if n in seen:
                    out.append(Diagnostic("DuplicateName", f"{kind} {n!r} declared twice"))
                seen.add(n)

        dupes("parameter", self.env.params)
        dupes("location", self.locations)
        dupes("shared variable", self.shared)
        dupes("rule", [r.id for r in self.rules])
        locs, shared, params = set(self.locations), set(self.shared), set(self.env.params)
        if not self.initial:
            out.append(Diagnostic("EmptyInitialSet", "no initial location"))
        for loc in self.initial:
            if loc not in locs:
                out.append(Diagnostic("UnknownLocation", f"initial location {loc!r} is not declared"))
        for c in self.env.resilience:
            for name in sorted(c.names() - params):
                out.append(Diagnostic("UnknownParameter", f"resilience uses undeclared {name!r}"))
        for name in sorted(self.env.size_fn.names() - params):
            out.append(Diagnostic("UnknownParameter", f"size function uses undeclared {name!r}"))
        for r in self.rules:
            for end in (r.src, r.dst):
                if end not in locs:
                    out.append(Diagnostic("UnknownLocation", f"rule {r.id}: location {end!r} is not declared"))
            for var, inc in r.update.items():
                if var not in shared:
                    out.append(Diagnostic("UnknownVariable", f"rule {r.id}: updates undeclared {var!r}"))
                if inc not in (0, 1):
                    out.append(Diagnostic("UpdateNotBoolean", f"rule {r.id}: update of {var!r} is {inc}"))
            for guard in r.guards:
                if guard.var not in shared:
                    out.append(Diagnostic("UnknownVariable", f"rule {r.id}: guard on undeclared {guard.var!r}"))
        return out


@dataclass(frozen=True)
class ThresholdAutomaton(_Structure):
    env: Environment
    locations: tuple[str, ...]
    initial: tuple[str, ...]
    shared: tuple[str, ...]
    rules: tuple[Rule, ...]

    def __post_init__(self):
        for name in ("locations", "initial", "shared", "rules"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def validate(self) -> list[Diagnostic]:
        out = self._structural_diagnostics()
        params = set(self.env.params)
        for r in self.rules:
            for guard in r.guards:
                if guard.factor <= 0:
                    out.append(Diagnostic("NonPositiveFactor", f"rule {r.id}: factor {guard.factor} on {guard.var!r}"))
                if guard.cmp not in (Cmp.GE, Cmp.LT):
                    out.append(Diagnostic("BadComparison", f"rule {r.id}: guards use only >= and <"))
                for name in sorted(guard.rhs.names() - params):
                    out.append(Diagnostic("UnknownParameter", f"rule {r.id}: guard uses undeclared {name!r}"))
        return out


def validate(ta: ThresholdAutomaton) -> list[Diagnostic]:
    return ta.validate()


def is_acyclic(ta) -> bool:
    return ta.is_acyclic()


@dataclass(frozen=True)
class Configuration:
    """Process counters ``kappa``, shared values ``g`` and parameters ``p``."""

    kappa: Mapping[str, int]
    g: Mapping[str, int]
    p: Mapping[str, int]

    def __post_init__(self):
        for name in ("kappa", "g", "p"):
            object.__setattr__(self, name, dict(getattr(self, name)))

    def __hash__(self):
        return hash(
            (
                tuple(sorted(self.kappa.items())),
                tuple(sorted(self.g.items())),
                tuple(sorted(self.p.items())),
            )
        )

    def covers(self, location: str) -> bool:
        return self.kappa.get(location, 0) > 0


def initial_configuration(ta, kappa: Mapping[str, int], p: Mapping[str, int]) -> Configuration:
    full = {loc: 0 for loc in ta.locations}
    full.update(kappa)
    return Configuration(full, {x: 0 for x in ta.shared}, p)


def check_configuration(ta, c: Configuration) -> None:
    """Raise :class:`InvalidConfiguration` unless ``c`` is well formed for ``ta``."""
    if set(c.kappa) != set(ta.locations):
        raise InvalidConfiguration("counters must cover exactly the declared locations")
    if set(c.g) != set(ta.shared):
        raise InvalidConfiguration("shared valuation must cover exactly the declared variables")
    if set(c.p) != set(ta.env.params):
        raise InvalidConfiguration("parameter valuation must cover exactly the declared parameters")
    for part in (c.kappa, c.g, c.p):
        if any(v < 0 for v in part.values()):
            raise InvalidConfiguration("all entries must be non-negative")
    if not ta.env.admits(c.p):
        raise InvalidConfiguration(f"parameters {c.p} violate the resilience condition")
    n = ta.env.size(c.p)
    if sum(c.kappa.values()) != n:
        raise InvalidConfiguration(f"{sum(c.kappa.values())} processes but the size function gives {n}")


def is_enabled(r: Rule, c: Configuration) -> bool:
    return c.kappa.get(r.src, 0) > 0 and all(gd.holds(c.g, c.p) for gd in r.guards)


def enabled_rules(ta: ThresholdAutomaton, c: Configuration) -> list[Rule]:
    return [r for r in ta.rules if is_enabled(r, c)]


def step(ta: ThresholdAutomaton, c: Configuration, r: Rule | str) -> Configuration:
    if isinstance(r, str):
        r = ta.rule(r)
    if not is_enabled(r, c):
        raise RuleNotEnabled(r.id)
    kappa = dict(c.kappa)
    if r.src != r.dst:
        kappa[r.src] -= 1
        kappa[r.dst] = kappa.get(r.dst, 0) + 1
    g = dict(c.g)
    for var, inc in r.update.items():
        g[var] = checked(g.get(var, 0) + inc)
    return Configuration(kappa, g, c.p)


def apply_run(ta: ThresholdAutomaton, c: Configuration, run: Iterable[str]) -> Configuration:
    for i, rule_id in enumerate(run):
        r = ta.rule(rule_id)
        if not is_enabled(r, c):
            raise RuleNotEnabled(rule_id, i)
        c = step(ta, c, r)
    return c


def acyclic_step_bound(ta, size: int) -> int:
    """Longest possible run on an acyclic automaton with ``size`` processes."""
    return size * max(len(ta.locations) - 1, 0)

