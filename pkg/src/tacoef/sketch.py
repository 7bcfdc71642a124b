"""Sketch automata: guards whose coefficient slots depend on indeterminates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .core import (
    Cmp,
    Diagnostic,
    Environment,
    Guard,
    LinearExpr,
    Rule,
    ThresholdAutomaton,
    _clean,
    _Structure,
    checked,
)
from .errors import InvalidAutomaton, NonPositiveFactor, UnassignedIndeterminate

Assignment = Mapping[str, int]


@dataclass(frozen=True)
class AffineCoeff:
    """``const + sum(coeffs[s] * s)`` over indeterminates ``s``."""

    const: int = 0
    coeffs: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _clean(self.coeffs))

    @classmethod
    def of(cls, const: int = 0, **coeffs: int) -> AffineCoeff:
        return cls(const, coeffs)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def __add__(self, other: AffineCoeff) -> AffineCoeff:
        merged = dict(self.coeffs)
        for k, v in other.coeffs.items():
            merged[k] = merged.get(k, 0) + v
        return AffineCoeff(self.const + other.const, merged)

    def __hash__(self):
        return hash((self.const, tuple(sorted(self.coeffs.items()))))


def eval_affine(c: AffineCoeff, mu: Assignment) -> int:
    total = checked(c.const)
    for name, k in c.coeffs.items():
        if name not in mu:
            raise UnassignedIndeterminate(f"indeterminate {name!r} has no value")
        total = checked(total + checked(k * mu[name]))
    return total


@dataclass(frozen=True)
class SketchGuard:
    """``factor * var <cmp> rhs_const + sum(rhs_param_coeffs[p] * p)``."""

    var: str
    factor: AffineCoeff
    cmp: Cmp
    rhs_const: AffineCoeff = field(default_factory=AffineCoeff)
    rhs_param_coeffs: Mapping[str, AffineCoeff] = field(default_factory=dict)

    def __post_init__(self):
        coeffs = {p: c for p, c in self.rhs_param_coeffs.items() if c != AffineCoeff()}
        object.__setattr__(self, "rhs_param_coeffs", coeffs)

    def slots(self):
        yield self.factor
        yield self.rhs_const
        yield from self.rhs_param_coeffs.values()

    def shift(self, delta: int) -> SketchGuard:
        return SketchGuard(
            self.var,
            self.factor,
            self.cmp,
            self.rhs_const + AffineCoeff(delta),
            self.rhs_param_coeffs,
        )

    @classmethod
    def from_guard(cls, guard: Guard) -> SketchGuard:
        return cls(
            guard.var,
            AffineCoeff(guard.factor),
            guard.cmp,
            AffineCoeff(guard.rhs.const),
            {p: AffineCoeff(k) for p, k in guard.rhs.coeffs.items()},
        )


def sketch_eq(
    var: str,
    rhs_const: AffineCoeff,
    rhs_param_coeffs: Mapping[str, AffineCoeff] | None = None,
    factor: AffineCoeff = AffineCoeff(1),
) -> tuple[SketchGuard, SketchGuard]:
    lower = SketchGuard(var, factor, Cmp.GE, rhs_const, rhs_param_coeffs or {})
    return lower, SketchGuard(var, factor, Cmp.LT, lower.rhs_const + AffineCoeff(1), lower.rhs_param_coeffs)


@dataclass(frozen=True)
class SketchAutomaton(_Structure):
    """Same shape as :class:`ThresholdAutomaton` with :class:`SketchGuard` rules.

    ``indets`` lists declared indeterminates; names that occur in guards but
    are not declared are still picked up by :func:`collect_indeterminates`.
    """

    env: Environment
    locations: tuple[str, ...]
    initial: tuple[str, ...]
    shared: tuple[str, ...]
    rules: tuple[Rule, ...]
    indets: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("locations", "initial", "shared", "rules", "indets"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    def indeterminates(self) -> tuple[str, ...]:
        seen = dict.fromkeys(self.indets)
        for r in self.rules:
            for guard in r.guards:
                for slot in guard.slots():
                    seen.update(dict.fromkeys(slot.coeffs))
        return tuple(seen)

    def validate(self) -> list[Diagnostic]:
        out = self._structural_diagnostics()
        params = set(self.env.params)
        ind = set(self.indeterminates())
        clash = ind & (params | set(self.shared) | set(self.locations))
        for name in sorted(clash):
            out.append(Diagnostic("NameCollision", f"indeterminate {name!r} reuses another name"))
        for r in self.rules:
            for guard in r.guards:
                if guard.factor.is_constant and guard.factor.const <= 0:
                    out.append(Diagnostic("NonPositiveFactor", f"rule {r.id}: factor {guard.factor.const}"))
                if guard.cmp not in (Cmp.GE, Cmp.LT):
                    out.append(Diagnostic("BadComparison", f"rule {r.id}: guards use only >= and <"))
                for name in sorted(set(guard.rhs_param_coeffs) - params):
                    out.append(Diagnostic("UnknownParameter", f"rule {r.id}: guard uses undeclared {name!r}"))
        return out


def collect_indeterminates(s: SketchAutomaton) -> tuple[str, ...]:
    """Indeterminates occurring in guards, in first-occurrence order."""
    seen: dict[str, None] = {}
    for r in s.rules:
        for guard in r.guards:
            for slot in guard.slots():
                seen.update(dict.fromkeys(slot.coeffs))
    return tuple(seen)


def instantiate_guard(guard: SketchGuard, mu: Assignment) -> Guard:
    factor = eval_affine(guard.factor, mu)
    if factor <= 0:
        raise NonPositiveFactor(f"factor of {guard.var!r} instantiates to {factor}")
    rhs = LinearExpr(
        eval_affine(guard.rhs_const, mu),
        {p: eval_affine(c, mu) for p, c in guard.rhs_param_coeffs.items()},
    )
    return Guard(guard.var, factor, guard.cmp, rhs)


def instantiate(s: SketchAutomaton, mu: Assignment) -> ThresholdAutomaton:
    """The threshold automaton ``s[mu]``; extra names in ``mu`` are ignored."""
    rules = tuple(
        Rule(r.id, r.src, r.dst, tuple(instantiate_guard(g, mu) for g in r.guards), r.update)
        for r in s.rules
    )
    ta = ThresholdAutomaton(s.env, s.locations, s.initial, s.shared, rules)
    problems = ta.validate()
    if problems:
        raise InvalidAutomaton(problems)
    return ta


def as_sketch(ta: ThresholdAutomaton) -> SketchAutomaton:
    """Embed a threshold automaton as a sketch without indeterminates."""
    rules = tuple(
        Rule(r.id, r.src, r.dst, tuple(SketchGuard.from_guard(g) for g in r.guards), r.update)
        for r in ta.rules
    )
    return SketchAutomaton(ta.env, ta.locations, ta.initial, ta.shared, rules)
