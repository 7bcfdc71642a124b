from __future__ import annotations

import pytest

from tacoef.core import Cmp, Environment, LinearExpr, Rule
from tacoef.errors import InvalidAutomaton, NonPositiveFactor, UnassignedIndeterminate
from tacoef.models import builtin_model
from tacoef.sketch import (
    AffineCoeff,
    SketchAutomaton,
    SketchGuard,
    as_sketch,
    collect_indeterminates,
    eval_affine,
    instantiate,
)


def _rhs(ta, rule_id):
    (g,) = ta.rule(rule_id).guards
    return g.rhs


def test_collect_indeterminates():
    assert collect_indeterminates(builtin_model("st87-sketch")) == ("a",)
    assert collect_indeterminates(builtin_model("fig7")) == ("s1", "s2")
    assert collect_indeterminates(builtin_model("st87")) == ()


def test_eval_affine():
    assert eval_affine(AffineCoeff.of(0, a=1), {"a": 1}) == 1
    assert eval_affine(AffineCoeff(5), {}) == 5
    assert eval_affine(AffineCoeff.of(0, s2=2), {"s2": 3}) == 6
    with pytest.raises(UnassignedIndeterminate):
        eval_affine(AffineCoeff.of(0, a=1), {})


def test_instantiate_st87_sketch():
    s = builtin_model("st87-sketch")
    ta1 = instantiate(s, {"a": 1})
    assert _rhs(ta1, "r2") == LinearExpr.of(1, t=1, f=-1)
    assert ta1.rule("r3") == instantiate(builtin_model("st87"), {}).rule("r3")
    assert ta1.rule("r2") == instantiate(builtin_model("st87"), {}).rule("r2")
    ta0 = instantiate(s, {"a": 0})
    assert _rhs(ta0, "r2") == LinearExpr.of(0, t=1, f=-1)


def test_instantiate_preserves_structure():
    s = builtin_model("fig7")
    ta = instantiate(s, {"s1": 2, "s2": 3})
    assert ta.locations == s.locations
    assert ta.initial == s.initial
    assert ta.shared == s.shared
    assert [(r.id, r.src, r.dst, dict(r.update)) for r in ta.rules] == [
        (r.id, r.src, r.dst, dict(r.update)) for r in s.rules
    ]


def _factor_sketch():
    guard = SketchGuard("x", AffineCoeff.of(0, b=1), Cmp.GE, AffineCoeff(1))
    env = Environment(("n",), (), LinearExpr.of(0, n=1))
    return SketchAutomaton(env, ("a", "c"), ("a",), ("x",), (Rule("r", "a", "c", (guard,)),))


def test_instantiate_nonpositive_factor():
    s = _factor_sketch()
    with pytest.raises(NonPositiveFactor):
        instantiate(s, {"b": 0})
    with pytest.raises(NonPositiveFactor):
        instantiate(s, {"b": -2})
    assert instantiate(s, {"b": 2}).rules[0].guards[0].factor == 2


def test_instantiate_unassigned():
    with pytest.raises(UnassignedIndeterminate):
        instantiate(builtin_model("st87-sketch"), {})


def test_instantiate_identity_without_indeterminates():
    s = builtin_model("st87")
    ta = instantiate(s, {})
    assert as_sketch(ta) == s


def test_sketch_name_collision():
    guard = SketchGuard("x", AffineCoeff(1), Cmp.GE, AffineCoeff.of(0, n=1))
    env = Environment(("n",), (), LinearExpr.of(0, n=1))
    s = SketchAutomaton(env, ("a", "c"), ("a",), ("x",), (Rule("r", "a", "c", (guard,)),))
    assert [d.code for d in s.validate()] == ["NameCollision"]


def test_instantiate_rejects_invalid():
    env = Environment(("n",), (), LinearExpr.of(0, n=1))
    s = SketchAutomaton(env, ("a",), ("a",), (), (Rule("r", "a", "zz"),))
    with pytest.raises(InvalidAutomaton):
        instantiate(s, {})
