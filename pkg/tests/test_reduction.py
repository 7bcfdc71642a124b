from __future__ import annotations

import random
from pathlib import Path

import pytest

from tacoef.core import Cmp, Configuration, LinearExpr, initial_configuration, is_acyclic, validate
from tacoef.coverability import covers_from
from tacoef.errors import AtomFalse, MultipleInitialLocations, NameCollision
from tacoef.lemmas import parse_atom, parse_disjunct
from tacoef.models import EXAMPLE_FORMULA, builtin_model
from tacoef.pad import Compare, Disjunct, PadFormula, const, parse_formula, x, y
from tacoef.reduction import (
    SIZE_PARAM,
    atom_system,
    compile_atom,
    compile_disjunct,
    compile_formula,
    cover_order_leq,
    never_incremented,
    nonneg_to_general,
    witness_config,
)
from tacoef.sketch import AffineCoeff, SketchGuard, as_sketch, instantiate
from tacoef.textio import print_ta

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def fig7():
    return compile_formula(parse_formula(EXAMPLE_FORMULA))


def _guards(rule):
    return [(g.var, g.factor, g.cmp, g.rhs_const, dict(g.rhs_param_coeffs)) for g in rule.guards]


def test_divisibility_gadget(fig7):
    frag = compile_atom(parse_atom("x1 | y1", 2, 2), 1, 2)
    assert frag.locations == ("start_1", "l_1", "end_1")
    ids = [r.id for r in frag.rules]
    assert ids == ["inc_1", "skip_1", "check_1"]
    inc, skip, check = frag.rules
    assert (inc.src, inc.dst, dict(inc.update), inc.guards) == ("start_1", "l_1", {"v_1": 1}, ())
    assert (skip.src, skip.dst, dict(skip.update), skip.guards) == ("start_1", "l_1", {}, ())
    one = AffineCoeff(1)
    zero = AffineCoeff(0)
    # v = s1 * d_1 and v = t1, each as a >= / < pair
    assert _guards(check) == [
        ("v_1", one, Cmp.GE, zero, {"d_1": AffineCoeff.of(0, s1=1)}),
        ("v_1", one, Cmp.LT, one, {"d_1": AffineCoeff.of(0, s1=1)}),
        ("v_1", one, Cmp.GE, zero, {"t1": one}),
        ("v_1", one, Cmp.LT, one, {"t1": one}),
    ]
    assert fig7.sketch.rule("check_1") == check


def test_compare_gadget(fig7):
    check = fig7.sketch.rule("check_3")
    one = AffineCoeff(1)
    assert _guards(check) == [
        ("v_3", one, Cmp.GE, AffineCoeff.of(0, s1=1), {}),
        ("v_3", one, Cmp.LT, AffineCoeff.of(1, s1=1), {}),
        ("v_3", one, Cmp.GE, AffineCoeff.of(0, s2=2), {"t2": one}),
        ("v_3", one, Cmp.LT, AffineCoeff.of(1, s2=2), {"t2": one}),
    ]


def test_zero_compare_gadget():
    out = atom_system(Compare(const(0), "=", const(0)), 1, 1)
    ta = instantiate(out.sketch, {"s1": 0})
    c0 = initial_configuration(ta, {"start_1": 1}, {"t1": 0, "z": 1})
    assert covers_from(ta, c0, out.target) == ["skip_1", "check_1"]


def test_disjunct_chaining():
    d = parse_disjunct("x2 | y1 and x1 = 2*x2 + y2")
    frag = compile_disjunct(d, 2, 2)
    chains = [r for r in frag.rules if r.id.startswith("chain")]
    assert [(r.src, r.dst, r.guards, dict(r.update)) for r in chains] == [("end_2", "start_3", (), {})]
    single = compile_disjunct(parse_disjunct("x1 | y1"), 1, 2)
    assert not [r for r in single.rules if r.id.startswith("chain")]
    three = compile_disjunct(Disjunct(((1, 1), (2, 2)), (Compare(x(1), "<", y(1)),)), 1, 2)
    assert len([r for r in three.rules if r.id.startswith("chain")]) == 2
    assert len(three.locations) == 9


def test_compile_example(fig7):
    s = fig7.sketch
    assert s.locations == (
        "start", "start_1", "l_1", "end_1", "start_2", "l_2", "end_2", "start_3", "l_3", "end_3", "end",
    )
    assert s.env.params == ("t1", "t2", "d_1", "d_2", "z")
    assert s.env.resilience == ()
    assert s.env.size_fn == LinearExpr.of(0, z=1)
    assert s.indeterminates() == ("s1", "s2")
    assert s.initial == ("start",)
    assert fig7.target == "end"
    assert s.shared == ("v_1", "v_2", "v_3")
    assert is_acyclic(s)
    assert [(r.src, r.dst) for r in s.rules if r.id.startswith(("enter", "leave", "chain"))] == [
        ("start", "start_1"), ("end_1", "end"), ("start", "start_2"), ("end_2", "start_3"), ("end_3", "end"),
    ]
    assert fig7.atom_index[1].var == "v_1" and fig7.atom_index[3].divisor is None


def test_compile_smallest():
    out = compile_formula(parse_formula("forall x1 exists y1 : (x1 | y1)"))
    assert out.sketch.locations == ("start", "start_1", "l_1", "end_1", "end")


def test_compile_random_formulas_acyclic_and_valid():
    rng = random.Random(3)
    for _ in range(50):
        n, m = rng.randint(1, 3), rng.randint(1, 3)
        ds = []
        for _ in range(rng.randint(1, 3)):
            divs = tuple((rng.randint(1, n), rng.randint(1, m)) for _ in range(rng.randint(0, 2)))
            cmps = tuple(
                Compare(x(rng.randint(1, n), rng.randint(0, 2)) + const(rng.randint(0, 2)), rng.choice("<=>"), y(rng.randint(1, m)))
                for _ in range(rng.randint(0 if divs else 1, 2))
            )
            ds.append(Disjunct(divs, cmps))
        out = compile_formula(PadFormula(n, m, tuple(ds)))
        assert is_acyclic(out.sketch)
        assert out.sketch.validate() == []
        mu = {f"s{j}": rng.randint(0, 3) for j in range(1, n + 1)}
        assert validate(instantiate(out.sketch, mu)) == []
        assert len(out.gadgets) == sum(len(d.atoms()) for d in ds)


def test_nonneg_to_general(fig7):
    general, target = nonneg_to_general(fig7.sketch, fig7.target)
    assert target == "end"
    assert general.initial == ("begin",)
    assert "check" in general.shared and never_incremented(general, "check")
    added = [r for r in general.rules if r.src == "begin"]
    assert [(r.id, r.dst) for r in added] == [("enter", "start"), ("escape_s1", "end"), ("escape_s2", "end")]
    (g,) = general.rule("escape_s1").guards
    assert g == SketchGuard("check", AffineCoeff(1), Cmp.GE, AffineCoeff.of(1, s1=1))
    assert is_acyclic(general)
    ta = instantiate(general, {"s1": -1, "s2": 0})
    c0 = Configuration({loc: int(loc == "begin") for loc in ta.locations}, {v: 0 for v in ta.shared}, {"t1": 0, "t2": 0, "d_1": 0, "d_2": 0, "z": 1})
    assert covers_from(ta, c0, "end") == ["escape_s1"]


def test_nonneg_to_general_no_indeterminates():
    s = builtin_model("st87")
    with pytest.raises(MultipleInitialLocations):
        nonneg_to_general(s, "l3")
    plain = as_sketch(instantiate(builtin_model("st87-sketch"), {"a": 1}))
    general, _ = nonneg_to_general(plain, "l3")
    assert [r.id for r in general.rules if r.src == "begin"] == ["enter"]


def test_nonneg_to_general_collision(fig7):
    general, _ = nonneg_to_general(fig7.sketch, fig7.target)
    with pytest.raises(NameCollision):
        nonneg_to_general(general, "end")


def test_witness_config_divisibility():
    out = atom_system(parse_atom("x1 | y1", 1, 1), 1, 1)
    c = witness_config(out, (2,), (4,))
    assert c.kappa["start_1"] == 5 and c.p[SIZE_PARAM] == 5
    assert c.p["t1"] == 4 and c.p["d_1"] == 2
    assert all(v == 0 for v in c.g.values())
    zero = witness_config(out, (0,), (0,))
    assert zero.p["d_1"] == 0
    with pytest.raises(AtomFalse):
        witness_config(out, (2,), (3,))


def test_witness_config_compare():
    out = atom_system(parse_atom("x1 = 2*x2 + y2", 2, 2), 2, 2)
    c = witness_config(out, (4, 1), (0, 2))
    assert c.kappa["start_1"] == 5 and c.p[SIZE_PARAM] == 5


def test_witness_config_example(fig7):
    # X = (2, 3), Y = X: the first disjunct 2 | 2 holds
    c = witness_config(fig7, (2, 3), (2, 3))
    assert c.p == {"t1": 2, "t2": 3, "d_1": 1, "d_2": 1, "z": 3}
    ta = instantiate(fig7.sketch, {"s1": 2, "s2": 3})
    assert covers_from(ta, c, "end") is not None


def test_cover_order(fig7):
    gadget = fig7.atom_index[1]
    c = witness_config(fig7, (2, 3), (2, 3))
    assert cover_order_leq(gadget, c, c)
    kappa = dict(c.kappa)
    kappa["start_1"] += 1
    p = dict(c.p)
    p["z"] += 1
    bigger = Configuration(kappa, c.g, p)
    assert cover_order_leq(gadget, c, bigger)
    assert not cover_order_leq(gadget, bigger, c)
    p2 = dict(c.p)
    p2["d_1"] = 5
    assert not cover_order_leq(gadget, c, Configuration(c.kappa, c.g, p2))
    g2 = dict(c.g)
    g2["v_1"] = 1
    assert not cover_order_leq(gadget, c, Configuration(c.kappa, g2, c.p))


def test_fig7_golden(fig7):
    assert print_ta(fig7.sketch) == (GOLDEN / "fig7.ta").read_text(encoding="utf-8")
    general, _ = nonneg_to_general(fig7.sketch, fig7.target)
    assert print_ta(general) == (GOLDEN / "fig7-general.ta").read_text(encoding="utf-8")
