from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tacoef.core import Cmp, Environment, LinearConstraint, LinearExpr, Rule
from tacoef.errors import DocumentError, UnknownModel
from tacoef.models import EXAMPLE_FORMULA, MODEL_NAMES, ST87, builtin_model
from tacoef.pad import parse_formula
from tacoef.reduction import compile_formula
from tacoef.sketch import AffineCoeff, SketchAutomaton, SketchGuard, collect_indeterminates, instantiate
from tacoef.textio import format_report, parse_ta, print_ta, read_report

GOLDEN = Path(__file__).parent / "golden"


def test_st87_document():
    s = parse_ta(ST87)
    assert s.env.params == ("n", "t", "f")
    assert s.env.resilience == (
        LinearConstraint(LinearExpr.of(0, n=1), Cmp.GE, LinearExpr.of(1, t=3)),
        LinearConstraint(LinearExpr.of(0, t=1), Cmp.GE, LinearExpr.of(0, f=1)),
    )
    assert s.env.size_fn == LinearExpr.of(0, n=1, f=-1)
    assert s.locations == ("l0", "l1", "l2", "l3")
    assert s.initial == ("l0", "l1")
    assert s.shared == ("x",)
    ta = instantiate(s, {})
    assert [(r.id, r.src, r.dst, dict(r.update)) for r in ta.rules] == [
        ("r1", "l1", "l2", {"x": 1}),
        ("r2", "l0", "l2", {"x": 1}),
        ("r3", "l2", "l3", {}),
    ]
    assert ta.rule("r1").guards == ()
    (g2,) = ta.rule("r2").guards
    assert (g2.var, g2.factor, g2.cmp, g2.rhs) == ("x", 1, Cmp.GE, LinearExpr.of(1, t=1, f=-1))
    (g3,) = ta.rule("r3").guards
    assert g3.rhs == LinearExpr.of(0, n=1, t=-1, f=-1)
    assert ta.validate() == [] and ta.is_acyclic()


def test_builtin_models():
    assert collect_indeterminates(builtin_model("st87-sketch")) == ("a",)
    sk = builtin_model("st87-sketch")
    assert sk.locations == ("l0", "l2", "l3") and sk.initial == ("l0",)
    assert builtin_model("fig7") == compile_formula(parse_formula(EXAMPLE_FORMULA)).sketch
    with pytest.raises(UnknownModel):
        builtin_model("nope")


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_golden_and_round_trip(name):
    s = builtin_model(name)
    text = print_ta(s)
    assert text == (GOLDEN / f"{name}.ta").read_text(encoding="utf-8")
    assert parse_ta(text) == s
    assert print_ta(parse_ta(text)) == text
    assert print_ta(builtin_model(name)) == text


def test_missing_initial():
    text = "env param n\nenv size n\nlocations a b\nrule r a -> b when true\n"
    with pytest.raises(DocumentError) as info:
        parse_ta(text)
    assert any(msg.startswith("EmptyInitialSet") for _, msg in info.value.diagnostics)


def test_syntax_errors_are_positioned():
    text = "env param n\nlocations a b\ninitial a\nshared x\nrule r a -> b when x >= \nbogus line\n"
    with pytest.raises(DocumentError) as info:
        parse_ta(text)
    lines = sorted(line for line, _ in info.value.diagnostics)
    assert lines == [5, 6]


def test_unknown_names_rejected():
    base = "env param n\nlocations a b\ninitial a\nshared x\n"
    with pytest.raises(DocumentError):
        parse_ta(base + "rule r a -> b when x >= m\n")
    with pytest.raises(DocumentError):
        parse_ta(base + "rule r a -> b when y >= n\n")
    with pytest.raises(DocumentError):
        parse_ta(base + "rule r a -> b when true inc x x\n")


def test_guard_sugar():
    base = "env param n\nenv size n\nlocations a b\ninitial a\nshared x\nindet s\n"
    s = parse_ta(base + "rule r a -> b when 2*x > n and x <= s\n")
    gt, le = s.rules[0].guards
    assert gt == SketchGuard("x", AffineCoeff(2), Cmp.GE, AffineCoeff(1), {"n": AffineCoeff(1)})
    assert le == SketchGuard("x", AffineCoeff(1), Cmp.LT, AffineCoeff.of(1, s=1))
    printed = print_ta(s)
    assert "rule r a -> b when 2*x >= n + 1 and x < s + 1" in printed
    eq = parse_ta(base + "rule r a -> b when s*x = 3*n - 1\n")
    assert len(eq.rules[0].guards) == 2
    assert "when s*x = 3*n - 1" in print_ta(eq)


def test_comments_and_blank_lines():
    s = parse_ta("# header\n\n" + ST87.replace("shared x", "shared x   # counter"))
    assert s == parse_ta(ST87)


def test_reports():
    records = [("result", "covered"), ("run", "r2 r3"), ("length", 2)]
    text = format_report(records)
    assert text == "result: covered\nrun: r2 r3\nlength: 2\n"
    assert read_report(text) == [("result", "covered"), ("run", "r2 r3"), ("length", "2")]
    with pytest.raises(ValueError):
        format_report([("bad", "two\nlines")])
    with pytest.raises(ValueError):
        read_report("no separator here\n")


# -- round trip on random sketches -------------------------------------------

PARAMS = ("n", "t")
INDETS = ("a", "b")

affine = st.builds(AffineCoeff, st.integers(-3, 3), st.dictionaries(st.sampled_from(INDETS), st.integers(-2, 2), max_size=2))
guards = st.builds(
    SketchGuard,
    st.sampled_from(("x", "y")),
    st.one_of(st.integers(1, 3).map(AffineCoeff), st.just(AffineCoeff.of(0, a=1))),
    st.sampled_from((Cmp.GE, Cmp.LT)),
    affine,
    st.dictionaries(st.sampled_from(PARAMS), affine, max_size=2),
)


@st.composite
def sketches(draw):
    locs = ("p", "q", "r")
    rules = []
    for i in range(draw(st.integers(0, 4))):
        rules.append(Rule(
            f"r{i}",
            draw(st.sampled_from(locs)),
            draw(st.sampled_from(locs)),
            tuple(draw(st.lists(guards, max_size=3))),
            draw(st.dictionaries(st.sampled_from(("x", "y")), st.just(1), max_size=2)),
        ))
    resilience = tuple(draw(st.lists(st.builds(
        LinearConstraint,
        st.builds(LinearExpr, st.integers(-2, 2), st.dictionaries(st.sampled_from(PARAMS), st.integers(-2, 2))),
        st.sampled_from((Cmp.GE, Cmp.LT, Cmp.EQ)),
        st.builds(LinearExpr, st.integers(-2, 2), st.dictionaries(st.sampled_from(PARAMS), st.integers(-2, 2))),
    ), max_size=2)))
    env = Environment(PARAMS, resilience, LinearExpr.of(draw(st.integers(-1, 1)), n=1))
    return SketchAutomaton(env, locs, ("p",), ("x", "y"), tuple(rules), INDETS)


@settings(max_examples=200, deadline=None)
@given(sketches())
def test_print_parse_print(s):
    text = print_ta(s)
    again = parse_ta(text)
    assert again == s
    assert print_ta(again) == text
    for mu in ({"a": 1, "b": 0}, {"a": 2, "b": -1}):
        try:
            want = instantiate(s, mu)
        except ValueError:
            continue
        got = instantiate(again, mu)
        assert _semantics(got) == _semantics(want)


def _semantics(ta):
    """Guard truth tables on a small grid, which is what printing must keep."""
    out = []
    for r in ta.rules:
        row = []
        for xv in range(4):
            for n in range(3):
                for t in range(3):
                    g, p = {"x": xv, "y": xv}, {"n": n, "t": t}
                    row.append(all(gd.holds(g, p) for gd in r.guards))
        out.append((r.id, r.src, r.dst, dict(r.update), tuple(row)))
    return out
