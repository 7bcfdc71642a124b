from __future__ import annotations

from tacoef import lemmas
from tacoef.pad import Compare, Divides, x, y
from tacoef.reduction import compile_formula


def test_corpus_shape():
    atoms = [lemmas.parse_atom(a) for a in lemmas.ATOM_CORPUS]
    divs = [a for a in atoms if isinstance(a, Divides)]
    cmps = [a for a in atoms if isinstance(a, Compare)]
    assert len(divs) >= 5 and len(set(divs)) == len(divs)
    assert {c.op for c in cmps} == {"<", "<=", "=", ">", ">="}
    assert len(lemmas.DISJUNCT_CORPUS) >= 5
    assert all(len(lemmas.parse_disjunct(d).atoms()) == 2 for d in lemmas.DISJUNCT_CORPUS)


def test_arity():
    assert lemmas.arity(Divides(3, 2)) == (3, 2)
    assert lemmas.arity(Compare(x(1), "<", y(2))) == (1, 2)


def test_example_witness():
    out = compile_formula(lemmas.example_formula())
    c = lemmas.example_witness(out, (2, 3))
    assert c.p == {"t1": 2, "t2": 3, "d_1": 1, "d_2": 1, "z": 3}
    assert c.kappa["start"] == 3 and sum(c.kappa.values()) == 3


def test_single_atom_small_grid():
    r = lemmas.check_atom(lemmas.parse_atom("x1 | y1"), bound=2, d_bound=4)
    assert r.points == 9 and r.agree
    r = lemmas.check_atom(lemmas.parse_atom("x1 + y1 < x2 + 1"), bound=2)
    assert r.points == 27 and r.agree


def test_disjunct_small_grid():
    r = lemmas.check_disjunct(lemmas.parse_disjunct("x1 | y1 and x2 | y1"), bound=1)
    assert r.points == 16 and r.agree


def test_monotonicity_sample():
    done, failures = lemmas.check_monotonicity(200, seed=1)
    assert done == 200 and failures == []


def test_escape_gadget():
    r = lemmas.check_escape(compile_formula(lemmas.example_formula()), bound=2)
    # 25 assignments in [-2, 2]^2, 9 of them without a negative entry
    assert r.points == 16 and r.agree


def test_third_phase_small():
    assert lemmas.example_third_phase(2).agree
    assert lemmas.check_third_phase(lemmas.example_formula(), 2).agree
