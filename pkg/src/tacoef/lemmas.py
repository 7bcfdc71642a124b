"""Grid checks relating formula truth to coverability of compiled gadgets.

Truth comes from :mod:`tacoef.pad` evaluation; coverability from the
explicit-state search.  The gadget lemmas quantify over simple
configurations with any number of processes, so the searches here use finite
ranges taken from the witnesses in the correctness argument:

* one atom: ``z`` up to the atom's witness size (``Y(y_k) + 1`` for
  ``x_j | y_k``, ``f(X, Y) + 1`` for ``f op g``), divisor up to ``d_bound``;
* a chain: ``z`` equal to the largest witness size over the chain's atoms
  (idle extra processes never hurt, so coverability is monotone in ``z``),
  each divisor up to ``d_bound``.

A cover found is always a proof of truth; a miss within these ranges is only
evidence of falsity.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Sequence

from .core import Configuration, is_enabled, step
from .coverability import covers_from
from .pad import Atom, Disjunct, Divides, PadFormula, bounded_validity, eval_matrix, parse_formula
from .reduction import (
    SIZE_PARAM,
    ReductionOutput,
    assignment_of,
    atom_system,
    compile_formula,
    cover_order_leq,
    disjunct_system,
    exist_param,
    never_incremented,
    nonneg_to_general,
    witness_config,
    witness_size,
)
from .errors import NonPositiveFactor
from .sketch import instantiate

# chains use two universal and two existential variables
CORPUS_N, CORPUS_M = 2, 2

ATOM_CORPUS = (
    "x1 | y1",
    "x2 | y1",
    "x1 | y2",
    "x2 | y2",
    "x3 | y2",
    "x1 = 2*x2 + y2",
    "x1 + y1 < x2 + 1",
    "2*x1 <= y1 + y2",
    "x2 + 1 > y2",
    "y1 + y2 >= x1 + x2",
)

DISJUNCT_CORPUS = (
    "x1 | y1 and x2 | y1",
    "x2 | y1 and x1 = 2*x2 + y2",
    "x1 | y2 and y1 < x2",
    "x1 + y1 >= 2*x2 and x2 | y2",
    "y1 <= x1 and x1 + 1 > y2",
    "x1 = y1 + y2 and x2 >= y1",
)


def parse_atom(text: str, n: int = 3, m: int = CORPUS_M) -> Atom:
    head = "forall " + " ".join(f"x{i}" for i in range(1, n + 1))
    head += " exists " + " ".join(f"y{i}" for i in range(1, m + 1))
    f = parse_formula(f"{head} : ({text})")
    (atom,) = f.disjuncts[0].atoms()
    return atom


def parse_disjunct(text: str, n: int = CORPUS_N, m: int = CORPUS_M) -> Disjunct:
    head = "forall " + " ".join(f"x{i}" for i in range(1, n + 1))
    head += " exists " + " ".join(f"y{i}" for i in range(1, m + 1))
    (d,) = parse_formula(f"{head} : ({text})").disjuncts
    return d


@dataclass
class GridResult:
    label: str
    points: int = 0
    true_points: int = 0
    disagreements: list = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return not self.disagreements


def _simple(out: ReductionOutput, Y, size: int, divisors: dict[str, int]) -> Configuration:
    p = {exist_param(k): Y[k - 1] for k in range(1, out.m + 1)}
    p.update(divisors)
    p[SIZE_PARAM] = size
    kappa = {loc: 0 for loc in out.sketch.locations}
    kappa[out.sketch.initial[0]] = size
    return Configuration(kappa, {v: 0 for v in out.sketch.shared}, p)


def _covers_some(out: ReductionOutput, X, Y, sizes, d_bound: int) -> bool:
    ta = instantiate(out.sketch, assignment_of(X))
    divisors = [g.divisor for g in out.gadgets if g.divisor]
    for size in sizes:
        for ds in itertools.product(range(d_bound + 1), repeat=len(divisors)):
            c = _simple(out, Y, size, dict(zip(divisors, ds)))
            if covers_from(ta, c, out.target) is not None:
                return True
    return False


def arity(atom: Atom) -> tuple[int, int]:
    """Smallest ``(n, m)`` covering the variables the atom mentions."""
    if isinstance(atom, Divides):
        return atom.j, atom.k
    return (
        max(atom.lhs.max_x, atom.rhs.max_x, 1),
        max(atom.lhs.max_y, atom.rhs.max_y, 1),
    )


def check_atom(atom: Atom, n: int | None = None, m: int | None = None, bound: int = 3, d_bound: int = 9) -> GridResult:
    """Grid ``[0, bound]^(n+m)``; ``n`` and ``m`` default to the atom's arity."""
    an, am = arity(atom)
    n = an if n is None else n
    m = am if m is None else m
    out = atom_system(atom, n, m)
    result = GridResult(str(atom))
    for X in itertools.product(range(bound + 1), repeat=n):
        for Y in itertools.product(range(bound + 1), repeat=m):
            truth = atom.holds(X, Y)
            top = witness_size(atom, X, Y)
            covered = _covers_some(out, X, Y, range(1, top + 1), d_bound)
            result.points += 1
            result.true_points += truth
            if truth != covered:
                result.disagreements.append((X, Y, truth, covered))
    return result


def check_disjunct(disjunct: Disjunct, n: int = CORPUS_N, m: int = CORPUS_M, bound: int = 2, d_bound: int | None = None) -> GridResult:
    """``d_bound`` defaults to ``bound``: ``s_j * d = t_k <= bound`` forces
    ``d <= bound`` when ``s_j > 0`` and makes ``d`` irrelevant when ``s_j = 0``."""
    d_bound = bound if d_bound is None else d_bound
    out = disjunct_system(disjunct, n, m)
    label = " and ".join(str(a) for a in disjunct.atoms())
    result = GridResult(label)
    for X in itertools.product(range(bound + 1), repeat=n):
        for Y in itertools.product(range(bound + 1), repeat=m):
            truth = disjunct.holds(X, Y)
            top = max(witness_size(a, X, Y) for a in disjunct.atoms())
            covered = _covers_some(out, X, Y, (top,), d_bound)
            result.points += 1
            result.true_points += truth
            if truth != covered:
                result.disagreements.append((X, Y, truth, covered))
    return result


def example_witness(out: ReductionOutput, mu: Sequence[int]) -> Configuration:
    """The simple start configuration with ``t = mu``, ``z = mu_1 + 1`` and
    every divisor 1, which satisfies the first disjunct ``x1 | y1`` of the
    example formula."""
    size = mu[0] + 1
    divisors = {g.divisor: 1 for g in out.gadgets if g.divisor}
    return _simple(out, list(mu) + [0] * (out.m - len(mu)), size, divisors)


def check_third_phase(f: PadFormula, bound: int = 3) -> GridResult:
    """For every ``X`` in the grid: the generic witness configuration covers
    ``end`` exactly when some ``Y`` in the grid satisfies the matrix."""
    out = compile_formula(f)
    result = GridResult(str(f))
    ys = list(itertools.product(range(bound + 1), repeat=f.m))
    for X in itertools.product(range(bound + 1), repeat=f.n):
        Y = next((Y for Y in ys if eval_matrix(f, X, Y)), None)
        result.points += 1
        if Y is None:
            continue
        result.true_points += 1
        ta = instantiate(out.sketch, assignment_of(X))
        if covers_from(ta, witness_config(out, X, Y), out.target) is None:
            result.disagreements.append((X, Y, True, False))
    return result


def _random_config(out: ReductionOutput, ta, rng: random.Random, max_size: int) -> Configuration:
    locs = out.sketch.locations
    size = rng.randint(1, max_size)
    p = {exist_param(k): rng.randint(0, 3) for k in range(1, out.m + 1)}
    p.update({g.divisor: rng.randint(0, 3) for g in out.gadgets if g.divisor})
    p[SIZE_PARAM] = size
    if rng.random() < 0.5:
        # a short random walk from a simple configuration
        kappa = {loc: 0 for loc in locs}
        kappa[out.sketch.initial[0]] = size
        c = Configuration(kappa, {v: 0 for v in out.sketch.shared}, p)
        for _ in range(rng.randint(0, 3 * size)):
            options = [r for r in ta.rules if is_enabled(r, c)]
            if not options:
                break
            c = step(ta, c, rng.choice(options))
        return c
    kappa = {loc: 0 for loc in locs}
    for _ in range(size):
        kappa[rng.choice(locs)] += 1
    g = {v: rng.randint(0, size) for v in out.sketch.shared}
    return Configuration(kappa, g, p)


def _dominating(out: ReductionOutput, gadget, c: Configuration, rng: random.Random) -> Configuration:
    own = (gadget.start, gadget.mid, gadget.end)
    kappa = {}
    for loc in out.sketch.locations:
        kappa[loc] = c.kappa[loc] + rng.randint(0, 2) if loc in own else rng.randint(0, 2)
    deficit = c.p[SIZE_PARAM] - sum(kappa.values())
    if deficit > 0:
        kappa[gadget.start] += deficit
    g = {v: (c.g[v] if v == gadget.var else rng.randint(0, 4)) for v in out.sketch.shared}
    p = dict(c.p)
    for other in out.gadgets:
        if other.divisor and other.divisor != gadget.divisor:
            p[other.divisor] = rng.randint(0, 3)
    p[SIZE_PARAM] = sum(kappa.values())
    return Configuration(kappa, g, p)


def check_monotonicity(trials: int = 1000, seed: int = 0) -> tuple[int, list]:
    """Random steps ``C -r-> C'`` inside one gadget of a chain, each paired
    with a random ``D`` above ``C``: ``r`` must fire at ``D`` and stay above."""
    rng = random.Random(seed)
    systems = [disjunct_system(parse_disjunct(t), CORPUS_N, CORPUS_M) for t in DISJUNCT_CORPUS]
    failures = []
    done = 0
    while done < trials:
        out = rng.choice(systems)
        X = [rng.randint(0, 3) for _ in range(out.n)]
        ta = instantiate(out.sketch, assignment_of(X))
        c = _random_config(out, ta, rng, 6)
        gadget = rng.choice(out.gadgets)
        own = [r for r in ta.rules if r.id.endswith(f"_{gadget.index}") and not r.id.startswith("chain")]
        options = [r for r in own if is_enabled(r, c)]
        if not options:
            continue
        r = rng.choice(options)
        c2 = step(ta, c, r)
        d = _dominating(out, gadget, c, rng)
        assert cover_order_leq(gadget, c, d)
        done += 1
        if not is_enabled(r, d):
            failures.append((c, r.id, d, "not enabled"))
            continue
        d2 = step(ta, d, r)
        if not cover_order_leq(gadget, c2, d2):
            failures.append((c, r.id, d, "order lost"))
    return done, failures


def example_formula() -> PadFormula:
    from .models import EXAMPLE_FORMULA

    return parse_formula(EXAMPLE_FORMULA)


def example_third_phase(bound: int = 3) -> GridResult:
    """Every ``mu`` in ``[0, bound]^2`` covers ``end`` of the example sketch
    from :func:`example_witness`."""
    f = example_formula()
    out = compile_formula(f)
    result = GridResult("example witness")
    for mu in itertools.product(range(bound + 1), repeat=f.n):
        ta = instantiate(out.sketch, assignment_of(mu))
        result.points += 1
        result.true_points += 1
        if covers_from(ta, example_witness(out, mu), out.target) is None:
            result.disagreements.append((mu, None, True, False))
    return result


def example_valid(bound: int = 3) -> bool:
    return bounded_validity(example_formula(), bound, bound)


def check_escape(out: ReductionOutput, bound: int = 3) -> GridResult:
    """After :func:`nonneg_to_general`, every assignment in ``[-bound, bound]``
    with a negative entry covers ``target`` in one step from ``begin``.

    The grid counts assignments; a disagreement is one whose shortest cover
    is missing or longer than one step.  Assignments that make a factor
    non-positive are skipped.
    """
    general, target = nonneg_to_general(out.sketch, out.target)
    names = general.indeterminates()
    result = GridResult(f"escape to {target}")
    if not never_incremented(general, "check"):
        result.disagreements.append(("check", None, False, True))
        return result
    for values in itertools.product(range(-bound, bound + 1), repeat=len(names)):
        if min(values, default=0) >= 0:
            continue
        mu = dict(zip(names, values))
        try:
            ta = instantiate(general, mu)
        except NonPositiveFactor:
            continue
        result.points += 1
        result.true_points += 1
        p = {name: 0 for name in ta.env.params}
        p[SIZE_PARAM] = 1
        c = Configuration({loc: int(loc == "begin") for loc in ta.locations}, {v: 0 for v in ta.shared}, p)
        run = covers_from(ta, c, target)
        if run is None or len(run) != 1:
            result.disagreements.append((values, run, True, run is not None))
    return result
