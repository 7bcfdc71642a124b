"""Compile forall-exists PAD formulas into acyclic sketch automata.

Every atom becomes a three-location gadget ``start_k -> l_k -> end_k``.
Processes move from ``start_k`` to ``l_k`` either incrementing the gadget
counter ``v_k`` or not; the single rule into ``end_k`` checks the atom
against the counter:

* ``x_j | y_k`` becomes ``v = s_j * d_k and v = t_k``;
* ``f op g`` becomes ``v = f(s, t) and v op g(s, t)``.

Universal variables turn into indeterminates ``s1..sn``, existential ones
into parameters ``t1..tm``; each divisibility gadget owns a parameter
``d_k`` and ``z`` counts the processes.  Gadgets of one disjunct are chained
``end -> start``, and disjunct chains hang between a shared ``start`` and
``end``.  Equalities are stored as ``>=``/``<`` guard pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import Cmp, Configuration, Environment, LinearExpr, Rule
from .errors import AtomFalse, MultipleInitialLocations, NameCollision
from .pad import Atom, Disjunct, Divides, LinearPoly, PadFormula
from .sketch import AffineCoeff, SketchAutomaton, SketchGuard, sketch_eq

SIZE_PARAM = "z"


def indet_name(j: int) -> str:
    return f"s{j}"


def exist_param(k: int) -> str:
    return f"t{k}"


@dataclass(frozen=True)
class GadgetNames:
    index: int
    atom: Atom
    start: str
    mid: str
    end: str
    var: str
    divisor: str | None
    tparams: tuple[str, ...]


@dataclass(frozen=True)
class Fragment:
    locations: tuple[str, ...]
    shared: tuple[str, ...]
    params: tuple[str, ...]
    rules: tuple[Rule, ...]
    gadgets: tuple[GadgetNames, ...]
    entry: str
    exit: str


@dataclass(frozen=True)
class ReductionOutput:
    sketch: SketchAutomaton
    target: str
    gadgets: tuple[GadgetNames, ...]
    chains: tuple[tuple[int, ...], ...]
    n: int
    m: int

    @property
    def env(self) -> Environment:
        return self.sketch.env

    @property
    def atom_index(self) -> dict[int, GadgetNames]:
        return {g.index: g for g in self.gadgets}


def _poly_slots(poly: LinearPoly) -> tuple[AffineCoeff, dict[str, AffineCoeff]]:
    """Universal terms go to the constant slot, existential terms become
    parameter coefficients on ``t``."""
    const = AffineCoeff(poly.const, {indet_name(j): k for j, k in poly.x_coeffs.items()})
    params = {exist_param(k): AffineCoeff(c) for k, c in sorted(poly.y_coeffs.items())}
    return const, params


def _compare_guards(var: str, op: str, poly: LinearPoly) -> tuple[SketchGuard, ...]:
    const, params = _poly_slots(poly)
    one = AffineCoeff(1)
    if op == "=":
        return sketch_eq(var, const, params)
    if op == ">=":
        return (SketchGuard(var, one, Cmp.GE, const, params),)
    if op == ">":
        return (SketchGuard(var, one, Cmp.GE, const + one, params),)
    if op == "<":
        return (SketchGuard(var, one, Cmp.LT, const, params),)
    if op == "<=":
        return (SketchGuard(var, one, Cmp.LT, const + one, params),)
    raise ValueError(f"unsupported comparison {op!r}")


def compile_atom(atom: Atom, index: int, m: int, taken: frozenset[str] = frozenset()) -> Fragment:
    names = GadgetNames(
        index,
        atom,
        start=f"start_{index}",
        mid=f"l_{index}",
        end=f"end_{index}",
        var=f"v_{index}",
        divisor=f"d_{index}" if isinstance(atom, Divides) else None,
        tparams=tuple(exist_param(k) for k in range(1, m + 1)),
    )
    fresh = [names.start, names.mid, names.end, names.var] + ([names.divisor] if names.divisor else [])
    clash = taken.intersection(fresh)
    if clash:
        raise NameCollision(f"generated names already in use: {sorted(clash)}")

    v = names.var
    if isinstance(atom, Divides):
        guards = sketch_eq(v, AffineCoeff(), {names.divisor: AffineCoeff(0, {indet_name(atom.j): 1})})
        guards += sketch_eq(v, AffineCoeff(), {exist_param(atom.k): AffineCoeff(1)})
        params = (names.divisor,)
    else:
        guards = _compare_guards(v, "=", atom.lhs) + _compare_guards(v, atom.op, atom.rhs)
        params = ()
    rules = (
        Rule(f"inc_{index}", names.start, names.mid, (), {v: 1}),
        Rule(f"skip_{index}", names.start, names.mid),
        Rule(f"check_{index}", names.mid, names.end, guards),
    )
    return Fragment((names.start, names.mid, names.end), (v,), params, rules, (names,), names.start, names.end)


def compile_disjunct(disjunct: Disjunct, first_index: int, m: int, taken: frozenset[str] = frozenset()) -> Fragment:
    locations, shared, params, rules, gadgets = [], [], [], [], []
    used = set(taken)
    prev_end = None
    for offset, atom in enumerate(disjunct.atoms()):
        frag = compile_atom(atom, first_index + offset, m, frozenset(used))
        used.update(frag.locations, frag.shared, frag.params)
        if prev_end is not None:
            rules.append(Rule(f"chain_{first_index + offset - 1}", prev_end, frag.entry))
        locations += frag.locations
        shared += frag.shared
        params += frag.params
        rules += frag.rules
        gadgets += frag.gadgets
        prev_end = frag.exit
    return Fragment(
        tuple(locations), tuple(shared), tuple(params), tuple(rules), tuple(gadgets), locations[0], prev_end
    )


def _environment(m: int, divisors: Sequence[str]) -> Environment:
    params = tuple(exist_param(k) for k in range(1, m + 1)) + tuple(divisors) + (SIZE_PARAM,)
    return Environment(params, (), LinearExpr.of(**{SIZE_PARAM: 1}))


def _reserved(m: int) -> frozenset[str]:
    return frozenset([SIZE_PARAM, "start", "end"] + [exist_param(k) for k in range(1, m + 1)])


def _wrap(frag: Fragment, n: int, m: int, locations, rules, initial, target, chains) -> ReductionOutput:
    env = _environment(m, [g.divisor for g in frag.gadgets if g.divisor])
    sketch = SketchAutomaton(
        env,
        tuple(locations),
        (initial,),
        frag.shared,
        tuple(rules),
        tuple(indet_name(j) for j in range(1, n + 1)),
    )
    return ReductionOutput(sketch, target, frag.gadgets, chains, n, m)


def atom_system(atom: Atom, n: int, m: int) -> ReductionOutput:
    """The standalone gadget of one atom: processes start at its ``start``."""
    frag = compile_atom(atom, 1, m, _reserved(m))
    return _wrap(frag, n, m, frag.locations, frag.rules, frag.entry, frag.exit, ((0,),))


def disjunct_system(disjunct: Disjunct, n: int, m: int) -> ReductionOutput:
    """The chained gadgets of one disjunct, entered at the first gadget."""
    frag = compile_disjunct(disjunct, 1, m, _reserved(m))
    chain = tuple(range(len(frag.gadgets)))
    return _wrap(frag, n, m, frag.locations, frag.rules, frag.entry, frag.exit, (chain,))


def compile_formula(f: PadFormula) -> ReductionOutput:
    locations, shared, params, rules, gadgets, chains = ["start"], [], [], [], [], []
    used = set(_reserved(f.m))
    next_index = 1
    for i, disjunct in enumerate(f.disjuncts, start=1):
        frag = compile_disjunct(disjunct, next_index, f.m, frozenset(used))
        used.update(frag.locations, frag.shared, frag.params)
        chains.append(tuple(range(len(gadgets), len(gadgets) + len(frag.gadgets))))
        next_index += len(frag.gadgets)
        rules.append(Rule(f"enter_{i}", "start", frag.entry))
        rules += frag.rules
        rules.append(Rule(f"leave_{i}", frag.exit, "end"))
        locations += frag.locations
        shared += frag.shared
        params += frag.params
        gadgets += frag.gadgets
    locations.append("end")
    whole = Fragment(tuple(locations), tuple(shared), tuple(params), tuple(rules), tuple(gadgets), "start", "end")
    return _wrap(whole, f.n, f.m, locations, rules, "start", "end", tuple(chains))


def nonneg_to_general(sketch: SketchAutomaton, target: str) -> tuple[SketchAutomaton, str]:
    """Add an entry ``begin`` whose escape rules reach ``target`` exactly
    when some indeterminate is negative.

    ``check`` is a fresh shared variable that no rule increments, so the
    guard ``check >= x + 1`` holds only for ``x < 0``.
    """
    if len(sketch.initial) != 1:
        raise MultipleInitialLocations("expected a single initial location")
    taken = set(sketch.locations) | set(sketch.shared) | set(sketch.env.params)
    taken |= {r.id for r in sketch.rules}
    indets = sketch.indeterminates()
    fresh = {"begin", "check", "enter"} | {f"escape_{x}" for x in indets}
    if taken & fresh:
        raise NameCollision(f"generated names already in use: {sorted(taken & fresh)}")
    rules = [Rule("enter", "begin", sketch.initial[0])]
    for x in indets:
        guard = SketchGuard("check", AffineCoeff(1), Cmp.GE, AffineCoeff(1, {x: 1}))
        rules.append(Rule(f"escape_{x}", "begin", target, (guard,)))
    general = SketchAutomaton(
        sketch.env,
        ("begin",) + sketch.locations,
        ("begin",),
        sketch.shared + ("check",),
        tuple(rules) + sketch.rules,
        sketch.indets,
    )
    return general, target


def assignment_of(X: Sequence[int]) -> dict[str, int]:
    return {indet_name(j): v for j, v in enumerate(X, start=1)}


def _atom_witness(atom: Atom, X: Sequence[int], Y: Sequence[int]) -> tuple[int, int | None]:
    """Process count and divisor value of the atom's proof witness."""
    if isinstance(atom, Divides):
        a, b = X[atom.j - 1], Y[atom.k - 1]
        return b + 1, (b // a if a else 0)
    return atom.lhs(X, Y) + 1, None


def witness_size(atom: Atom, X: Sequence[int], Y: Sequence[int]) -> int:
    return _atom_witness(atom, X, Y)[0]


def witness_config(out: ReductionOutput, X: Sequence[int], Y: Sequence[int]) -> Configuration:
    """A simple configuration from which ``out.target`` is coverable.

    Uses the first disjunct chain that holds at ``(X, Y)``: all processes sit
    at the initial location, ``z`` is the largest per-atom witness size, each
    divisor of the chain is its quotient (``0`` for ``0 | 0``) and divisors
    outside the chain are 1.
    """
    for chain in out.chains:
        gadgets = [out.gadgets[i] for i in chain]
        if not all(g.atom.holds(X, Y) for g in gadgets):
            continue
        p = {exist_param(k): Y[k - 1] for k in range(1, out.m + 1)}
        p.update({g.divisor: 1 for g in out.gadgets if g.divisor})
        size = 0
        for g in gadgets:
            z, d = _atom_witness(g.atom, X, Y)
            size = max(size, z)
            if g.divisor:
                p[g.divisor] = d
        p[SIZE_PARAM] = size
        kappa = {loc: 0 for loc in out.sketch.locations}
        kappa[out.sketch.initial[0]] = size
        return Configuration(kappa, {v: 0 for v in out.sketch.shared}, p)
    raise AtomFalse(f"no disjunct holds at X={tuple(X)}, Y={tuple(Y)}")


def cover_order_leq(gadget: GadgetNames, c: Configuration, d: Configuration) -> bool:
    """``c`` is below ``d`` for the gadget: equal counter, divisor and
    existential parameters; no more processes in the gadget and in total."""
    if c.g[gadget.var] != d.g[gadget.var]:
        return False
    same = list(gadget.tparams) + ([gadget.divisor] if gadget.divisor else [])
    if any(c.p[name] != d.p[name] for name in same):
        return False
    if any(c.kappa[loc] > d.kappa[loc] for loc in (gadget.start, gadget.mid, gadget.end)):
        return False
    return c.p[SIZE_PARAM] <= d.p[SIZE_PARAM]


def never_incremented(sketch: SketchAutomaton, var: str) -> bool:
    return all(r.update.get(var, 0) == 0 for r in sketch.rules)
