"""Explicit-state coverability for threshold automata.

For a fixed parameter valuation the search is a breadth-first exploration of
``(kappa, g)`` pairs.  On acyclic automata every run has at most
``N(p) * (|L| - 1)`` steps, so a search up to that horizon is complete for the
valuation.  Quantification over valuations is necessarily bounded: the
verdicts report the bounds they were computed under.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .core import (
    Configuration,
    ThresholdAutomaton,
    acyclic_step_bound,
    apply_run,
    check_configuration,
    checked,
    initial_configuration,
)
from .errors import HorizonRequired, StateCapExceeded, TAError

log = logging.getLogger(__name__)

DEFAULT_MAX_CONFIGS = 200_000


@dataclass(frozen=True)
class SearchBounds:
    """Limits for a bounded coverability query.

    ``fixed`` pins individual parameters to one value instead of sweeping
    ``[0, param_bound]``.
    """

    param_bound: int
    horizon: int | None = None
    max_configs: int = DEFAULT_MAX_CONFIGS
    fixed: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.param_bound < 0:
            raise ValueError("param_bound must be >= 0")
        if self.max_configs < 1:
            raise ValueError("max_configs must be >= 1")
        if self.horizon is not None and self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        object.__setattr__(self, "fixed", dict(self.fixed))


@dataclass(frozen=True)
class Covered:
    p: Mapping[str, int]
    kappa0: Mapping[str, int]
    run: tuple[str, ...]

    covered = True


@dataclass(frozen=True)
class NotCoveredWithinBounds:
    bounds: SearchBounds
    exact: bool
    valuations_checked: int = 0
    start_points: int = 0
    diagnostics: tuple[str, ...] = ()

    covered = False


CoverVerdict = Covered | NotCoveredWithinBounds


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to split ``total`` into ``parts`` ordered summands, colex order."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for last in range(total + 1):
        for rest in compositions(total - last, parts - 1):
            yield rest + (last,)


def _valuations(ta, bounds: SearchBounds) -> Iterator[dict[str, int]]:
    params = ta.env.params
    ranges = [
        (bounds.fixed[name],) if name in bounds.fixed else range(bounds.param_bound + 1)
        for name in params
    ]
    for values in itertools.product(*ranges):
        yield dict(zip(params, values))


def enumerate_start_points(ta, bounds: SearchBounds, diagnostics: list | None = None):
    """Yield ``(p, kappa0)`` for every admissible valuation and initial split.

    Valuations are lexicographic in declared parameter order; a valuation with
    a negative size is skipped and reported through ``diagnostics``.
    """
    for p in _valuations(ta, bounds):
        if not ta.env.admits(p):
            continue
        size = ta.env.size(p)
        if size < 0:
            msg = f"SizeNegative: N({_fmt(p)}) = {size}, valuation skipped"
            log.info(msg)
            if diagnostics is not None:
                diagnostics.append(msg)
            continue
        for split in compositions(size, len(ta.initial)):
            yield p, dict(zip(ta.initial, split))


def _fmt(p: Mapping[str, int]) -> str:
    return ",".join(f"{k}={v}" for k, v in p.items())


class _Compiled:
    """Index-based view of an automaton for one fixed parameter valuation."""

    def __init__(self, ta: ThresholdAutomaton, p: Mapping[str, int]):
        self.locations = ta.locations
        self.shared = ta.shared
        self.loc = {name: i for i, name in enumerate(ta.locations)}
        self.var = {name: i for i, name in enumerate(ta.shared)}
        self.rules = []
        for r in ta.rules:
            guards = tuple(
                (self.var[g.var], g.factor, g.cmp.value == ">=", g.rhs.evaluate(p))
                for g in r.guards
            )
            incs = tuple(self.var[v] for v in r.increments)
            self.rules.append((r.id, self.loc[r.src], self.loc[r.dst], incs, guards))

    def state(self, c: Configuration):
        return (
            tuple(c.kappa[name] for name in self.locations),
            tuple(c.g[name] for name in self.shared),
        )

    def successors(self, state):
        kappa, g = state
        for rid, src, dst, incs, guards in self.rules:
            if not kappa[src]:
                continue
            ok = True
            for vi, factor, is_ge, rhs in guards:
                lhs = checked(factor * g[vi])
                if (lhs < rhs) if is_ge else (lhs >= rhs):
                    ok = False
                    break
            if not ok:
                continue
            if src != dst:
                k = list(kappa)
                k[src] -= 1
                k[dst] += 1
                kappa2 = tuple(k)
            else:
                kappa2 = kappa
            if incs:
                gl = list(g)
                for vi in incs:
                    gl[vi] += 1
                g2 = tuple(gl)
            else:
                g2 = g
            yield rid, dst, (kappa2, g2)


def _search(comp: _Compiled, start, target: int | None, horizon: int, max_configs: int):
    """Breadth-first search; returns ``(run_or_None, visited_parents)``."""
    parent = {start: None}
    if target is not None and start[0][target] > 0:
        return [], parent
    frontier = [start]
    depth = 0
    while frontier and depth < horizon:
        nxt = []
        for state in frontier:
            for rid, dst, succ in comp.successors(state):
                if succ in parent:
                    continue
                parent[succ] = (state, rid)
                if len(parent) > max_configs:
                    raise StateCapExceeded(max_configs)
                if target is not None and dst == target and succ[0][target] > 0:
                    run = []
                    node = succ
                    while parent[node] is not None:
                        node, rule_id = parent[node]
                        run.append(rule_id)
                    run.reverse()
                    return run, parent
                nxt.append(succ)
        frontier = nxt
        depth += 1
    return None, parent


def _resolve_horizon(ta, size: int, horizon: int | None) -> tuple[int, bool]:
    """The horizon to use and whether a miss at that horizon is exact."""
    if ta.is_acyclic():
        bound = acyclic_step_bound(ta, size)
        if horizon is None:
            return bound, True
        return horizon, horizon >= bound
    if horizon is None:
        raise HorizonRequired("automaton has a cycle: a horizon must be given")
    return horizon, False


def covers_from(
    ta: ThresholdAutomaton,
    c0: Configuration,
    target: str,
    horizon: int | None = None,
    max_configs: int = DEFAULT_MAX_CONFIGS,
) -> list[str] | None:
    """A shortest run of at most ``horizon`` steps from ``c0`` covering
    ``target``, or ``None``.  ``horizon`` defaults to the acyclic step bound
    and is mandatory for cyclic automata."""
    check_configuration(ta, c0)
    h, _ = _resolve_horizon(ta, sum(c0.kappa.values()), horizon)
    comp = _Compiled(ta, c0.p)
    run, _ = _search(comp, comp.state(c0), comp.loc[target], h, max_configs)
    return run


def reachable_configs(
    ta: ThresholdAutomaton,
    c0: Configuration,
    horizon: int,
    max_configs: int = DEFAULT_MAX_CONFIGS,
) -> set[Configuration]:
    check_configuration(ta, c0)
    comp = _Compiled(ta, c0.p)
    _, parent = _search(comp, comp.state(c0), None, horizon, max_configs)
    return {
        Configuration(dict(zip(ta.locations, k)), dict(zip(ta.shared, g)), c0.p)
        for k, g in parent
    }


def _search_start(args):
    ta, p, kappa0, target, horizon, max_configs = args
    c0 = initial_configuration(ta, kappa0, p)
    h, exact = _resolve_horizon(ta, sum(kappa0.values()), horizon)
    comp = _Compiled(ta, p)
    try:
        run, _ = _search(comp, comp.state(c0), comp.loc[target], h, max_configs)
    except StateCapExceeded:
        return None, False, True
    return run, exact, False


def ta_covers(ta: ThresholdAutomaton, target: str, bounds: SearchBounds, jobs: int = 1) -> CoverVerdict:
    """Search every start point within ``bounds``; the first witness in
    enumeration order wins, whatever ``jobs`` is."""
    if target not in ta.locations:
        raise TAError(f"unknown target location {target!r}")
    diagnostics: list[str] = []
    points = enumerate_start_points(ta, bounds, diagnostics)
    tasks = ((ta, p, k, target, bounds.horizon, bounds.max_configs) for p, k in points)
    exact = True
    seen_p: set[tuple] = set()
    count = 0

    def consume(results):
        nonlocal exact, count
        for (args, (run, ok, capped)) in results:
            count += 1
            seen_p.add(tuple(args[1].values()))
            if capped:
                diagnostics.append(f"StateCapExceeded at {_fmt(args[1])}")
            exact = exact and ok
            if run is not None:
                return args, run
        return None

    if jobs > 1:
        task_list = list(tasks)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_search_start, task_list, chunksize=max(1, len(task_list) // (4 * jobs))))
        hit = consume(zip(task_list, results))
    else:
        hit = consume((args, _search_start(args)) for args in tasks)

    if hit is not None:
        args, run = hit
        _, p, kappa0 = args[0], args[1], args[2]
        verdict = Covered(dict(p), dict(kappa0), tuple(run))
        end = apply_run(ta, initial_configuration(ta, kappa0, p), run)
        if not end.covers(target):
            raise AssertionError("witness replay did not cover the target")
        return verdict
    return NotCoveredWithinBounds(bounds, exact, len(seen_p), count, tuple(diagnostics))
