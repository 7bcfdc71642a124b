"""Enumerative coefficient synthesis against coverability.

The loop enumerates assignments fairly and keeps the first one whose
instantiation shows no cover within the search bounds.  Covering runs found
on the way are cached and replayed against later assignments before a full
search; a replayed run only counts if every step re-validates.

No procedure can certify non-coverability for all valuations in general, so
the positive verdict is a :class:`Candidate` carrying its bounded evidence.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .core import apply_run, initial_configuration
from .coverability import Covered, NotCoveredWithinBounds, SearchBounds, ta_covers
from .errors import InvalidAutomaton, NonPositiveFactor, RuleNotEnabled
from .sketch import SketchAutomaton, instantiate

log = logging.getLogger(__name__)


class Mode(enum.Enum):
    NONNEGATIVE = "nonneg"
    INTEGER = "int"


def _zigzag(v: int) -> int:
    return 2 * v - 1 if v > 0 else -2 * v


def enumerate_assignments(names: Sequence[str], bound: int, mode: Mode) -> Iterator[dict[str, int]]:
    """All assignments within ``bound``, by total magnitude then position.

    Integer mode orders each coordinate as 0, 1, -1, 2, -2, ...
    """
    values = range(bound + 1) if mode is Mode.NONNEGATIVE else range(-bound, bound + 1)
    combos = sorted(
        itertools.product(values, repeat=len(names)),
        key=lambda vs: (sum(abs(v) for v in vs), tuple(_zigzag(v) for v in vs)),
    )
    for vs in combos:
        yield dict(zip(names, vs))


@dataclass(frozen=True)
class SynthesisQuery:
    sketch: SketchAutomaton
    target: str
    mode: Mode = Mode.NONNEGATIVE
    assignment_bound: int = 2
    cover_bounds: SearchBounds = field(default_factory=lambda: SearchBounds(param_bound=3))
    jobs: int = 1

    def __post_init__(self):
        if self.assignment_bound < 0:
            raise ValueError("assignment_bound must be >= 0")


@dataclass(frozen=True)
class Candidate:
    mu: Mapping[str, int]
    evidence: NotCoveredWithinBounds
    counterexamples: Mapping[tuple, Covered] = field(default_factory=dict)
    skipped: tuple[str, ...] = ()


@dataclass(frozen=True)
class Exhausted:
    """Every assignment within ``bound`` was refuted or skipped."""

    bound: int
    counterexamples: Mapping[tuple, Covered] = field(default_factory=dict)
    skipped: tuple[str, ...] = ()


SynthesisVerdict = Candidate | Exhausted


def _key(mu: Mapping[str, int]) -> tuple:
    return tuple(sorted(mu.items()))


def replay(ta, witness: Covered, target: str) -> bool:
    """Whether ``witness`` still covers ``target`` in ``ta``."""
    if not ta.env.admits(witness.p) or ta.env.size(witness.p) != sum(witness.kappa0.values()):
        return False
    try:
        end = apply_run(ta, initial_configuration(ta, witness.kappa0, witness.p), witness.run)
    except RuleNotEnabled:
        return False
    return end.covers(target)


def synthesize(q: SynthesisQuery) -> SynthesisVerdict:
    names = q.sketch.indeterminates()
    cache: dict[tuple, Covered] = {}
    refuted: dict[tuple, Covered] = {}
    skipped: list[str] = []
    for mu in enumerate_assignments(names, q.assignment_bound, q.mode):
        try:
            ta = instantiate(q.sketch, mu)
        except (NonPositiveFactor, InvalidAutomaton) as exc:
            skipped.append(f"{_fmt(mu)}: {exc}")
            log.info("skipping %s: %s", _fmt(mu), exc)
            continue
        hit = next((w for w in cache.values() if replay(ta, w, q.target)), None)
        if hit is None:
            verdict = ta_covers(ta, q.target, q.cover_bounds, jobs=q.jobs)
            if isinstance(verdict, NotCoveredWithinBounds):
                return Candidate(dict(mu), verdict, refuted, tuple(skipped))
            hit = verdict
            cache[(_key(hit.p), _key(hit.kappa0))] = hit
        refuted[_key(mu)] = hit
    return Exhausted(q.assignment_bound, refuted, tuple(skipped))


def _fmt(mu: Mapping[str, int]) -> str:
    return ",".join(f"{k}={v}" for k, v in mu.items()) or "(empty)"


@dataclass(frozen=True)
class EvidenceReport:
    mu: Mapping[str, int]
    accepted: bool
    verdict: Covered | NotCoveredWithinBounds

    def records(self) -> list[tuple[str, object]]:
        out: list[tuple[str, object]] = [("assignment", _fmt(self.mu))]
        v = self.verdict
        if isinstance(v, Covered):
            out += [
                ("verdict", "rejected"),
                ("witness-params", _fmt(v.p)),
                ("witness-start", _fmt(v.kappa0)),
                ("witness-run", " ".join(v.run) or "(empty)"),
            ]
        else:
            out += [
                ("verdict", "candidate"),
                ("param-bound", v.bounds.param_bound),
                ("horizon", "auto" if v.bounds.horizon is None else v.bounds.horizon),
                ("valuations-checked", v.valuations_checked),
                ("start-points-checked", v.start_points),
                ("exact-within-bounds", str(v.exact).lower()),
                ("scope", f"no cover for parameters <= {v.bounds.param_bound}; larger valuations unchecked"),
            ]
            out += [("diagnostic", d) for d in v.diagnostics]
        return out


def verify_candidate(sketch: SketchAutomaton, mu: Mapping[str, int], target: str, bounds: SearchBounds, jobs: int = 1) -> EvidenceReport:
    """Independently re-run the bounded coverability check for ``mu``."""
    verdict = ta_covers(instantiate(sketch, mu), target, bounds, jobs=jobs)
    return EvidenceReport(dict(mu), isinstance(verdict, NotCoveredWithinBounds), verdict)
