"""The forall-exists fragment of Presburger arithmetic with divisibility.

Formulas have the shape ``forall x1..xn exists y1..ym : D1 or ... or Dk``
where every disjunct conjoins divisibility atoms ``x_j | y_k`` with linear
comparisons between polynomials with natural coefficients.

Concrete syntax::

    formula  := ["forall" var+] "exists" var* ":" disjunct ("or" disjunct)*
    disjunct := "(" atom ("and" atom)* ")"
    atom     := poly cmp poly | var "|" var
    cmp      := "<" | "<=" | "=" | ">" | ">=" | "!="
    poly     := term ("+" term)*
    term     := nat | nat "*" var | var

``!=`` is not stored: a disjunct containing ``p != q`` is split into one
disjunct with ``p < q`` and one with ``p > q``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import FormulaSyntaxError, FragmentViolation, UnsupportedLift

COMPARISONS = ("<", "<=", "=", ">", ">=")


def _nat_map(coeffs: Mapping[int, int]) -> dict[int, int]:
    out = {}
    for idx, k in coeffs.items():
        if k < 0:
            raise ValueError("polynomial coefficients must be natural numbers")
        if k:
            out[int(idx)] = int(k)
    return out


@dataclass(frozen=True)
class LinearPoly:
    """``const + sum(x_coeffs[j] * x_j) + sum(y_coeffs[k] * y_k)``; indices are 1-based."""

    const: int = 0
    x_coeffs: Mapping[int, int] = field(default_factory=dict)
    y_coeffs: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.const < 0:
            raise ValueError("polynomial constant must be a natural number")
        object.__setattr__(self, "x_coeffs", _nat_map(self.x_coeffs))
        object.__setattr__(self, "y_coeffs", _nat_map(self.y_coeffs))

    def __call__(self, X: Sequence[int], Y: Sequence[int] = ()) -> int:
        total = self.const
        for j, k in self.x_coeffs.items():
            total += k * X[j - 1]
        for j, k in self.y_coeffs.items():
            total += k * Y[j - 1]
        return total

    def __add__(self, other: LinearPoly) -> LinearPoly:
        xs = dict(self.x_coeffs)
        ys = dict(self.y_coeffs)
        for j, k in other.x_coeffs.items():
            xs[j] = xs.get(j, 0) + k
        for j, k in other.y_coeffs.items():
            ys[j] = ys.get(j, 0) + k
        return LinearPoly(self.const + other.const, xs, ys)

    def plus(self, n: int) -> LinearPoly:
        return LinearPoly(self.const + n, self.x_coeffs, self.y_coeffs)

    @property
    def max_x(self) -> int:
        return max(self.x_coeffs, default=0)

    @property
    def max_y(self) -> int:
        return max(self.y_coeffs, default=0)

    def __hash__(self):
        return hash((self.const, tuple(sorted(self.x_coeffs.items())), tuple(sorted(self.y_coeffs.items()))))

    def __str__(self) -> str:
        return format_poly(self)


def x(j: int, k: int = 1) -> LinearPoly:
    return LinearPoly(0, {j: k})


def y(j: int, k: int = 1) -> LinearPoly:
    return LinearPoly(0, {}, {j: k})


def const(c: int) -> LinearPoly:
    return LinearPoly(c)


@dataclass(frozen=True)
class Compare:
    lhs: LinearPoly
    op: str
    rhs: LinearPoly

    def __post_init__(self):
        if self.op not in COMPARISONS:
            raise ValueError(f"unsupported comparison {self.op!r}")

    def holds(self, X: Sequence[int], Y: Sequence[int]) -> bool:
        a, b = self.lhs(X, Y), self.rhs(X, Y)
        return {
            "<": a < b,
            "<=": a <= b,
            "=": a == b,
            ">": a > b,
            ">=": a >= b,
        }[self.op]

    def normal_form(self) -> list[tuple[LinearPoly, str, LinearPoly]]:
        """Equivalent conjunction of ``>=`` and ``<`` comparisons."""
        lhs, rhs = self.lhs, self.rhs
        if self.op == ">=":
            return [(lhs, ">=", rhs)]
        if self.op == "<":
            return [(lhs, "<", rhs)]
        if self.op == "<=":
            return [(lhs, "<", rhs.plus(1))]
        if self.op == ">":
            return [(lhs, ">=", rhs.plus(1))]
        return [(lhs, ">=", rhs), (lhs, "<", rhs.plus(1))]

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class Divides:
    """``x_j | y_k``."""

    j: int
    k: int

    def holds(self, X: Sequence[int], Y: Sequence[int]) -> bool:
        return divides(X[self.j - 1], Y[self.k - 1])

    def __str__(self) -> str:
        return f"x{self.j} | y{self.k}"


Atom = Compare | Divides


def divides(a: int, b: int) -> bool:
    if a == 0:
        return b == 0
    return b % a == 0


@dataclass(frozen=True)
class Disjunct:
    div_atoms: tuple[tuple[int, int], ...] = ()
    cmp_atoms: tuple[Compare, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "div_atoms", tuple(tuple(a) for a in self.div_atoms))
        object.__setattr__(self, "cmp_atoms", tuple(self.cmp_atoms))

    def atoms(self) -> list[Atom]:
        """Divisibility atoms first, then comparisons, each in input order."""
        return [Divides(j, k) for j, k in self.div_atoms] + list(self.cmp_atoms)

    def holds(self, X: Sequence[int], Y: Sequence[int]) -> bool:
        return all(a.holds(X, Y) for a in self.atoms())


@dataclass(frozen=True)
class PadFormula:
    n: int
    m: int
    disjuncts: tuple[Disjunct, ...]

    def __post_init__(self):
        object.__setattr__(self, "disjuncts", tuple(self.disjuncts))
        if not self.disjuncts:
            raise ValueError("a formula needs at least one disjunct")
        for d in self.disjuncts:
            if not d.atoms():
                raise ValueError("a disjunct needs at least one atom")
            for j, k in d.div_atoms:
                if not (1 <= j <= self.n and 1 <= k <= self.m):
                    raise ValueError(f"divisibility x{j} | y{k} out of range")
            for c in d.cmp_atoms:
                for poly in (c.lhs, c.rhs):
                    if poly.max_x > self.n or poly.max_y > self.m:
                        raise ValueError(f"comparison {c} uses an undeclared variable")

    def atoms(self) -> list[Atom]:
        return [a for d in self.disjuncts for a in d.atoms()]

    def __str__(self) -> str:
        return format_formula(self)


def eval_matrix(f: PadFormula, X: Sequence[int], Y: Sequence[int]) -> bool:
    if len(X) != f.n or len(Y) != f.m:
        raise ValueError(f"expected {f.n} universal and {f.m} existential values")
    return any(d.holds(X, Y) for d in f.disjuncts)


def _box(bound, count: int):
    if isinstance(bound, int):
        bounds = [bound] * count
    else:
        bounds = list(bound)
        if len(bounds) != count:
            raise ValueError(f"expected {count} bounds, got {len(bounds)}")
    return itertools.product(*(range(b + 1) for b in bounds))


def bounded_validity(f: PadFormula, Bx, By) -> bool:
    """Check ``forall X <= Bx exists Y <= By`` of the matrix.

    This is a finite surrogate used as a test oracle: it is neither sound nor
    complete for validity over all naturals.  ``Bx`` and ``By`` are either one
    bound for every variable or a per-variable sequence.
    """
    ys = list(_box(By, f.m))
    return all(any(eval_matrix(f, X, Y) for Y in ys) for X in _box(Bx, f.n))


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[^\W\d]\w*)|(?P<op><=|>=|!=|[<>=|*+():]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.xs: dict[str, int] = {}
        self.ys: dict[str, int] = {}

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def is_keyword(self, word: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "name" and val == word

    def declare(self, table: dict[str, int]):
        while self.peek()[0] == "name" and self.peek()[1] not in ("exists", "forall"):
            _, name, pos = self.take()
            if name in self.xs or name in self.ys:
                raise FormulaSyntaxError(f"variable {name!r} declared twice", pos)
            table[name] = len(table) + 1

    def formula(self) -> PadFormula:
        if self.is_keyword("forall"):
            self.take()
            self.declare(self.xs)
        if not self.is_keyword("exists"):
            _, val, pos = self.peek()
            raise FormulaSyntaxError(f"expected 'exists', found {val or 'end of input'!r}", pos)
        self.take()
        self.declare(self.ys)
        self.expect(":")
        disjuncts = self.disjunct()
        while self.is_keyword("or"):
            self.take()
            disjuncts += self.disjunct()
        kind, val, pos = self.peek()
        if kind != "end":
            raise FormulaSyntaxError(f"unexpected {val!r}", pos)
        return PadFormula(len(self.xs), len(self.ys), tuple(disjuncts))

    def disjunct(self) -> list[Disjunct]:
        self.expect("(")
        atoms = [self.atom()]
        while self.is_keyword("and"):
            self.take()
            atoms.append(self.atom())
        self.expect(")")
        # each != atom doubles the disjunct
        options = [[a] if not isinstance(a, tuple) else list(a) for a in atoms]
        out = []
        for choice in itertools.product(*options):
            divs = tuple((a.j, a.k) for a in choice if isinstance(a, Divides))
            cmps = tuple(a for a in choice if isinstance(a, Compare))
            out.append(Disjunct(divs, cmps))
        return out

    def atom(self):
        lhs = self.poly()
        kind, op, pos = self.take()
        if op not in COMPARISONS + ("!=", "|"):
            raise FormulaSyntaxError(f"expected a comparison, found {op or 'end of input'!r}", pos)
        rhs = self.poly()
        if op == "|":
            return self.divisibility(lhs, rhs, pos)
        if op == "!=":
            return (Compare(lhs, "<", rhs), Compare(lhs, ">", rhs))
        return Compare(lhs, op, rhs)

    @staticmethod
    def divisibility(lhs: LinearPoly, rhs: LinearPoly, pos: int) -> Divides:
        if lhs.const or lhs.y_coeffs or len(lhs.x_coeffs) != 1 or set(lhs.x_coeffs.values()) != {1}:
            raise FragmentViolation(
                f"left side of '|' at position {pos} must be a universally quantified variable"
            )
        if rhs.const or rhs.x_coeffs or len(rhs.y_coeffs) != 1 or set(rhs.y_coeffs.values()) != {1}:
            raise FragmentViolation(
                f"right side of '|' at position {pos} must be an existentially quantified variable"
            )
        return Divides(next(iter(lhs.x_coeffs)), next(iter(rhs.y_coeffs)))

    def poly(self) -> LinearPoly:
        total = self.term()
        while self.peek()[1] == "+":
            self.take()
            total = total + self.term()
        return total

    def term(self) -> LinearPoly:
        kind, val, pos = self.take()
        if kind == "num":
            if self.peek()[1] == "*":
                self.take()
                return self.variable(int(val))
            return LinearPoly(int(val))
        if kind == "name":
            self.i -= 1
            return self.variable(1)
        raise FormulaSyntaxError(f"expected a term, found {val or 'end of input'!r}", pos)

    def variable(self, coeff: int) -> LinearPoly:
        kind, name, pos = self.take()
        if kind != "name":
            raise FormulaSyntaxError("expected a variable", pos)
        if name in self.xs:
            return x(self.xs[name], coeff)
        if name in self.ys:
            return y(self.ys[name], coeff)
        raise FormulaSyntaxError(f"undeclared variable {name!r}", pos)


def parse_formula(text: str) -> PadFormula:
    return _Parser(text).formula()


_INDEXED = re.compile(r"([xy])([1-9]\d*)$")


def parse_poly(text: str) -> LinearPoly:
    """Parse a polynomial over variables named ``x<i>`` and ``y<i>``."""
    parser = _Parser(text)
    for kind, val, pos in parser.tokens:
        if kind == "name":
            m = _INDEXED.match(val)
            if not m:
                raise FormulaSyntaxError(f"variables must be named x<i> or y<i>, not {val!r}", pos)
            table = parser.xs if m.group(1) == "x" else parser.ys
            table[val] = int(m.group(2))
    poly = parser.poly()
    kind, val, pos = parser.peek()
    if kind != "end":
        raise FormulaSyntaxError(f"unexpected {val!r}", pos)
    return poly


def format_poly(p: LinearPoly) -> str:
    terms = []
    for j, k in sorted(p.x_coeffs.items()):
        terms.append(f"x{j}" if k == 1 else f"{k}*x{j}")
    for j, k in sorted(p.y_coeffs.items()):
        terms.append(f"y{j}" if k == 1 else f"{k}*y{j}")
    if p.const or not terms:
        terms.append(str(p.const))
    return " + ".join(terms)


def format_formula(f: PadFormula) -> str:
    head = ""
    if f.n:
        head = "forall " + " ".join(f"x{i}" for i in range(1, f.n + 1)) + " "
    head += "exists" + "".join(f" y{i}" for i in range(1, f.m + 1)) + " : "
    parts = ["(" + " and ".join(str(a) for a in d.atoms()) + ")" for d in f.disjuncts]
    return head + " or ".join(parts)


# -- lifting general divisibility ------------------------------------------


def lift_general_divisibility(f: LinearPoly, g: LinearPoly, n: int | None = None, m: int | None = None) -> PadFormula:
    """Rewrite ``forall x exists y : f(x) | g(x, y)`` into the fragment.

    A fresh universal ``z = x_{n+1}`` and existential ``z' = y_{m+1}`` give the
    equivalent matrix ``z < f or z > f or (z = f and z' = g and z | z')``.
    """
    if f.y_coeffs:
        raise UnsupportedLift("the divisor may only mention universal variables")
    n = max(f.max_x, g.max_x) if n is None else n
    m = g.max_y if m is None else m
    if f.max_x > n or g.max_x > n or g.max_y > m:
        raise UnsupportedLift("polynomials mention variables beyond the given counts")
    z, zp = x(n + 1), y(m + 1)
    return PadFormula(
        n + 1,
        m + 1,
        (
            Disjunct((), (Compare(z, "<", f),)),
            Disjunct((), (Compare(z, ">", f),)),
            Disjunct(((n + 1, m + 1),), (Compare(z, "=", f), Compare(zp, "=", g))),
        ),
    )


def general_divisibility_valid(f: LinearPoly, g: LinearPoly, n: int, m: int, Bx: int, By: int) -> bool:
    """Bounded check of ``forall x <= Bx exists y <= By : f(x) | g(x, y)``."""
    ys = list(_box(By, m))
    return all(any(divides(f(X), g(X, Y)) for Y in ys) for X in _box(Bx, n))


def lifted_bounds(f: LinearPoly, g: LinearPoly, n: int, m: int, Bx: int, By: int):
    """Per-variable bounds for the lifted formula covering every value of
    ``f`` and ``g`` on the original grid."""
    fmax = max((f(X) for X in _box(Bx, n)), default=f.const)
    gmax = max((g(X, Y) for X in _box(Bx, n) for Y in _box(By, m)), default=g.const)
    return [Bx] * n + [fmax], [By] * m + [gmax]
