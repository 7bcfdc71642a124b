"""Line-oriented automaton documents and ``key: value`` reports.

Document grammar (``#`` starts a comment)::

    env param <name>...
    env resilience <linexpr> (>=|<|=|>|<=) <linexpr>
    env size <linexpr>
    indet <name>...
    locations <name>...
    initial <name>...
    shared <name>...
    rule <id> <from> -> <to> when <guard> (and <guard>)* | true [inc <var>...]

A guard is ``<lhs> (>=|<|=|>|<=) <rhs>``.  Both sides are sums of signed
monomials such as ``3``, ``2*t``, ``s1*d_1`` or ``a*x``.  Every monomial on
the left mentions the guarded shared variable once, and may be scaled by one
indeterminate; monomials on the right mention at most one parameter and at
most one indeterminate.  ``=``, ``>`` and ``<=`` are rewritten into the
``>=``/``<`` forms on input; the printer folds ``>= e`` followed by
``< e + 1`` back into ``= e``.
"""

from __future__ import annotations

import re
from typing import Iterable

from .core import Cmp, Environment, LinearConstraint, LinearExpr, Rule, ThresholdAutomaton
from .errors import DocumentError
from .sketch import AffineCoeff, SketchAutomaton, SketchGuard, as_sketch

_NAME = r"[^\W\d][\w']*"
_EXPR_TOKEN = re.compile(rf"\s*(?:(?P<num>\d+)|(?P<name>{_NAME})|(?P<op>[-+*]))")
_CMP = re.compile(r"(>=|<=|>|<|=)")
_RULE = re.compile(r"^rule\s+(\S+)\s+(\S+)\s*->\s*(\S+)\s+when\s+(.*?)(?:\s+inc\s+(.*))?$")


class _LineError(Exception):
    pass


def _monomials(text: str) -> list[tuple[int, list[str]]]:
    """Split ``text`` into signed ``(coefficient, names)`` products."""
    text = text.strip()
    if not text:
        raise _LineError("empty expression")
    pos, out = 0, []
    sign, coeff, names, expect_factor = 1, 1, [], True
    while pos < len(text):
        m = _EXPR_TOKEN.match(text, pos)
        if not m:
            raise _LineError(f"unexpected {text[pos:]!r}")
        pos = m.end()
        kind, tok = m.lastgroup, m.group(m.lastgroup)
        if expect_factor:
            if kind == "num":
                coeff *= int(tok)
            elif kind == "name":
                names.append(tok)
            elif tok == "-" and not names and coeff == 1:
                sign = -sign
                continue
            else:
                raise _LineError(f"unexpected {tok!r}")
            expect_factor = False
        else:
            if tok == "*":
                expect_factor = True
            elif tok in "+-":
                out.append((sign * coeff, names))
                sign, coeff, names, expect_factor = (1 if tok == "+" else -1), 1, [], True
            else:
                raise _LineError(f"missing operator before {tok!r}")
    if expect_factor:
        raise _LineError("expression ends with an operator")
    out.append((sign * coeff, names))
    return out


def _linexpr(text: str, params: set[str]) -> LinearExpr:
    const, coeffs = 0, {}
    for k, names in _monomials(text):
        if not names:
            const += k
        elif len(names) == 1 and names[0] in params:
            coeffs[names[0]] = coeffs.get(names[0], 0) + k
        else:
            raise _LineError(f"{'*'.join(names)} is not a parameter term")
    return LinearExpr(const, coeffs)


def _constraint(text: str, params: set[str]) -> LinearConstraint:
    parts = _CMP.split(text)
    if len(parts) != 3:
        raise _LineError("expected exactly one comparison")
    lhs, op, rhs = _linexpr(parts[0], params), parts[1], _linexpr(parts[2], params)
    if op == ">":
        return LinearConstraint(lhs, Cmp.GE, rhs.shift(1))
    if op == "<=":
        return LinearConstraint(lhs, Cmp.LT, rhs.shift(1))
    return LinearConstraint(lhs, Cmp(op), rhs)


def _guard(text: str, params: set[str], indets: set[str], shared: set[str]) -> list[SketchGuard]:
    parts = _CMP.split(text)
    if len(parts) != 3:
        raise _LineError(f"guard {text.strip()!r} needs exactly one comparison")
    lhs_text, op, rhs_text = parts
    var, factor = None, AffineCoeff()
    for k, names in _monomials(lhs_text):
        vars_here = [n for n in names if n in shared]
        rest = [n for n in names if n not in shared]
        if len(vars_here) != 1:
            raise _LineError("each left-hand term must mention one shared variable")
        if var is not None and vars_here[0] != var:
            raise _LineError("a guard compares a single shared variable")
        var = vars_here[0]
        if len(rest) > 1 or (rest and rest[0] not in indets):
            raise _LineError(f"bad coefficient {'*'.join(rest)!r} on {var}")
        factor = factor + AffineCoeff(0 if rest else k, {rest[0]: k} if rest else {})
    const, pcoeffs = AffineCoeff(), {}
    for k, names in _monomials(rhs_text):
        ps = [n for n in names if n in params]
        ins = [n for n in names if n in indets]
        if len(ps) + len(ins) != len(names):
            unknown = [n for n in names if n not in params and n not in indets]
            raise _LineError(f"unknown name {unknown[0]!r} on the right of a guard")
        if len(ps) > 1 or len(ins) > 1:
            raise _LineError("a right-hand term may use one parameter and one indeterminate")
        piece = AffineCoeff(0, {ins[0]: k}) if ins else AffineCoeff(k)
        if ps:
            pcoeffs[ps[0]] = pcoeffs.get(ps[0], AffineCoeff()) + piece
        else:
            const = const + piece
    one = AffineCoeff(1)
    base = SketchGuard(var, factor, Cmp.GE, const, pcoeffs)
    if op == ">=":
        return [base]
    if op == ">":
        return [base.shift(1)]
    lt = SketchGuard(var, factor, Cmp.LT, const, pcoeffs)
    if op == "<":
        return [lt]
    if op == "<=":
        return [lt.shift(1)]
    return [base, SketchGuard(var, factor, Cmp.LT, const + one, pcoeffs)]


def parse_ta(text: str) -> SketchAutomaton:
    """Parse a document; raise :class:`DocumentError` listing every problem."""
    errors: list[tuple[int, str]] = []
    params: list[str] = []
    indets: list[str] = []
    locations: list[str] = []
    initial: list[str] = []
    shared: list[str] = []
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head == "env" and len(words) > 1 and words[1] == "param":
            params += words[2:]
        elif head == "indet":
            indets += words[1:]
        elif head == "locations":
            locations += words[1:]
        elif head == "initial":
            initial += words[1:]
        elif head == "shared":
            shared += words[1:]
        elif head in ("env", "rule"):
            lines.append((number, line))
        else:
            errors.append((number, f"unknown declaration {head!r}"))

    pset, iset, sset = set(params), set(indets), set(shared)
    resilience, size, rules = [], LinearExpr(), []
    for number, line in lines:
        try:
            if line.startswith("env"):
                words = line.split(None, 2)
                if len(words) < 3 or words[1] not in ("resilience", "size"):
                    raise _LineError("expected 'env param', 'env resilience' or 'env size'")
                if words[1] == "resilience":
                    if words[2].strip() != "true":
                        resilience.append(_constraint(words[2], pset))
                else:
                    size = _linexpr(words[2], pset)
                continue
            m = _RULE.match(line)
            if not m:
                raise _LineError("expected 'rule <id> <from> -> <to> when <guards> [inc <vars>]'")
            rid, src, dst, guard_text, inc_text = m.groups()
            guards = []
            if guard_text.strip() != "true":
                for part in re.split(r"\s+and\s+", guard_text):
                    guards += _guard(part, pset, iset, sset)
            update: dict[str, int] = {}
            for var in (inc_text or "").split():
                update[var] = update.get(var, 0) + 1
            rules.append(Rule(rid, src, dst, tuple(guards), update))
        except _LineError as exc:
            errors.append((number, str(exc)))

    sketch = SketchAutomaton(
        Environment(tuple(params), tuple(resilience), size),
        tuple(locations),
        tuple(initial),
        tuple(shared),
        tuple(rules),
        tuple(indets),
    )
    if not errors:
        errors += [(0, str(d)) for d in sketch.validate()]
    if errors:
        raise DocumentError(errors)
    return sketch


# -- printing --------------------------------------------------------------


def _join(terms: Iterable[tuple[int, list[str]]]) -> str:
    out = ""
    for k, names in terms:
        if k == 0:
            continue
        mag = abs(k)
        body = "*".join(names) if names else str(mag)
        if names and mag != 1:
            body = f"{mag}*{body}"
        if not out:
            out = ("-" if k < 0 else "") + body
        else:
            out += (" - " if k < 0 else " + ") + body
    return out or "0"


def _affine_terms(c: AffineCoeff, indet_order: list[str], suffix: list[str]):
    terms = [(c.const, suffix)] if c.const else []
    for name in _ordered(c.coeffs, indet_order):
        terms.append((c.coeffs[name], [name] + suffix))
    return terms


def _ordered(names, order: list[str]) -> list[str]:
    rank = {n: i for i, n in enumerate(order)}
    return sorted(names, key=lambda n: (rank.get(n, len(rank)), n))


def format_linexpr(e: LinearExpr, param_order: list[str]) -> str:
    terms = [(e.coeffs[p], [p]) for p in _ordered(e.coeffs, param_order)]
    terms.append((e.const, []))
    return _join(terms)


def _format_rhs(g: SketchGuard, param_order: list[str], indet_order: list[str]) -> str:
    terms = []
    for p in _ordered(g.rhs_param_coeffs, param_order):
        terms += _affine_terms(g.rhs_param_coeffs[p], indet_order, [p])
    const_terms = _affine_terms(g.rhs_const, indet_order, [])
    # numeric constant goes last
    terms += [t for t in const_terms if t[1]] + [t for t in const_terms if not t[1]]
    return _join(terms)


def _format_lhs(g: SketchGuard, indet_order: list[str]) -> str:
    return _join(_affine_terms(g.factor, indet_order, [g.var]))


def _is_eq_pair(a: SketchGuard, b: SketchGuard) -> bool:
    return (
        a.cmp is Cmp.GE
        and b.cmp is Cmp.LT
        and a.var == b.var
        and a.factor == b.factor
        and b.rhs_param_coeffs == a.rhs_param_coeffs
        and b.rhs_const == a.rhs_const + AffineCoeff(1)
    )


def _format_guards(guards, param_order, indet_order) -> str:
    parts, i = [], 0
    while i < len(guards):
        g = guards[i]
        if i + 1 < len(guards) and _is_eq_pair(g, guards[i + 1]):
            op, i = "=", i + 2
        else:
            op, i = g.cmp.value, i + 1
        parts.append(f"{_format_lhs(g, indet_order)} {op} {_format_rhs(g, param_order, indet_order)}")
    return " and ".join(parts) if parts else "true"


def print_ta(automaton: SketchAutomaton | ThresholdAutomaton) -> str:
    """Canonical document text for a sketch or threshold automaton."""
    s = as_sketch(automaton) if isinstance(automaton, ThresholdAutomaton) else automaton
    params = list(s.env.params)
    indets = list(s.indeterminates())
    lines = []
    if params:
        lines.append("env param " + " ".join(params))
    for c in s.env.resilience:
        lines.append(
            f"env resilience {format_linexpr(c.lhs, params)} {c.cmp.value} {format_linexpr(c.rhs, params)}"
        )
    lines.append(f"env size {format_linexpr(s.env.size_fn, params)}")
    if indets:
        lines.append("indet " + " ".join(indets))
    lines.append("locations " + " ".join(s.locations))
    lines.append("initial " + " ".join(s.initial))
    if s.shared:
        lines.append("shared " + " ".join(s.shared))
    for r in s.rules:
        line = f"rule {r.id} {r.src} -> {r.dst} when {_format_guards(r.guards, params, indets)}"
        incs = [v for v in s.shared if r.update.get(v)] + [v for v in r.update if v not in s.shared]
        if incs:
            line += " inc " + " ".join(v for v in incs for _ in range(r.update[v]))
        lines.append(line)
    return "\n".join(lines) + "\n"


# -- reports ---------------------------------------------------------------


def format_report(records: Iterable[tuple[str, object]]) -> str:
    out = []
    for key, value in records:
        if ":" in key or "\n" in key or "\n" in str(value):
            raise ValueError(f"record {key!r} cannot be written on one line")
        out.append(f"{key}: {value}")
    return "\n".join(out) + "\n"


def read_report(text: str) -> list[tuple[str, str]]:
    records = []
    for number, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        key, sep, value = line.partition(": ")
        if not sep:
            raise ValueError(f"line {number} is not a 'key: value' record")
        records.append((key, value))
    return records
