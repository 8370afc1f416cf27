"""Exact rational linear arithmetic: expressions, constraints, conjunctions, theories.

Every coefficient is a fractions.Fraction; nothing in this module (or anything
built on it) ever rounds. A conjunction is an ordered list of constraints in
the normal form `lhs rel 0` with rel in {<=, <, =}; a theory is an ordered
set of conjunctions read as a disjunction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd, lcm
from typing import Callable, Iterable, Iterator, Mapping

from .errors import InputError, UnboundVariableError

Rat = Fraction

ZERO = Rat(0)
ONE = Rat(1)

_RAT_RE = re.compile(r"^[+-]?\d+(?:\.\d+|/\d+)?$")


def parse_rat(text: str) -> Rat:
    """Parse an integer, decimal, or p/q literal into an exact rational.

    Decimals are exact (0.1 -> 1/10). Scientific notation is rejected.
    """
    s = text.strip()
    if not _RAT_RE.match(s):
        raise InputError(f"not a rational literal: {text!r}", kind="parse_error")
    try:
        return Fraction(s)
    except ZeroDivisionError:
        raise InputError(f"zero denominator in {text!r}", kind="parse_error") from None


def render_rat(q: Rat) -> str:
    """Canonical text for a rational: an integer or `p/q` in lowest terms."""
    return str(q)


class Rel(Enum):
    LE = "<="
    LT = "<"
    EQ = "="

    @property
    def text(self) -> str:
        return self.value


@dataclass(frozen=True)
class LinExpr:
    """A linear expression: sum of coeff*var terms plus a constant.

    `terms` is sorted by variable id and stores no zero coefficients.
    """

    terms: tuple[tuple[int, Rat], ...] = ()
    const: Rat = ZERO

    @staticmethod
    def of(coeffs: Mapping[int, Rat] | Iterable[tuple[int, Rat]], const: Rat = ZERO) -> "LinExpr":
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        merged: dict[int, Rat] = {}
        for v, c in items:
            merged[v] = merged.get(v, ZERO) + c
        return LinExpr(tuple(sorted((v, c) for v, c in merged.items() if c != 0)), const)

    @staticmethod
    def var(v: int, coeff: Rat = ONE) -> "LinExpr":
        return LinExpr.of({v: coeff})

    @staticmethod
    def constant(c: Rat) -> "LinExpr":
        return LinExpr((), c)

    def coeff(self, v: int) -> Rat:
        for w, c in self.terms:
            if w == v:
                return c
        return ZERO

    @property
    def variables(self) -> set[int]:
        return {v for v, _ in self.terms}

    def __add__(self, other: "LinExpr") -> "LinExpr":
        d = dict(self.terms)
        for v, c in other.terms:
            d[v] = d.get(v, ZERO) + c
        return LinExpr.of(d, self.const + other.const)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + (-other)

    def __neg__(self) -> "LinExpr":
        return LinExpr(tuple((v, -c) for v, c in self.terms), -self.const)

    def scale(self, k: Rat) -> "LinExpr":
        if k == 0:
            return LinExpr()
        return LinExpr(tuple((v, c * k) for v, c in self.terms), self.const * k)

    def subs(self, v: int, replacement: "LinExpr") -> "LinExpr":
        """Substitute `replacement` for variable v."""
        c = self.coeff(v)
        if c == 0:
            return self
        rest = LinExpr(tuple((w, k) for w, k in self.terms if w != v), self.const)
        return rest + replacement.scale(c)

    def eval(self, point: Mapping[int, Rat]) -> Rat:
        total = self.const
        for v, c in self.terms:
            if v not in point:
                raise UnboundVariableError(v)
            total += c * point[v]
        return total


def eval_expr(e: LinExpr, point: Mapping[int, Rat]) -> Rat:
    """Exact value of e at a point binding every variable of e."""
    return e.eval(point)


@dataclass(frozen=True)
class LinearConstraint:
    """Normalized constraint `lhs rel 0` with rel in {<=, <, =}.

    A constraint with no variable terms is ground; the distinguished TRUE and
    FALSE constraints are the canonical ground forms 0 <= 0 and 0 < 0.
    """

    lhs: LinExpr
    rel: Rel

    @property
    def is_ground(self) -> bool:
        return not self.lhs.terms

    @property
    def is_true(self) -> bool:
        return self.is_ground and _ground_holds(self.lhs.const, self.rel)

    @property
    def is_false(self) -> bool:
        return self.is_ground and not _ground_holds(self.lhs.const, self.rel)

    def satisfied_at(self, point: Mapping[int, Rat]) -> bool:
        return _ground_holds(self.lhs.eval(point), self.rel)


TRUE = LinearConstraint(LinExpr(), Rel.LE)
FALSE = LinearConstraint(LinExpr(), Rel.LT)


def _ground_holds(value: Rat, rel: Rel) -> bool:
    if rel is Rel.LE:
        return value <= 0
    if rel is Rel.LT:
        return value < 0
    return value == 0


def normalize(lhs: LinExpr | Rat, rel: str | Rel, rhs: LinExpr | Rat = ZERO) -> LinearConstraint:
    """Build the normal form of `lhs rel rhs`.

    >= and > are flipped by negation; the rhs is folded into the lhs; ground
    constraints collapse to the distinguished TRUE/FALSE.
    """
    if isinstance(lhs, (int, Fraction)):
        lhs = LinExpr.constant(Rat(lhs))
    if isinstance(rhs, (int, Fraction)):
        rhs = LinExpr.constant(Rat(rhs))
    e = lhs - rhs
    if isinstance(rel, Rel):
        tag = rel.text
    else:
        tag = rel
    if tag in (">=", ">"):
        e = -e
        tag = "<=" if tag == ">=" else "<"
    try:
        r = {"<=": Rel.LE, "<": Rel.LT, "=": Rel.EQ, "==": Rel.EQ}[tag]
    except KeyError:
        raise InputError(f"unsupported relation {tag!r}", kind="relation") from None
    if not e.terms:
        return TRUE if _ground_holds(e.const, r) else FALSE
    return LinearConstraint(e, r)


def negate(c: LinearConstraint) -> LinearConstraint:
    """Complement of an inequality: exactly one of c, negate(c) holds anywhere."""
    if c.rel is Rel.EQ:
        raise ValueError("cannot negate an equality constraint")
    if c.is_ground:
        return FALSE if c.is_true else TRUE
    flipped = Rel.LT if c.rel is Rel.LE else Rel.LE
    return LinearConstraint(-c.lhs, flipped)


def scaled(c: LinearConstraint) -> LinearConstraint:
    """Canonical rescaling: coefficients become coprime integers.

    For equalities the leading coefficient is made positive. The solution set
    is unchanged; used for deduplication, rendering, and integer reasoning.
    """
    if c.is_ground:
        return TRUE if c.is_true else FALSE
    denom_lcm = lcm(*(t[1].denominator for t in c.lhs.terms))
    num_gcd = gcd(*(t[1].numerator for t in c.lhs.terms))
    k = Rat(denom_lcm, num_gcd)
    if c.rel is Rel.EQ and c.lhs.terms[0][1] < 0:
        k = -k
    return LinearConstraint(c.lhs.scale(k), c.rel)


@dataclass(frozen=True)
class Conjunction:
    """An ordered conjunction of constraints. May contain redundant members;
    simplification is always an explicit operation, never implicit."""

    constraints: tuple[LinearConstraint, ...] = ()

    @staticmethod
    def of(items: Iterable[LinearConstraint]) -> "Conjunction":
        return Conjunction(tuple(items))

    def __iter__(self) -> Iterator[LinearConstraint]:
        return iter(self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)

    def conjoin(self, other: "Conjunction") -> "Conjunction":
        return Conjunction(self.constraints + other.constraints)

    @property
    def variables(self) -> set[int]:
        vs: set[int] = set()
        for c in self.constraints:
            vs |= c.lhs.variables
        return vs

    @property
    def has_false(self) -> bool:
        return any(c.is_false for c in self.constraints)

    def satisfied_at(self, point: Mapping[int, Rat]) -> bool:
        return all(c.satisfied_at(point) for c in self.constraints)


EMPTY = Conjunction()
UNSAT = Conjunction((FALSE,))


@dataclass(frozen=True)
class Theory:
    """A finite ordered set of conjunctions, read disjunctively.

    The empty theory is the empty disjunction, i.e. unsatisfiable. Member
    order is deterministic and preserved by every operator.
    """

    members: tuple[Conjunction, ...] = ()

    @staticmethod
    def of(items: Iterable[Conjunction]) -> "Theory":
        return Theory(tuple(items))

    def __iter__(self) -> Iterator[Conjunction]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


Namer = Callable[[int], str]


def _render_terms(terms: tuple[tuple[int, Rat], ...], namer: Namer) -> str:
    parts: list[str] = []
    for i, (v, c) in enumerate(terms):
        mag = abs(c)
        body = namer(v) if mag == 1 else f"{render_rat(mag)}*{namer(v)}"
        if i == 0:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f" + {body}" if c > 0 else f" - {body}")
    return "".join(parts)


def render_constraint(c: LinearConstraint, namer: Namer) -> str:
    """Canonical text: terms sorted by variable id, relation <=, <, or =,
    constant moved to whichever side keeps the leading coefficient positive
    (e.g. `30 <= CE.age` rather than `-CE.age <= -30`)."""
    if c.is_ground:
        return "true" if c.is_true else "false"
    sc = scaled(c)
    e = sc.lhs
    if sc.rel is Rel.EQ:
        return f"{_render_terms(e.terms, namer)} = {render_rat(-e.const)}"
    if e.terms[0][1] > 0:
        return f"{_render_terms(e.terms, namer)} {sc.rel.text} {render_rat(-e.const)}"
    neg = -e
    return f"{render_rat(e.const)} {sc.rel.text} {_render_terms(neg.terms, namer)}"


def render_conjunction(c: Conjunction, namer: Namer) -> str:
    if not c.constraints:
        return "true"
    return ", ".join(render_constraint(k, namer) for k in c.constraints)
