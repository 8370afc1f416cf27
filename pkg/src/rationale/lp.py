"""Exact-rational linear programming over one conjunction.

Two-phase primal simplex with Bland's rule on the closed relaxation, plus an
interior LP that maximizes the minimum slack of strict inequalities. Together
they answer: is the open solution set nonempty, what is the supremum/infimum
of an objective over it, and is that value attained.

Tableau arithmetic optionally runs on gmpy2.mpq (same exact semantics,
faster); results are always plain Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

from .linear import Conjunction, LinearConstraint, LinExpr, Rat, Rel, eval_expr

try:
    from gmpy2 import mpq as _mpq

    def _q(x: Fraction):
        return _mpq(x.numerator, x.denominator)

    def _fr(x) -> Fraction:
        return Fraction(int(x.numerator), int(x.denominator))

except ImportError:  # pragma: no cover - exercised only without gmpy2
    def _q(x: Fraction):
        return x

    def _fr(x) -> Fraction:
        return x


class Sense(Enum):
    MIN = "min"
    MAX = "max"


class LpStatus(Enum):
    INFEASIBLE = "infeasible"
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpResult:
    """Outcome of an exact LP solve.

    `value` is the optimum of the objective over the (open) solution set;
    None when infeasible or unbounded. `attained` tells whether some point of
    the open set achieves `value`. `witness` is a feasible point whenever one
    exists (strictly feasible; it achieves `value` exactly when attained).
    `ray` is an unboundedness certificate direction.
    """

    status: LpStatus
    value: Optional[Rat] = None
    attained: bool = False
    witness: Optional[dict[int, Rat]] = None
    ray: Optional[dict[int, Rat]] = None


INFEASIBLE = LpResult(LpStatus.INFEASIBLE)


class _Simplex:
    """One closed-relaxation solve: min objective subject to rows built from
    normalized constraints (strict treated as non-strict)."""

    def __init__(self, cons: list[LinearConstraint], objective: LinExpr):
        self.vars = sorted({v for k in cons for v in k.lhs.variables} | objective.variables)
        self.col_of = {v: 2 * i for i, v in enumerate(self.vars)}
        nstruct = 2 * len(self.vars)
        nslack = sum(1 for k in cons if k.rel is not Rel.EQ)
        self.nreal = nstruct + nslack

        rows: list[list] = []
        rhs: list = []
        zero = _q(Fraction(0))
        si = nstruct
        for k in cons:
            a = [zero] * self.nreal
            for v, qv in k.lhs.terms:
                c = self.col_of[v]
                qq = _q(qv)
                a[c] += qq
                a[c + 1] -= qq
            if k.rel is not Rel.EQ:
                a[si] = _q(Fraction(1))
                si += 1
            rows.append(a)
            rhs.append(_q(-k.lhs.const))
        self.rows = rows
        self.rhs = rhs
        self.objective = objective

    def solve(self):
        """Returns (status, witness dict, ray dict); witness/ray over var ids."""
        one = _q(Fraction(1))
        zero = _q(Fraction(0))
        m = len(self.rows)
        for i in range(m):
            if self.rhs[i] < 0:
                self.rows[i] = [-x for x in self.rows[i]]
                self.rhs[i] = -self.rhs[i]

        # Initial basis: a slack column that survived sign-flipping with +1,
        # otherwise a fresh artificial column.
        basis: list[int] = []
        art_cols: list[int] = []
        ncols = self.nreal
        for i in range(m):
            b = -1
            for j in range(2 * len(self.vars), self.nreal):
                if self.rows[i][j] == 1 and all(
                    self.rows[k][j] == 0 for k in range(m) if k != i
                ):
                    b = j
                    break
            if b < 0:
                for r in range(m):
                    self.rows[r].append(one if r == i else zero)
                b = ncols
                art_cols.append(ncols)
                ncols += 1
            basis.append(b)
        self.ncols = ncols

        if art_cols:
            cost = [zero] * ncols
            for j in art_cols:
                cost[j] = one
            cost, cval = self._reduced(cost, basis)
            status = self._iterate(cost, basis, cval)
            assert status[0] == "optimal"
            if status[1] != 0:
                return "infeasible", None, None
            # Drive leftover artificials out of the basis; drop redundant rows.
            keep = []
            for i in range(m):
                if basis[i] in art_cols:
                    piv = next(
                        (j for j in range(self.nreal) if self.rows[i][j] != 0), None
                    )
                    if piv is None:
                        continue
                    self._pivot(i, piv, basis, None)
                keep.append(i)
            self.rows = [self.rows[i] for i in keep]
            self.rhs = [self.rhs[i] for i in keep]
            basis = [basis[i] for i in keep]
            m = len(self.rows)
            for i in range(m):
                self.rows[i] = self.rows[i][: self.nreal]
            self.ncols = ncols = self.nreal

        cost = [zero] * ncols
        for v, qv in self.objective.terms:
            c = self.col_of[v]
            qq = _q(qv)
            cost[c] += qq
            cost[c + 1] -= qq
        cost, cval = self._reduced(cost, basis)
        status = self._iterate(cost, basis, cval)
        if status[0] == "unbounded":
            enter = status[1]
            direction = [zero] * ncols
            direction[enter] = one
            for i in range(m):
                direction[basis[i]] = -self.rows[i][enter]
            return "optimal", self._point(basis), self._as_vars(direction)
        return "optimal", self._point(basis), None

    def _point(self, basis) -> dict[int, Rat]:
        vals = {}
        for i, b in enumerate(basis):
            vals[b] = self.rhs[i]
        zero = Fraction(0)
        out = {}
        for v in self.vars:
            c = self.col_of[v]
            out[v] = _fr(vals.get(c, zero)) - _fr(vals.get(c + 1, zero))
        return out

    def _as_vars(self, direction) -> dict[int, Rat]:
        out = {}
        for v in self.vars:
            c = self.col_of[v]
            out[v] = _fr(direction[c]) - _fr(direction[c + 1])
        return out

    def _reduced(self, cost, basis):
        """Zero out the basic columns of the cost row; returns (row, -objval)."""
        cost = list(cost)
        cval = _q(Fraction(0))
        for i, b in enumerate(basis):
            if cost[b] != 0:
                f = cost[b]
                row = self.rows[i]
                for j in range(len(cost)):
                    cost[j] -= f * row[j]
                cval -= f * self.rhs[i]
        return cost, cval

    def _iterate(self, cost, basis, cval):
        """Bland's rule: repeatedly pivot on the lowest negative-cost column.
        Returns ("optimal", objective value) or ("unbounded", entering col)."""
        m = len(self.rows)
        while True:
            enter = -1
            for j in range(self.ncols):
                if cost[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return ("optimal", -cval)
            leave, best = -1, None
            for i in range(m):
                a = self.rows[i][enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]
                    ):
                        best = ratio
                        leave = i
            if leave < 0:
                return ("unbounded", enter)
            cval = self._pivot(leave, enter, basis, cost, cval)

    def _pivot(self, r, c, basis, cost, cval=None):
        row = self.rows[r]
        p = row[c]
        if p != 1:
            inv = 1 / p
            self.rows[r] = row = [x * inv for x in row]
            self.rhs[r] = self.rhs[r] * inv
        for i in range(len(self.rows)):
            if i == r:
                continue
            f = self.rows[i][c]
            if f != 0:
                other = self.rows[i]
                self.rows[i] = [x - f * y for x, y in zip(other, row)]
                self.rhs[i] = self.rhs[i] - f * self.rhs[r]
        if cost is not None:
            f = cost[c]
            if f != 0:
                for j in range(len(cost)):
                    cost[j] -= f * row[j]
                cval = cval - f * self.rhs[r]
        basis[r] = c
        return cval


def _closed_solve(objective: LinExpr, cons: list[LinearConstraint], sense: Sense):
    obj = objective if sense is Sense.MIN else -objective
    status, witness, ray = _Simplex(cons, obj).solve()
    return status, witness, ray


def _prepare(c: Conjunction) -> Optional[list[LinearConstraint]]:
    """Drop TRUE members; None when a FALSE member makes it all moot."""
    out = []
    for k in c:
        if k.is_true:
            continue
        if k.is_false:
            return None
        out.append(k)
    return out


_DELTA_CAP = Rat(1)


def _with_interior_slack(cons: list[LinearConstraint], reserved: int = -1):
    """Closed system over an extra variable d: strict rows become lhs + d <= 0,
    plus d <= 1. Maximizing d probes how deep the open region is. `reserved`
    keeps d clear of variable ids used elsewhere (e.g. the objective)."""
    top = max((v for k in cons for v in k.lhs.variables), default=-1)
    d = max(top, reserved) + 1
    dexpr = LinExpr.var(d)
    rows = []
    for k in cons:
        if k.rel is Rel.LT:
            rows.append(LinearConstraint(k.lhs + dexpr, Rel.LE))
        else:
            rows.append(k)
    rows.append(LinearConstraint(dexpr - LinExpr.constant(_DELTA_CAP), Rel.LE))
    return rows, d


def _strip(point: Optional[dict[int, Rat]], d: int) -> Optional[dict[int, Rat]]:
    if point is None:
        return None
    return {v: q for v, q in point.items() if v != d}


def is_satisfiable(c: Conjunction) -> tuple[bool, Optional[dict[int, Rat]]]:
    """Does the conjunction have a rational solution honoring strictness?
    Returns a strictly feasible witness when yes."""
    cons = _prepare(c)
    if cons is None:
        return False, None
    if not cons:
        return True, {}
    if not any(k.rel is Rel.LT for k in cons):
        status, witness, _ = _closed_solve(LinExpr(), cons, Sense.MIN)
        return (True, witness) if status == "optimal" else (False, None)
    rows, d = _with_interior_slack(cons)
    status, witness, _ = _closed_solve(LinExpr.var(d), rows, Sense.MAX)
    if status != "optimal" or witness[d] <= 0:
        return False, None
    return True, _strip(witness, d)


def optimize(objective: LinExpr, c: Conjunction, sense: Sense) -> LpResult:
    """Exact supremum/infimum of the objective over the open solution set,
    with attainment flag and witness."""
    cons = _prepare(c)
    if cons is None:
        return INFEASIBLE
    strict = [k for k in cons if k.rel is Rel.LT]

    if not strict:
        status, witness, ray = _closed_solve(objective, cons, sense)
        if status == "infeasible":
            return INFEASIBLE
        if ray is not None:
            return LpResult(LpStatus.UNBOUNDED, witness=witness, ray=ray)
        return LpResult(
            LpStatus.OPTIMAL, eval_expr(objective, witness), True, witness
        )

    rows, d = _with_interior_slack(cons, max(objective.variables, default=-1))
    status, interior, _ = _closed_solve(LinExpr.var(d), rows, Sense.MAX)
    if status != "optimal" or interior[d] <= 0:
        return INFEASIBLE
    inner = _strip(interior, d)
    for v in objective.variables:
        inner.setdefault(v, Rat(0))

    status, closed_w, ray = _closed_solve(objective, cons, sense)
    assert status == "optimal"
    if ray is not None:
        return LpResult(LpStatus.UNBOUNDED, witness=inner, ray=ray)
    best = eval_expr(objective, closed_w)

    # Attainment: can a strictly feasible point sit on the optimal face?
    face = rows + [LinearConstraint(objective - LinExpr.constant(best), Rel.EQ)]
    fstatus, fwitness, _ = _closed_solve(LinExpr.var(d), face, Sense.MAX)
    if fstatus == "optimal" and fwitness[d] > 0:
        return LpResult(LpStatus.OPTIMAL, best, True, _strip(fwitness, d))
    return LpResult(LpStatus.OPTIMAL, best, False, inner)
