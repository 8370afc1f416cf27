"""Branch and bound over the exact LP solver for integer-masked variables.

Strict inequalities whose support is entirely integral are tightened to
closed integer bounds up front (2x < 1 over integers becomes x <= 0), so
openness only survives where continuous variables are involved; there the
infimum may be unattained and the result says so.

Unboundedness is settled the rational-MILP way: an unbounded relaxation plus
any integral feasible point means the integer problem is unbounded too,
because scaling the rational recession direction by a common denominator
yields integral improving steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import RationaleError
from .linear import (
    FALSE,
    Conjunction,
    LinearConstraint,
    LinExpr,
    Rat,
    Rel,
    scaled,
)
from .lp import LpStatus, Sense, is_satisfiable, optimize


@dataclass(frozen=True)
class MilpResult:
    """Exact mixed-integer outcome. `value` is the optimum (infimum/supremum
    over points integral on the masked variables); `attained` mirrors the LP
    convention: when False, the witness is a feasible integral point that
    approaches but does not achieve `value`. `nodes` counts solved
    branch-and-bound nodes."""

    status: LpStatus
    value: Optional[Rat] = None
    attained: bool = False
    witness: Optional[dict[int, Rat]] = None
    nodes: int = 0


def check_solution(c: Conjunction, int_vars, point: dict[int, Rat]) -> bool:
    """Independent witness check: exact constraint satisfaction (strictness
    included) plus integrality on masked variables. No solver state involved."""
    if not c.satisfied_at(point):
        return False
    return all(point[v].denominator == 1 for v in int_vars if v in point)


def tighten_integer_strictness(c: Conjunction, int_vars: frozenset[int]) -> Conjunction:
    """Round constraints whose support is all-integral to integer bounds.

    lhs < t becomes lhs <= ceil(t)-1, lhs <= t becomes lhs <= floor(t), and
    an equality with fractional right side becomes FALSE. Solution sets over
    integral points are unchanged; the LP relaxation only shrinks.
    """
    out = []
    for k in c:
        if k.is_ground or not k.lhs.variables <= int_vars:
            out.append(k)
            continue
        s = scaled(k)
        t = -s.lhs.const
        if s.rel is Rel.EQ:
            if t.denominator != 1:
                return Conjunction((FALSE,))
            out.append(s)
            continue
        bound = math.ceil(t) - 1 if s.rel is Rel.LT else math.floor(t)
        out.append(LinearConstraint(LinExpr(s.lhs.terms, Rat(-bound)), Rel.LE))
    return Conjunction.of(out)


def _branch_var(witness: dict[int, Rat], int_vars) -> Optional[int]:
    """Most fractional masked variable; ties go to the lowest id."""
    best, pick = None, None
    for v in sorted(int_vars):
        q = witness.get(v)
        if q is None or q.denominator == 1:
            continue
        frac = q - math.floor(q)
        score = min(frac, 1 - frac)
        if best is None or score > best:
            best, pick = score, v
    return pick


class _Boxes:
    """Lazily computed integer ranges of masked variables over the root
    relaxation; branching needs them to stay finite."""

    def __init__(self, base: Conjunction):
        self.base = base
        self.cache: dict[int, tuple[int, int]] = {}

    def get(self, v: int) -> tuple[int, int]:
        if v not in self.cache:
            x = LinExpr.var(v)
            lo = optimize(x, self.base, Sense.MIN)
            hi = optimize(x, self.base, Sense.MAX)
            if lo.status is not LpStatus.OPTIMAL or hi.status is not LpStatus.OPTIMAL:
                raise RationaleError(
                    f"integer variable {v} has an unbounded relaxation; "
                    "bound it (domain constraints do this in engine flows)"
                )
            self.cache[v] = (math.ceil(lo.value), math.floor(hi.value))
        return self.cache[v]


def _le(v: int, k: int) -> LinearConstraint:
    return LinearConstraint(LinExpr.var(v) - LinExpr.constant(Rat(k)), Rel.LE)


def _ge(v: int, k: int) -> LinearConstraint:
    return LinearConstraint(LinExpr.constant(Rat(k)) - LinExpr.var(v), Rel.LE)


def _feasibility_dfs(base: Conjunction, int_vars, boxes: _Boxes):
    """First integral-on-masked point of the open solution set, DFS floor-first.
    Returns (witness or None, nodes solved)."""
    stack: list[tuple] = [()]
    nodes = 0
    while stack:
        extra = stack.pop()
        nodes += 1
        ok, w = is_satisfiable(Conjunction(base.constraints + extra))
        if not ok:
            continue
        bv = _branch_var(w, int_vars)
        if bv is None:
            return w, nodes
        boxes.get(bv)
        fl = math.floor(w[bv])
        stack.append(extra + (_ge(bv, fl + 1),))
        stack.append(extra + (_le(bv, fl),))
    return None, nodes


def milp_feasible(c: Conjunction, int_vars) -> tuple[bool, Optional[dict[int, Rat]]]:
    """Does the conjunction have a solution integral on the masked variables?"""
    int_vars = frozenset(int_vars)
    base = tighten_integer_strictness(c, int_vars)
    if base.has_false:
        return False, None
    w, _ = _feasibility_dfs(base, int_vars, _Boxes(base))
    return (True, w) if w is not None else (False, None)


def solve_milp(objective: LinExpr, c: Conjunction, int_vars, sense: Sense) -> MilpResult:
    """Exact optimum over points rational on free variables and integral on
    `int_vars`. Deterministic: most-fractional branching (ties to the lowest
    id), floor branch explored first on fractional splits, witness side first
    on certification splits, exact incumbent pruning."""
    int_vars = frozenset(int_vars)
    base = tighten_integer_strictness(c, int_vars)
    if base.has_false:
        return MilpResult(LpStatus.INFEASIBLE)
    boxes = _Boxes(base)
    relevant = sorted(int_vars & ({v for k in base for v in k.lhs.variables} | objective.variables))

    nodes = 0
    incumbent: Optional[tuple[Rat, bool, dict[int, Rat]]] = None
    # Node: (extra bound constraints, {var: (lo, hi)} from branching)
    stack: list[tuple[tuple, dict]] = [((), {})]
    while stack:
        extra, nb = stack.pop()
        nodes += 1
        r = optimize(objective, Conjunction(base.constraints + extra), sense)
        if r.status is LpStatus.INFEASIBLE:
            continue
        if r.status is LpStatus.UNBOUNDED:
            w, extra_nodes = _feasibility_dfs(
                Conjunction(base.constraints + extra), int_vars, boxes
            )
            nodes += extra_nodes
            if w is not None:
                return MilpResult(LpStatus.UNBOUNDED, None, False, w, nodes)
            continue
        if incumbent is not None:
            worse = r.value > incumbent[0] if sense is Sense.MIN else r.value < incumbent[0]
            if worse or (r.value == incumbent[0] and incumbent[1]):
                continue

        bv = _branch_var(r.witness, int_vars)
        if bv is not None:
            boxes.get(bv)
            fl = math.floor(r.witness[bv])
            stack.append((extra + (_ge(bv, fl + 1),), {**nb, bv: _meet(nb.get(bv), fl + 1, None)}))
            stack.append((extra + (_le(bv, fl),), {**nb, bv: _meet(nb.get(bv), None, fl)}))
            continue

        if r.attained:
            incumbent = _better(incumbent, (r.value, True, r.witness), sense)
            continue

        # Unattained optimum with an integral relaxation witness: the bound
        # is only certified once every relevant masked variable is pinned by
        # an explicit node constraint; integer-hull bounds alone still let
        # the relaxation roam fractionally.
        uv = None
        for v in relevant:
            pinned = nb.get(v)
            if pinned is None or pinned[0] is None or pinned[0] != pinned[1]:
                uv = v
                break
        if uv is None:
            incumbent = _better(incumbent, (r.value, False, r.witness), sense)
            continue
        lo, hi = _bounds(uv, nb, boxes)
        if lo > hi:
            continue
        if lo == hi:
            pin = LinearConstraint(LinExpr.var(uv) - LinExpr.constant(Rat(lo)), Rel.EQ)
            stack.append((extra + (pin,), {**nb, uv: (lo, lo)}))
            continue
        wv = min(max(int(r.witness.get(uv, lo)), lo), hi)
        s = min(wv, hi - 1)
        below = (extra + (_le(uv, s),), {**nb, uv: _meet(nb.get(uv), None, s)})
        above = (extra + (_ge(uv, s + 1),), {**nb, uv: _meet(nb.get(uv), s + 1, None)})
        # The child holding the witness keeps the node bound; explore it first
        # so a fully pinned certificate lands early and prunes the siblings.
        first, second = (below, above) if wv <= s else (above, below)
        stack.append(second)
        stack.append(first)

    if incumbent is None:
        return MilpResult(LpStatus.INFEASIBLE, nodes=nodes)
    value, attained, witness = incumbent
    return MilpResult(LpStatus.OPTIMAL, value, attained, witness, nodes)


def _meet(cur: Optional[tuple], lo: Optional[int], hi: Optional[int]) -> tuple:
    clo, chi = cur if cur is not None else (None, None)
    if lo is not None:
        clo = lo if clo is None else max(clo, lo)
    if hi is not None:
        chi = hi if chi is None else min(chi, hi)
    return (clo, chi)


def _bounds(v: int, nb: dict, boxes: _Boxes) -> tuple[int, int]:
    clo, chi = nb.get(v, (None, None))
    if clo is None or chi is None:
        blo, bhi = boxes.get(v)
        clo = blo if clo is None else max(clo, blo)
        chi = bhi if chi is None else min(chi, bhi)
    return clo, chi


def _better(cur, cand, sense: Sense):
    if cur is None:
        return cand
    if cand[0] != cur[0]:
        improves = cand[0] < cur[0] if sense is Sense.MIN else cand[0] > cur[0]
        return cand if improves else cur
    if cand[1] and not cur[1]:
        return cand
    return cur
