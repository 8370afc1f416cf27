"""Fourier-Motzkin projection with LP-backed redundancy pruning.

Elimination is exact over the rationals: the projected conjunction describes
the real shadow of the input. Integrality of masked variables is not carried
through (no Omega test); callers re-attach domain constraints afterwards.
"""

from __future__ import annotations

from .linear import (
    FALSE,
    TRUE,
    UNSAT,
    Conjunction,
    LinearConstraint,
    LinExpr,
    Rat,
    Rel,
)
from .lp import LpStatus, Sense, is_satisfiable, optimize


def _mk(lhs: LinExpr, rel: Rel) -> LinearConstraint:
    """Collapse ground results to the canonical TRUE/FALSE forms."""
    if not lhs.terms:
        if rel is Rel.EQ:
            return TRUE if lhs.const == 0 else FALSE
        ok = lhs.const <= 0 if rel is Rel.LE else lhs.const < 0
        return TRUE if ok else FALSE
    return LinearConstraint(lhs, rel)


def eliminate_var(c: Conjunction, v: int) -> Conjunction:
    """Existentially quantify v out of c. Equalities pivot first; otherwise
    every (lower, upper) bound pair combines, strict iff either parent is."""
    if c.has_false:
        return UNSAT
    if all(k.lhs.coeff(v) == 0 for k in c):
        return c

    for pivot in c:
        if pivot.rel is Rel.EQ and pivot.lhs.coeff(v) != 0:
            a = pivot.lhs.coeff(v)
            rest = pivot.lhs.subs(v, LinExpr())
            repl = rest.scale(Rat(-1) / a)
            out = []
            for k in c:
                if k is pivot:
                    continue
                out.append(_mk(k.lhs.subs(v, repl), k.rel))
            return Conjunction.of(out)

    zeros, lowers, uppers = [], [], []
    for k in c:
        a = k.lhs.coeff(v)
        if a == 0:
            zeros.append(k)
        elif a > 0:
            uppers.append(k)
        else:
            lowers.append(k)
    out = list(zeros)
    for low in lowers:
        al = low.lhs.coeff(v)
        for up in uppers:
            au = up.lhs.coeff(v)
            lhs = up.lhs.scale(-al) + low.lhs.scale(au)
            rel = Rel.LT if Rel.LT in (low.rel, up.rel) else Rel.LE
            out.append(_mk(lhs, rel))
    return Conjunction.of(out)


def entailed(rest: Conjunction, k: LinearConstraint) -> bool:
    """Does every solution of `rest` satisfy k? Settled by optimizing k's
    left side over `rest`, minding strictness and attainment."""
    if k.is_ground:
        return k.is_true
    hi = optimize(k.lhs, rest, Sense.MAX)
    if hi.status is not LpStatus.OPTIMAL:
        return False
    if k.rel is Rel.LE:
        return hi.value <= 0
    if k.rel is Rel.LT:
        return hi.value < 0 or (hi.value == 0 and not hi.attained)
    lo = optimize(k.lhs, rest, Sense.MIN)
    return hi.value <= 0 and lo.status is LpStatus.OPTIMAL and lo.value >= 0


def remove_redundant(c: Conjunction) -> Conjunction:
    """Drop every member entailed by the others; the solution set is kept
    intact. An unsatisfiable input collapses to the single FALSE form."""
    work = [k for k in c if not k.is_true]
    if any(k.is_false for k in work):
        return UNSAT
    ok, _ = is_satisfiable(Conjunction.of(work))
    if not ok:
        return UNSAT
    i = 0
    while i < len(work):
        rest = Conjunction.of(work[:i] + work[i + 1:])
        if entailed(rest, work[i]):
            del work[i]
        else:
            i += 1
    return Conjunction.of(work)


def project(c: Conjunction, keep) -> Conjunction:
    """Shadow of c on the kept variables: eliminate the rest, lowest id
    first, pruning redundancy after every step."""
    keep = frozenset(keep)
    if c.has_false:
        return UNSAT
    out = remove_redundant(c)
    for v in sorted({x for k in c for x in k.lhs.variables if x not in keep}):
        if out.has_false:
            return UNSAT
        out = remove_redundant(eliminate_var(out, v))
    return out
