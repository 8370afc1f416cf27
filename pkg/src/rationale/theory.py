"""Theories and the operator language evaluated over them.

A theory is an ordered tuple of conjunctions read disjunctively. Leaves:
TYPEC (domain constraints), USERC (user constraints), INST(name) (one member
per decision-tree path matching the instance's declared label). Operators:
CROSS, SAT, PROJECT, MINIMIZE. Evaluation is eager and member order is
deterministic, so equal sessions produce byte-equal answers.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .distance import DistanceSpec, build_objective
from .errors import InputError, RationaleError, SolveBudgetExceeded
from .features import VarLayout, implicit_constraints
from .fm import project
from .linear import Conjunction, Rat, Theory, scaled
from .lp import LpStatus, Sense
from .milp import milp_feasible, solve_milp
from .tree import DecisionTree, enumerate_paths


@dataclass(frozen=True)
class InstanceDecl:
    """An instance bound to a model and a required outcome."""

    model: DecisionTree
    label: str
    minconf: Optional[Rat] = None


@dataclass(frozen=True)
class Snapshot:
    """Immutable view of session state the evaluator reads."""

    layout: VarLayout
    user_constraints: tuple[Conjunction, ...] = ()
    instances: Mapping[str, InstanceDecl] = field(default_factory=dict)


class TypeC:
    def __repr__(self):
        return "TYPEC"


class UserC:
    def __repr__(self):
        return "USERC"


TYPEC = TypeC()
USERC = UserC()


@dataclass(frozen=True)
class Inst:
    name: str


@dataclass(frozen=True)
class Cross:
    left: object
    right: object


@dataclass(frozen=True)
class Sat:
    inner: object


@dataclass(frozen=True)
class Project:
    inner: object
    keep: frozenset


@dataclass(frozen=True)
class Minimize:
    inner: object
    spec: DistanceSpec


class Budget:
    """Wall-clock allowance for one solve. `spend` is called once per
    member-level solver run and raises once the allowance is gone, carrying
    how many runs completed."""

    def __init__(self, seconds: float):
        self.deadline = time.monotonic() + seconds
        self.solved = 0

    def spend(self):
        if time.monotonic() > self.deadline:
            raise SolveBudgetExceeded(self.solved)
        self.solved += 1


@dataclass(frozen=True)
class MinOutcome:
    """Global optimum with the members that reach it. Empty (value None)
    when no member is feasible. `attained` is False when the optimum is an
    infimum only approached; witnesses are feasible integral points either
    way."""

    value: Optional[Rat] = None
    members: tuple[tuple[Conjunction, dict[int, Rat]], ...] = ()
    attained: bool = False


def theory_typec(snap: Snapshot) -> Theory:
    return Theory.of([implicit_constraints(snap.layout)])


def theory_userc(snap: Snapshot) -> Theory:
    merged = Conjunction()
    for c in snap.user_constraints:
        merged = merged.conjoin(c)
    return Theory.of([merged])


def theory_inst(snap: Snapshot, name: str) -> Theory:
    decl = snap.instances.get(name)
    if decl is None:
        raise InputError(f"unknown instance '{name}'", kind="instance")
    members = []
    for pf in enumerate_paths(decl.model, snap.layout, name):
        if pf.label != decl.label:
            continue
        if decl.minconf is not None and pf.confidence < decl.minconf:
            continue
        members.append(pf.constraints)
    return Theory.of(members)


def cross_product(t1: Theory, t2: Theory) -> Theory:
    return Theory.of([a.conjoin(b) for a in t1 for b in t2])


def satisfiable(t: Theory, mask: frozenset = frozenset(),
                budget: Optional[Budget] = None) -> Theory:
    """Members with at least one solution integral on the masked variables."""
    out = []
    for c in t:
        if budget is not None:
            budget.spend()
        if milp_feasible(c, mask)[0]:
            out.append(c)
    return Theory.of(out)


def _member_key(c: Conjunction):
    return tuple((scaled(k).lhs.terms, scaled(k).lhs.const, scaled(k).rel) for k in c)


def project_theory(t: Theory, keep) -> Theory:
    """Member-wise shadow; syntactically identical projections collapse."""
    keep = frozenset(keep)
    out = []
    seen = set()
    for c in t:
        p = project(c, keep)
        key = _member_key(p)
        if key in seen:
            continue
        seen.add(key)
        out.append(p)
    return Theory.of(out)


def minimize_theory(t: Theory, spec: DistanceSpec, layout: VarLayout,
                    budget: Optional[Budget] = None) -> MinOutcome:
    """Per-member exact MILP minimization; survivors are the members whose
    optimum equals the global one, paired with integral witnesses restricted
    to layout variables."""
    build = build_objective(spec, layout)
    results = []
    for c in t:
        if budget is not None:
            budget.spend()
        r = solve_milp(
            build.objective,
            c.conjoin(build.side),
            layout.mask | build.int_vars,
            Sense.MIN,
        )
        if r.status is LpStatus.INFEASIBLE:
            continue
        if r.status is not LpStatus.OPTIMAL:
            raise RationaleError("distance objective cannot be unbounded")
        witness = {v: q for v, q in r.witness.items() if v < layout.num_vars}
        results.append((c, r.value, r.attained, witness))
    if not results:
        return MinOutcome()
    best = min(v for _, v, _, _ in results)
    members = tuple((c, w) for c, v, _, w in results if v == best)
    attained = any(a for _, v, a, _ in results if v == best)
    return MinOutcome(best, members, attained)


def evaluate(expr, snap: Snapshot, budget: Optional[Budget] = None):
    """Bottom-up evaluation. MINIMIZE is only legal at the root because its
    result is a MinOutcome, not a theory."""
    if isinstance(expr, Minimize):
        return minimize_theory(
            _eval(expr.inner, snap, budget), expr.spec, snap.layout, budget
        )
    return _eval(expr, snap, budget)


def _eval(expr, snap: Snapshot, budget: Optional[Budget] = None) -> Theory:
    if isinstance(expr, TypeC):
        return theory_typec(snap)
    if isinstance(expr, UserC):
        return theory_userc(snap)
    if isinstance(expr, Inst):
        return theory_inst(snap, expr.name)
    if isinstance(expr, Cross):
        return cross_product(_eval(expr.left, snap, budget), _eval(expr.right, snap, budget))
    if isinstance(expr, Sat):
        return satisfiable(_eval(expr.inner, snap, budget), snap.layout.mask, budget)
    if isinstance(expr, Project):
        return project_theory(_eval(expr.inner, snap, budget), expr.keep)
    if isinstance(expr, Minimize):
        raise RationaleError("minimize may only appear at the root of a query")
    raise RationaleError(f"unknown theory expression {expr!r}")
