"""Interactive constraint reasoning over decision-tree classifiers.

Exact rational arithmetic end to end: linear constraint theories, decision
trees embedded as path constraints, satisfiability and optimization by exact
simplex / branch and bound, variable elimination for projection, and a
session layer that answers why / why-not / closest-contrastive queries.
"""

from .errors import InputError, RationaleError, SolveBudgetExceeded, UnboundVariableError
from .linear import (
    Conjunction,
    LinearConstraint,
    LinExpr,
    Rat,
    Rel,
    Theory,
    parse_rat,
    render_rat,
)

from .session import (
    Answer,
    Session,
    render_answer_json,
    render_answer_text,
)

__all__ = [
    "Answer",
    "Conjunction",
    "InputError",
    "LinExpr",
    "LinearConstraint",
    "Rat",
    "RationaleError",
    "Rel",
    "Session",
    "SolveBudgetExceeded",
    "Theory",
    "UnboundVariableError",
    "parse_rat",
    "render_answer_json",
    "render_answer_text",
    "render_rat",
]
