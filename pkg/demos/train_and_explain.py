#!/usr/bin/env python3
"""Train a small scikit-learn tree on synthetic loan data, convert it with
the sidecar script, then ask the engine why an applicant was denied and what
the cheapest approval looks like."""

import importlib.util
import sys
from pathlib import Path

import numpy as np
from sklearn.tree import DecisionTreeClassifier

from rationale import Session, render_answer_text

ROOT = Path(__file__).parent.parent
spec = importlib.util.spec_from_file_location(
    "sklearn_to_tree", ROOT / "scripts" / "sklearn_to_tree.py"
)
converter = importlib.util.module_from_spec(spec)
spec.loader.exec_module(converter)


def main() -> int:
    rng = np.random.default_rng(7)
    age = rng.integers(18, 71, size=600)
    income = rng.integers(10, 101, size=600) * 1000
    X = np.column_stack([age, income]).astype(float)
    y = np.where(income + 800 * age > 64000, "approve", "deny")
    clf = DecisionTreeClassifier(max_depth=3, random_state=0).fit(X, y)

    doc = converter.convert(clf, "loan", ["age", "income"])
    meta = {
        "features": [
            {"name": "age", "kind": "ordinal", "min": 18, "max": 70},
            {"name": "income", "kind": "continuous", "min": 10000, "max": 100000},
        ]
    }

    denied = next(
        row for row in X if clf.predict(row.reshape(1, -1))[0] == "deny"
    )
    a, i = int(denied[0]), int(denied[1])
    print(f"applicant: age={a}, income={i}, model says "
          f"{clf.predict(denied.reshape(1, -1))[0]}")

    s = Session(meta)
    s.model(doc)
    s.instance("F", "loan", "deny")

    print("\ndenial regions:")
    print(render_answer_text(s.solveopt(project=["F"])), end="")

    s.constraint(f"F.age = {a}, F.income = {i}")
    s.instance("CE", "loan", "approve")

    print("cheapest approval:")
    print(render_answer_text(
        s.solveopt(project=["CE"], minimize="l1norm(F, CE)")), end="")

    print("cheapest approval without working more years:")
    s.constraint("CE.age <= F.age")
    print(render_answer_text(
        s.solveopt(project=["CE"], minimize="l1norm(F, CE)")), end="")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
