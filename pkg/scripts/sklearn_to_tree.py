#!/usr/bin/env python3
"""Convert a fitted scikit-learn decision tree into the JSON tree document.

Usage:
    python3 scripts/sklearn_to_tree.py model.pkl --model-id credit \
        --features age,income,hoursperweek -o credit_tree.json

The input file holds a pickled fitted DecisionTreeClassifier (joblib or
plain pickle). Thresholds are written as exact p/q strings reproducing the
stored float64 values bit for bit, so the engine splits points exactly where
the source model does. Left children take <=, right children take >, which
is scikit-learn's convention and the document's.

Only numeric splits convert. scikit-learn has no native nominal splits (it
sees one-hot columns as plain numbers), so split_eq nodes must be authored
in the document format directly.
"""

from __future__ import annotations

import argparse
import json
import pickle
import sys
from fractions import Fraction
from typing import Sequence


def rat_str(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def convert(clf, model_id: str, features: Sequence[str]) -> dict:
    """Build the tree document for a fitted classifier.

    `features` maps column indices to feature names, in training order.
    """
    tree = clf.tree_
    classes = [str(c) for c in clf.classes_]

    def node(i: int) -> dict:
        left = int(tree.children_left[i])
        if left == -1:
            counts = tree.value[i][0]
            k = int(counts.argmax())
            conf = Fraction(float(counts[k])) / Fraction(float(counts.sum()))
            return {"leaf": {"class": classes[k], "confidence": rat_str(conf)}}
        feat = int(tree.feature[i])
        if feat >= len(features):
            raise SystemExit(f"error: split on column {feat} but only "
                             f"{len(features)} feature names given")
        thr = Fraction(float(tree.threshold[i]))
        return {
            "split": {
                "terms": [{"feature": features[feat], "coef": 1}],
                "op": "le",
                "threshold": rat_str(thr),
            },
            "left": node(left),
            "right": node(int(tree.children_right[i])),
        }

    return {"model_id": model_id, "node": node(0)}


def load_model(path: str):
    try:
        import joblib

        return joblib.load(path)
    except ImportError:
        with open(path, "rb") as fh:
            return pickle.load(fh)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("model", help="pickled fitted DecisionTreeClassifier")
    ap.add_argument("--model-id", required=True)
    ap.add_argument(
        "--features",
        help="comma-separated column names; defaults to feature_names_in_",
    )
    ap.add_argument("-o", "--output", help="output path (default: stdout)")
    args = ap.parse_args(argv)

    clf = load_model(args.model)
    if args.features:
        features = [f.strip() for f in args.features.split(",")]
    elif hasattr(clf, "feature_names_in_"):
        features = [str(f) for f in clf.feature_names_in_]
    else:
        raise SystemExit("error: model has no feature_names_in_; pass --features")

    doc = convert(clf, args.model_id, features)
    text = json.dumps(doc, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
