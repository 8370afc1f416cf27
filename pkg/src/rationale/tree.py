"""Decision trees: interchange-format parsing, root-to-leaf path enumeration,
and an exact prediction oracle.

Branch convention: the left child of a linear split means expr <= threshold,
the right child means expr > threshold (strict). The left child of a nominal
equality split means feature = value, the right child feature != value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .errors import InputError, UnboundVariableError
from .features import CONTINUOUS, NOMINAL, FeatureMeta, VarLayout
from .linear import Conjunction, LinearConstraint, LinExpr, Rat, negate, normalize, parse_rat

Node = Union["Leaf", "Split", "SplitEq"]


@dataclass(frozen=True)
class Leaf:
    label: str
    confidence: Rat


@dataclass(frozen=True)
class Split:
    """Linear split: sum of coef*feature <= threshold goes left."""

    terms: tuple[tuple[str, Rat], ...]
    threshold: Rat
    left: Node
    right: Node


@dataclass(frozen=True)
class SplitEq:
    """Nominal equality split: feature = value goes left."""

    feature: str
    value: str
    left: Node
    right: Node


@dataclass(frozen=True)
class DecisionTree:
    model_id: str
    root: Node


@dataclass(frozen=True)
class PathFact:
    """One root-to-leaf path: the split conditions in root order, over one
    instance's variables, plus the leaf's class label and confidence."""

    model_id: str
    constraints: Conjunction
    label: str
    confidence: Rat


def _err(path: str, msg: str) -> InputError:
    return InputError(f"{path}: {msg}", kind="tree")


def _exact(x, path: str) -> Rat:
    if isinstance(x, bool):
        raise _err(path, "expected a number string, got a boolean")
    if isinstance(x, int):
        return Rat(x)
    if isinstance(x, str):
        try:
            return parse_rat(x)
        except InputError as e:
            raise _err(path, str(e)) from None
    if isinstance(x, float):
        raise _err(path, 'floats are inexact; use a string like "45" or "1/3"')
    raise _err(path, f"expected a number string, got {type(x).__name__}")


def _parse_node(obj, metas: dict[str, FeatureMeta], path: str) -> Node:
    if not isinstance(obj, dict):
        raise _err(path, "expected an object")
    kinds = [k for k in ("leaf", "split", "split_eq") if k in obj]
    if len(kinds) != 1:
        raise _err(path, 'expected exactly one of "leaf", "split", "split_eq"')
    kind = kinds[0]
    if kind == "leaf":
        if set(obj) != {"leaf"}:
            raise _err(path, f"unknown keys {sorted(set(obj) - {'leaf'})}")
        body = obj["leaf"]
        if not isinstance(body, dict) or set(body) != {"class", "confidence"}:
            raise _err(path, 'leaf needs exactly "class" and "confidence"')
        label = body["class"]
        if not isinstance(label, str) or not label:
            raise _err(path, "leaf class must be a nonempty string")
        conf = _exact(body["confidence"], path + ".confidence")
        if not (0 <= conf <= 1):
            raise _err(path, f"confidence {conf} outside [0, 1]")
        return Leaf(label, conf)

    if set(obj) != {kind, "left", "right"}:
        raise _err(path, f'{kind} node needs exactly "{kind}", "left", "right"')
    body = obj[kind]
    if not isinstance(body, dict):
        raise _err(path, f"{kind} must be an object")
    left = _parse_node(obj["left"], metas, path + ".left")
    right = _parse_node(obj["right"], metas, path + ".right")

    if kind == "split_eq":
        if set(body) != {"feature", "value"}:
            raise _err(path, 'split_eq needs exactly "feature" and "value"')
        feat, value = body["feature"], body["value"]
        if feat not in metas:
            raise _err(path, f"unknown feature {feat!r}")
        m = metas[feat]
        if m.kind != NOMINAL:
            raise _err(path, f"split_eq needs a nominal feature; {feat!r} is {m.kind}")
        if value not in m.values:
            raise _err(path, f"{feat!r} has no value {value!r}")
        return SplitEq(feat, value, left, right)

    if set(body) != {"terms", "op", "threshold"}:
        raise _err(path, 'split needs exactly "terms", "op", "threshold"')
    if body["op"] != "le":
        raise _err(path, f'split op must be "le", got {body["op"]!r}')
    raw_terms = body["terms"]
    if not isinstance(raw_terms, list) or not raw_terms:
        raise _err(path, "split needs a nonempty terms list")
    terms: list[tuple[str, Rat]] = []
    seen: set[str] = set()
    for j, t in enumerate(raw_terms):
        tp = f"{path}.terms[{j}]"
        if not isinstance(t, dict) or set(t) != {"feature", "coef"}:
            raise _err(tp, 'term needs exactly "feature" and "coef"')
        feat = t["feature"]
        if feat not in metas:
            raise _err(tp, f"unknown feature {feat!r}")
        if metas[feat].kind == NOMINAL:
            raise _err(tp, f"nominal feature {feat!r} cannot appear in a linear split")
        if feat in seen:
            raise _err(tp, f"duplicate feature {feat!r}")
        seen.add(feat)
        coef = _exact(t["coef"], tp + ".coef")
        if coef == 0:
            raise _err(tp, "zero coefficient")
        terms.append((feat, coef))
    if len(terms) > 1:
        for feat, _ in terms:
            if metas[feat].kind != CONTINUOUS:
                raise _err(path, f"multi-term splits allow continuous features only; {feat!r} is {metas[feat].kind}")
    threshold = _exact(body["threshold"], path + ".threshold")
    return Split(tuple(terms), threshold, left, right)


def parse_tree(doc, metas) -> DecisionTree:
    """Validate a tree interchange document (decoded JSON) against metadata."""
    if not isinstance(doc, dict):
        raise InputError("tree document must be an object", kind="tree")
    if set(doc) != {"model_id", "node"}:
        raise InputError('tree document needs exactly "model_id" and "node"', kind="tree")
    model_id = doc["model_id"]
    if not isinstance(model_id, str) or not model_id:
        raise InputError("model_id must be a nonempty string", kind="tree")
    by_name = {m.name: m for m in metas}
    return DecisionTree(model_id, _parse_node(doc["node"], by_name, "node"))


def count_nodes(t: DecisionTree) -> int:
    def walk(n: Node) -> int:
        if isinstance(n, Leaf):
            return 1
        return 1 + walk(n.left) + walk(n.right)

    return walk(t.root)


def enumerate_paths(t: DecisionTree, layout: VarLayout, instance: str) -> list[PathFact]:
    """One PathFact per leaf, depth-first left-first, over `instance`'s variables."""
    facts: list[PathFact] = []

    def split_constraint(n: Split) -> LinearConstraint:
        expr = LinExpr.of({layout.numeric[(instance, f)]: c for f, c in n.terms})
        return normalize(expr, "<=", n.threshold)

    def walk(n: Node, acc: list[LinearConstraint]) -> None:
        if isinstance(n, Leaf):
            facts.append(PathFact(t.model_id, Conjunction.of(acc), n.label, n.confidence))
            return
        if isinstance(n, Split):
            c = split_constraint(n)
            walk(n.left, acc + [c])
            walk(n.right, acc + [negate(c)])
            return
        v = dict(layout.onehot[(instance, n.feature)])[n.value]
        walk(n.left, acc + [normalize(LinExpr.var(v), "=", 1)])
        walk(n.right, acc + [normalize(LinExpr.var(v), "=", 0)])

    walk(t.root, [])
    return facts


def predict(t: DecisionTree, values: Mapping) -> tuple[str, Rat]:
    """Follow splits by exact evaluation; boundary points go left."""
    n = t.root
    while not isinstance(n, Leaf):
        if isinstance(n, Split):
            total = Rat(0)
            for feat, coef in n.terms:
                if feat not in values:
                    raise UnboundVariableError(feat)
                total += coef * Rat(values[feat])
            n = n.left if total <= n.threshold else n.right
        else:
            if n.feature not in values:
                raise UnboundVariableError(n.feature)
            n = n.left if values[n.feature] == n.value else n.right
    return n.label, n.confidence
