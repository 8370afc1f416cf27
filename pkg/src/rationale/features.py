"""Feature metadata, solver variable layout, implicit domain constraints,
and decoding of answer constraints back to named form.

Nominal features are one-hot encoded: feature f with values v1..vk owns k
0/1 variables per instance. Ordinals are single bounded integer variables,
continuous features single real variables. The id mapping is positional:
instances in declaration order, features in metadata order, nominal values
in domain order, ids contiguous from 0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import InputError, RationaleError
from .linear import (
    Conjunction,
    LinearConstraint,
    LinExpr,
    Rat,
    normalize,
    parse_rat,
    render_constraint,
    render_rat,
)

IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

CONTINUOUS = "continuous"
ORDINAL = "ordinal"
NOMINAL = "nominal"


@dataclass(frozen=True)
class FeatureMeta:
    """One feature's name, kind, and domain.

    Ordinals carry a closed integer interval [lo, hi]. Continuous features
    may carry [lo, hi] used only for distance normalization, never as a
    domain constraint. Nominals carry an ordered tuple of distinct values.
    """

    name: str
    kind: str
    lo: Rat | None = None
    hi: Rat | None = None
    values: tuple[str, ...] = ()


def _err(msg: str) -> InputError:
    return InputError(msg, kind="metadata")


def _exact_number(x, where: str) -> Rat:
    if isinstance(x, bool):
        raise _err(f"{where}: expected a number, got a boolean")
    if isinstance(x, int):
        return Rat(x)
    if isinstance(x, str):
        try:
            return parse_rat(x)
        except InputError as e:
            raise _err(f"{where}: {e}") from None
    if isinstance(x, float):
        raise _err(f"{where}: floats are inexact; use an integer or a string like \"39.5\" or \"79/2\"")
    raise _err(f"{where}: expected a number, got {type(x).__name__}")


def parse_metadata(doc) -> tuple[FeatureMeta, ...]:
    """Validate a metadata document (decoded JSON) into FeatureMeta records."""
    if not isinstance(doc, dict):
        raise _err("metadata document must be an object")
    extra = set(doc) - {"features"}
    if extra:
        raise _err(f"unknown metadata keys: {sorted(extra)}")
    feats = doc.get("features")
    if not isinstance(feats, list) or not feats:
        raise _err('metadata needs a nonempty "features" list')
    metas: list[FeatureMeta] = []
    seen: set[str] = set()
    for i, entry in enumerate(feats):
        where = f"features[{i}]"
        if not isinstance(entry, dict):
            raise _err(f"{where}: expected an object")
        name = entry.get("name")
        if not isinstance(name, str) or not IDENT_RE.match(name):
            raise _err(f"{where}: feature name must be an identifier, got {name!r}")
        if name in seen:
            raise _err(f"{where}: duplicate feature name {name!r}")
        seen.add(name)
        kind = entry.get("kind")
        if kind not in (CONTINUOUS, ORDINAL, NOMINAL):
            raise _err(f"{where} ({name}): kind must be continuous, ordinal, or nominal, got {kind!r}")
        allowed = {"name", "kind"} | ({"values"} if kind == NOMINAL else {"min", "max"})
        unknown = set(entry) - allowed
        if unknown:
            raise _err(f"{where} ({name}): unknown keys {sorted(unknown)}")
        if kind == NOMINAL:
            values = entry.get("values")
            if not isinstance(values, list) or len(values) < 2:
                raise _err(f"{where} ({name}): nominal features need at least 2 values")
            if not all(isinstance(v, str) and v for v in values):
                raise _err(f"{where} ({name}): nominal values must be nonempty strings")
            if len(set(values)) != len(values):
                raise _err(f"{where} ({name}): nominal values must be distinct")
            metas.append(FeatureMeta(name, NOMINAL, values=tuple(values)))
            continue
        has_min, has_max = "min" in entry, "max" in entry
        if kind == ORDINAL:
            if not (has_min and has_max):
                raise _err(f"{where} ({name}): ordinal features need min and max")
            lo = _exact_number(entry["min"], f"{where}.min")
            hi = _exact_number(entry["max"], f"{where}.max")
            if lo.denominator != 1 or hi.denominator != 1:
                raise _err(f"{where} ({name}): ordinal bounds must be integers")
            if lo > hi:
                raise _err(f"{where} ({name}): min must not exceed max")
            metas.append(FeatureMeta(name, ORDINAL, lo=lo, hi=hi))
        else:
            if has_min != has_max:
                raise _err(f"{where} ({name}): min and max must be given together")
            lo = _exact_number(entry["min"], f"{where}.min") if has_min else None
            hi = _exact_number(entry["max"], f"{where}.max") if has_max else None
            if lo is not None and lo >= hi:
                raise _err(f"{where} ({name}): normalization bounds need min < max")
            metas.append(FeatureMeta(name, CONTINUOUS, lo=lo, hi=hi))
    return tuple(metas)


@dataclass
class VarLayout:
    """Positional, bijective mapping from (instance, feature[, value]) to
    solver variable ids. Immutable after construction."""

    metas: tuple[FeatureMeta, ...]
    instances: tuple[str, ...]
    num_vars: int
    mask: frozenset[int]
    names: tuple[str, ...]
    owners: tuple[tuple[str, str, str | None], ...]
    numeric: dict[tuple[str, str], int]
    onehot: dict[tuple[str, str], tuple[tuple[str, int], ...]]
    by_feature: dict[str, FeatureMeta]
    _per_instance: dict[str, tuple[int, ...]]

    def var_name(self, v: int) -> str:
        return self.names[v]

    def owner(self, v: int) -> tuple[str, str, str | None]:
        return self.owners[v]

    def instance_vars(self, instance: str) -> tuple[int, ...]:
        return self._per_instance[instance]

    def feature_vars(self, instance: str, feature: str) -> tuple[int, ...]:
        key = (instance, feature)
        if key in self.numeric:
            return (self.numeric[key],)
        return tuple(v for _, v in self.onehot[key])


def build_layout(metas, instances) -> VarLayout:
    """Assign contiguous variable ids to every (instance, feature[, value])."""
    metas = tuple(metas)
    instances = tuple(instances)
    seen_f: set[str] = set()
    for m in metas:
        if m.name in seen_f:
            raise _err(f"duplicate feature name {m.name!r}")
        seen_f.add(m.name)
    seen_i: set[str] = set()
    for name in instances:
        if not isinstance(name, str) or not IDENT_RE.match(name):
            raise InputError(f"instance name must be an identifier, got {name!r}", kind="instance")
        if name in seen_i:
            raise InputError(f"duplicate instance name {name!r}", kind="instance")
        seen_i.add(name)

    names: list[str] = []
    owners: list[tuple[str, str, str | None]] = []
    numeric: dict[tuple[str, str], int] = {}
    onehot: dict[tuple[str, str], tuple[tuple[str, int], ...]] = {}
    per_instance: dict[str, list[int]] = {i: [] for i in instances}
    mask: set[int] = set()
    vid = 0
    for inst in instances:
        for m in metas:
            if m.kind == NOMINAL:
                block: list[tuple[str, int]] = []
                for value in m.values:
                    names.append(f"{inst}.{m.name}^{value}")
                    owners.append((inst, m.name, value))
                    per_instance[inst].append(vid)
                    mask.add(vid)
                    block.append((value, vid))
                    vid += 1
                onehot[(inst, m.name)] = tuple(block)
            else:
                names.append(f"{inst}.{m.name}")
                owners.append((inst, m.name, None))
                per_instance[inst].append(vid)
                if m.kind == ORDINAL:
                    mask.add(vid)
                numeric[(inst, m.name)] = vid
                vid += 1
    return VarLayout(
        metas=metas,
        instances=instances,
        num_vars=vid,
        mask=frozenset(mask),
        names=tuple(names),
        owners=tuple(owners),
        numeric=numeric,
        onehot=onehot,
        by_feature={m.name: m for m in metas},
        _per_instance={i: tuple(vs) for i, vs in per_instance.items()},
    )


def implicit_constraints(layout: VarLayout) -> Conjunction:
    """Domain constraints: ordinal bounds, one-hot 0/1 bounds and sum-to-one.

    Continuous features contribute nothing; integrality is carried by the
    layout mask, not by constraints.
    """
    cons: list[LinearConstraint] = []
    for inst in layout.instances:
        for m in layout.metas:
            if m.kind == ORDINAL:
                x = LinExpr.var(layout.numeric[(inst, m.name)])
                cons.append(normalize(m.lo, "<=", x))
                cons.append(normalize(x, "<=", m.hi))
            elif m.kind == NOMINAL:
                block = layout.onehot[(inst, m.name)]
                for _, v in block:
                    xv = LinExpr.var(v)
                    cons.append(normalize(0, "<=", xv))
                    cons.append(normalize(xv, "<=", 1))
                total = LinExpr.of({v: Rat(1) for _, v in block})
                cons.append(normalize(total, "=", 1))
    return Conjunction.of(cons)


def encode_point(layout: VarLayout, instance: str, values: Mapping) -> dict[int, Rat]:
    """Map a named feature assignment to variable bindings (one-hot expanded)."""
    if instance not in layout._per_instance:
        raise InputError(f"unknown instance {instance!r}", kind="instance")
    point: dict[int, Rat] = {}
    known = {m.name for m in layout.metas}
    extra = set(values) - known
    if extra:
        raise InputError(f"unknown features: {sorted(extra)}", kind="domain")
    for m in layout.metas:
        if m.name not in values:
            raise InputError(f"missing value for feature {m.name!r}", kind="domain")
        val = values[m.name]
        if m.kind == NOMINAL:
            if val not in m.values:
                raise InputError(
                    f"{m.name!r} has no value {val!r}; expected one of {list(m.values)}",
                    kind="domain",
                )
            for value, v in layout.onehot[(instance, m.name)]:
                point[v] = Rat(1) if value == val else Rat(0)
            continue
        if isinstance(val, bool) or not isinstance(val, (int, Fraction)):
            raise InputError(f"{m.name!r} needs an exact number, got {val!r}", kind="domain")
        q = Rat(val)
        if m.kind == ORDINAL:
            if q.denominator != 1:
                raise InputError(f"{m.name!r} is ordinal; {render_rat(q)} is not an integer", kind="domain")
            if not (m.lo <= q <= m.hi):
                raise InputError(
                    f"{m.name!r} = {render_rat(q)} outside [{render_rat(m.lo)}, {render_rat(m.hi)}]",
                    kind="domain",
                )
        point[layout.numeric[(instance, m.name)]] = q
    return point


def decode_point(layout: VarLayout, instance: str, point: Mapping[int, Rat]) -> dict:
    """Inverse of encode_point. Requires a clean one-hot pattern per nominal."""
    if instance not in layout._per_instance:
        raise InputError(f"unknown instance {instance!r}", kind="instance")
    out: dict = {}
    for m in layout.metas:
        if m.kind == NOMINAL:
            ones = []
            for value, v in layout.onehot[(instance, m.name)]:
                if v not in point:
                    raise InputError(f"point does not bind {layout.names[v]}", kind="domain")
                if point[v] == 1:
                    ones.append(value)
                elif point[v] != 0:
                    raise RationaleError(f"{layout.names[v]} = {point[v]} is not a one-hot value")
            if len(ones) != 1:
                raise RationaleError(f"{instance}.{m.name} does not select exactly one value")
            out[m.name] = ones[0]
        else:
            v = layout.numeric[(instance, m.name)]
            if v not in point:
                raise InputError(f"point does not bind {layout.names[v]}", kind="domain")
            out[m.name] = point[v]
    return out


def decode_answer(c: Conjunction, layout: VarLayout) -> list[str]:
    """Render an answer conjunction with instance.feature names.

    One-hot constraints are decoded to `I.f = v` / `I.f != v` literals; a
    block pinned to a single value collapses to one `= v`; the 0/1 bounds and
    sum-to-one plumbing never appear (they hold for every valid instance).
    Never emits a one-hot variable name; a constraint mixing one-hot and
    other variables cannot be decoded and raises.
    """
    onehot_block_of: dict[int, tuple[str, str]] = {}
    for vid, (inst, feat, value) in enumerate(layout.owners):
        if value is not None:
            onehot_block_of[vid] = (inst, feat)

    classified: list[tuple] = []
    inter: dict[tuple[str, str], set[str]] = {}
    for k in c:
        if k.is_ground:
            if k.is_false:
                classified.append(("false",))
            continue
        support = k.lhs.variables
        oh = {v for v in support if v in onehot_block_of}
        if not oh:
            classified.append(("numeric", k))
            continue
        if oh != support:
            raise RationaleError(
                "cannot decode a constraint mixing one-hot and numeric variables: "
                + render_constraint(k, layout.var_name)
            )
        blocks = {onehot_block_of[v] for v in oh}
        if len(blocks) != 1:
            raise RationaleError(
                "cannot decode a constraint spanning several nominal features: "
                + render_constraint(k, layout.var_name)
            )
        key = blocks.pop()
        block = layout.onehot[key]
        allowed = frozenset(
            value
            for value, _ in block
            if k.satisfied_at({v: Rat(1) if w == value else Rat(0) for w, v in block})
        )
        if key not in inter:
            inter[key] = set(v for v, _ in block)
        inter[key] &= allowed
        classified.append(("block", key, allowed, k))

    for key, remaining in inter.items():
        if not remaining:
            raise RationaleError(f"answer pins {key[0]}.{key[1]} to no value at all")

    out: list[str] = []
    emitted: set[tuple[str, str]] = set()
    for info in classified:
        if info[0] == "false":
            out.append("false")
        elif info[0] == "numeric":
            out.append(render_constraint(info[1], layout.var_name))
        else:
            _, key, allowed, _ = info
            block = layout.onehot[key]
            if len(allowed) == len(block):
                continue
            inst, feat = key
            if len(inter[key]) == 1:
                if key in emitted:
                    continue
                emitted.add(key)
                (value,) = inter[key]
                out.append(f"{inst}.{feat} = {value}")
            else:
                for value, _ in block:
                    if value not in allowed:
                        out.append(f"{inst}.{feat} != {value}")
    return out
