"""Distance between a factual and a contrastive instance, and its exact
linearization.

The measure is simple matching over nominal features plus a beta-weighted
normalized L1 term and a gamma-weighted normalized L-infinity term over the
numeric ones. Normalization widths come from declared metadata bounds, never
from data. The linearized form introduces one slack per numeric feature, two
inequality rows pinning it above +/- the normalized difference, a shared max
slack when gamma is active, and per-value slacks for nominal blocks whose
half-sum equals the 0/1 matching indicator at one-hot points.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InputError
from .features import NOMINAL, VarLayout
from .linear import Conjunction, LinExpr, Rat, normalize, parse_rat

MATCHING = "matching"
L1 = "l1"
LINF = "linf"

_CALL_RE = re.compile(
    r"^\s*(l1norm|dist)\s*\(\s*([A-Za-z_]\w*)\s*,\s*([A-Za-z_]\w*)\s*(?:,(.*))?\)\s*$",
    re.S,
)


@dataclass(frozen=True)
class DistanceSpec:
    """Which two instances are compared and with what weights."""

    factual: str
    contrastive: str
    beta: Rat = Rat(1)
    gamma: Rat = Rat(0)
    terms: frozenset = frozenset({MATCHING, L1, LINF})


@dataclass(frozen=True)
class ObjectiveBuild:
    """Linearized objective plus the rows defining its slack variables.

    Slack ids start at the layout's variable count; `next_var` is the first
    id past them. `int_vars` is empty: matching needs no extra binaries
    because one-hot blocks are already integral under the variable mask.
    """

    objective: LinExpr
    side: Conjunction
    int_vars: frozenset
    next_var: int


def _err(msg: str) -> InputError:
    return InputError(msg, kind="minimize")


def parse_minimize_spec(text: str, layout: VarLayout | None = None) -> DistanceSpec:
    """`l1norm(F, CE)` or `dist(F, CE, beta=<rat>, gamma=<rat>)`."""
    m = _CALL_RE.match(text)
    if not m:
        raise _err(f"cannot read minimize option {text!r}: "
                   "expected l1norm(F, CE) or dist(F, CE, beta=..., gamma=...)")
    name, factual, contrastive, tail = m.groups()
    beta, gamma = Rat(1), Rat(0)
    if name == "l1norm":
        if tail is not None and tail.strip():
            raise _err("l1norm takes exactly two instance names")
        terms = frozenset({MATCHING, L1})
    else:
        terms = frozenset({MATCHING, L1, LINF})
        seen = set()
        for part in (tail.split(",") if tail and tail.strip() else []):
            if "=" not in part:
                raise _err(f"expected key=value in minimize option, got {part.strip()!r}")
            key, _, val = part.partition("=")
            key = key.strip()
            if key not in ("beta", "gamma"):
                raise _err(f"unknown minimize parameter {key!r}")
            if key in seen:
                raise _err(f"duplicate minimize parameter {key!r}")
            seen.add(key)
            q = parse_rat(val.strip())
            if key == "beta":
                beta = q
            else:
                gamma = q
    if beta < 0 or gamma < 0:
        raise _err("beta and gamma must be nonnegative")
    if layout is not None:
        for inst in (factual, contrastive):
            if inst not in layout.instances:
                raise _err(f"unknown instance '{inst}' in minimize option")
    return DistanceSpec(factual, contrastive, beta, gamma, terms)


def _width(meta) -> Rat | None:
    """Normalization width, None when bounds are missing."""
    if meta.lo is None or meta.hi is None:
        return None
    return meta.hi - meta.lo


def build_objective(spec: DistanceSpec, layout: VarLayout) -> ObjectiveBuild:
    for inst in (spec.factual, spec.contrastive):
        if inst not in layout.instances:
            raise _err(f"unknown instance '{inst}'")
    if spec.beta < 0 or spec.gamma < 0:
        raise _err("beta and gamma must be nonnegative")
    want_l1 = L1 in spec.terms and spec.beta != 0
    want_linf = LINF in spec.terms and spec.gamma != 0
    need_t = want_l1 or want_linf

    nxt = layout.num_vars
    obj = LinExpr()
    side = []
    t_ids = []
    for meta in layout.metas:
        if meta.kind == NOMINAL:
            if MATCHING not in spec.terms:
                continue
            fblock = layout.onehot[(spec.factual, meta.name)]
            cblock = layout.onehot[(spec.contrastive, meta.name)]
            for (_, fid), (_, cid) in zip(fblock, cblock):
                s = nxt
                nxt += 1
                diff = LinExpr.var(cid) - LinExpr.var(fid)
                side.append(normalize(diff - LinExpr.var(s), "<=", 0))
                side.append(normalize(-diff - LinExpr.var(s), "<=", 0))
                obj = obj + LinExpr.var(s, Rat(1, 2))
        else:
            if not need_t:
                continue
            w = _width(meta)
            if w is None:
                raise _err(f"feature '{meta.name}' needs min/max bounds "
                           "to normalize distances")
            if w == 0:
                continue
            fid = layout.numeric[(spec.factual, meta.name)]
            cid = layout.numeric[(spec.contrastive, meta.name)]
            t = nxt
            nxt += 1
            t_ids.append(t)
            diff = (LinExpr.var(cid) - LinExpr.var(fid)).scale(1 / w)
            side.append(normalize(diff - LinExpr.var(t), "<=", 0))
            side.append(normalize(-diff - LinExpr.var(t), "<=", 0))
            if want_l1:
                obj = obj + LinExpr.var(t, spec.beta)
    if want_linf and t_ids:
        z = nxt
        nxt += 1
        for t in t_ids:
            side.append(normalize(LinExpr.var(t) - LinExpr.var(z), "<=", 0))
        obj = obj + LinExpr.var(z, spec.gamma)
    return ObjectiveBuild(obj, Conjunction.of(side), frozenset(), nxt)


def eval_distance(spec: DistanceSpec, point_f, point_cf, layout: VarLayout) -> Rat:
    """Direct evaluation at two fully specified points; the oracle the
    linearization is tested against."""
    matching = Rat(0)
    l1 = Rat(0)
    linf = Rat(0)
    want_l1 = L1 in spec.terms and spec.beta != 0
    want_linf = LINF in spec.terms and spec.gamma != 0
    for meta in layout.metas:
        if meta.kind == NOMINAL:
            if MATCHING not in spec.terms:
                continue
            fblock = layout.onehot[(spec.factual, meta.name)]
            cblock = layout.onehot[(spec.contrastive, meta.name)]
            if any(point_f[fid] != point_cf[cid]
                   for (_, fid), (_, cid) in zip(fblock, cblock)):
                matching += 1
        else:
            if not (want_l1 or want_linf):
                continue
            w = _width(meta)
            if w is None:
                raise _err(f"feature '{meta.name}' needs min/max bounds "
                           "to normalize distances")
            if w == 0:
                continue
            delta = point_cf[layout.numeric[(spec.contrastive, meta.name)]] \
                - point_f[layout.numeric[(spec.factual, meta.name)]]
            norm = abs(delta) / w
            l1 += norm
            linf = max(linf, norm)
    total = Rat(0)
    if MATCHING in spec.terms:
        total += matching
    if want_l1:
        total += spec.beta * l1
    if want_linf:
        total += spec.gamma * linf
    return total
