"""Session orchestration: models, instances, constraints, queries, answers.

A session accumulates declarations and answers `solveopt` queries by
assembling SAT(CROSS(TYPEC, USERC, INST(I1), ...)), optionally projected
and/or minimized. Answers are decoded to feature-level text; the same
serializers back the CLI and the HTTP service so both emit identical bytes.

Script format, one command per line:

    model <path>
    instance <name> <model-id> label=<class> [minconf=<rat>]
    constraint <text>
    solve [project=[<ref>,...]] [minimize=<spec>]
    retract <constraint-id>
    reset

Blank lines and lines starting with # are skipped. `retract` and `reset`
keep exported scripts replayable; the REPL-only verbs (undo, show) are
recorded as their effect, never verbatim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

from .distance import DistanceSpec, parse_minimize_spec
from .errors import InputError, RationaleError
from .features import (
    build_layout,
    decode_answer,
    decode_point,
    implicit_constraints,
    parse_metadata,
)
from .fm import entailed
from .lang import compile_text
from .linear import Conjunction, Rat, Theory, parse_rat, render_rat, scaled
from .theory import (
    TYPEC,
    USERC,
    Budget,
    Cross,
    Inst,
    InstanceDecl,
    Minimize,
    MinOutcome,
    Sat,
    Snapshot,
    evaluate,
    project_theory,
)
from .tree import DecisionTree, parse_tree

SHADOW_NOTE = ("projection eliminated integer variables; "
               "shown constraints are their rational shadow")


@dataclass(frozen=True)
class Answer:
    """Decoded solve result.

    One tuple of constraint texts per member; no members means no solution.
    Under a minimize option, `min` is the optimum, `attained` says whether
    some member reaches it, and `witnesses` holds one rendered point per
    member, aligned by position. `note` carries a display caveat.
    """

    members: tuple[tuple[str, ...], ...]
    min: Optional[Rat] = None
    attained: bool = False
    witnesses: Optional[tuple[dict[str, dict[str, str]], ...]] = None
    note: Optional[str] = None


def render_answer_text(a: Answer) -> str:
    if not a.members:
        return "no solution\n"
    lines = [", ".join(rows) if rows else "true" for rows in a.members]
    if a.min is not None:
        lines.append(f"min = {render_rat(a.min)}")
        if not a.attained:
            lines.append("note: infimum not attained")
        for w in a.witnesses or ():
            for inst, vals in w.items():
                pairs = ", ".join(f"{f}={v}" for f, v in vals.items())
                lines.append(f"witness {inst}: {pairs}")
    if a.note is not None:
        lines.append(f"note: {a.note}")
    return "\n".join(lines) + "\n"


def answer_document(a: Answer) -> dict:
    doc: dict = {"members": [[{"text": t} for t in rows] for rows in a.members]}
    if a.min is not None:
        doc["min"] = render_rat(a.min)
        doc["attained"] = a.attained
        doc["witnesses"] = [
            {inst: dict(vals) for inst, vals in w.items()} for w in (a.witnesses or ())
        ]
    if a.note is not None:
        doc["note"] = a.note
    return doc


def render_answer_json(a: Answer) -> str:
    return json.dumps(answer_document(a), separators=(",", ":"))


@dataclass(frozen=True)
class _Decl:
    model_id: str
    label: str
    minconf: Optional[Rat]


class Session:
    """Single-writer state; `solveopt` reads an immutable snapshot."""

    def __init__(self, metadata: Optional[dict] = None):
        self.metadata_doc = metadata
        self.metas = parse_metadata(metadata) if metadata is not None else ()
        self.models: dict[str, DecisionTree] = {}
        self.model_docs: dict[str, dict] = {}
        self.model_order: list[str] = []
        self.decls: dict[str, _Decl] = {}
        self.decl_order: list[str] = []
        self.constraints: list[tuple[int, str, Conjunction]] = []
        self._next_cid = 1
        self.layout = build_layout(self.metas, ())
        self.history: list[str] = []

    # --- declarations -----------------------------------------------------

    def model(self, doc) -> str:
        if self.metadata_doc is None:
            raise InputError("metadata must be declared before models", kind="metadata")
        tree = parse_tree(doc, self.metas)
        if tree.model_id in self.models:
            raise InputError(
                f"model '{tree.model_id}' is already registered", kind="duplicate"
            )
        self.models[tree.model_id] = tree
        self.model_docs[tree.model_id] = doc
        self.model_order.append(tree.model_id)
        self.history.append(f"model {tree.model_id}.json")
        return tree.model_id

    def instance(self, name: str, model_id: str, label: str,
                 minconf: Optional[Rat] = None) -> None:
        if name in self.decls:
            raise InputError(f"instance '{name}' is already declared", kind="duplicate")
        tree = self.models.get(model_id)
        if tree is None:
            raise InputError(f"unknown model '{model_id}'", kind="model")
        labels = sorted(leaf_labels(tree))
        if label not in labels:
            raise InputError(
                f"model '{model_id}' has no class '{label}'; "
                f"available: {', '.join(labels)}",
                kind="instance",
            )
        if minconf is not None and not (0 <= minconf <= 1):
            raise InputError("minconf must lie in [0, 1]", kind="instance")
        new_layout = build_layout(self.metas, tuple(self.decl_order) + (name,))
        self.constraints = [
            (cid, text, compile_text(text, new_layout))
            for cid, text, _ in self.constraints
        ]
        self.layout = new_layout
        self.decls[name] = _Decl(model_id, label, minconf)
        self.decl_order.append(name)
        line = f"instance {name} {model_id} label={label}"
        if minconf is not None:
            line += f" minconf={render_rat(minconf)}"
        self.history.append(line)

    def constraint(self, text: str) -> int:
        conj = compile_text(text, self.layout)
        cid = self._next_cid
        self._next_cid += 1
        self.constraints.append((cid, text, conj))
        self.history.append(f"constraint {text}")
        return cid

    def retract(self, cid: int) -> None:
        for i, (k, _, _) in enumerate(self.constraints):
            if k == cid:
                del self.constraints[i]
                self.history.append(f"retract {cid}")
                return
        raise InputError(f"unknown constraint id {cid}", kind="constraint")

    def undo(self) -> int:
        """Retract the most recently added constraint; returns its id."""
        if not self.constraints:
            raise InputError("no constraint to undo", kind="constraint")
        cid = self.constraints[-1][0]
        self.retract(cid)
        return cid

    def reset(self) -> None:
        self.constraints = []
        self.history.append("reset")

    def show(self) -> str:
        lines = [f"features: {len(self.metas)}"]
        for mid in self.model_order:
            lines.append(f"model {mid}")
        for name in self.decl_order:
            d = self.decls[name]
            line = f"instance {name} {d.model_id} label={d.label}"
            if d.minconf is not None:
                line += f" minconf={render_rat(d.minconf)}"
            lines.append(line)
        for cid, text, _ in self.constraints:
            lines.append(f"constraint {cid}: {text}")
        return "\n".join(lines) + "\n"

    # --- solving ------------------------------------------------------------

    def snapshot(self) -> Snapshot:
        return Snapshot(
            self.layout,
            tuple(c for _, _, c in self.constraints),
            {
                name: InstanceDecl(self.models[d.model_id], d.label, d.minconf)
                for name, d in ((n, self.decls[n]) for n in self.decl_order)
            },
        )

    def _keep_vars(self, project) -> tuple[frozenset, tuple[str, ...]]:
        keep: set[int] = set()
        insts: set[str] = set()
        for entry in project:
            entry = entry.strip()
            if "." in entry:
                inst, _, feat = entry.partition(".")
                if inst not in self.decls:
                    raise InputError(f"unknown instance '{inst}' in project", kind="project")
                if feat not in self.layout.by_feature:
                    raise InputError(f"unknown feature '{feat}' in project", kind="project")
                keep.update(self.layout.feature_vars(inst, feat))
                insts.add(inst)
            else:
                if entry not in self.decls:
                    raise InputError(f"unknown instance '{entry}' in project", kind="project")
                keep.update(self.layout.instance_vars(entry))
                insts.add(entry)
        return frozenset(keep), tuple(i for i in self.decl_order if i in insts)

    def solveopt(self, project=None, minimize=None,
                 budget: Optional[Budget] = None) -> Answer:
        snap = self.snapshot()
        expr = Cross(TYPEC, USERC)
        for name in self.decl_order:
            expr = Cross(expr, Inst(name))
        expr = Sat(expr)

        keep = None
        kept_instances = tuple(self.decl_order)
        if project is not None:
            keep, kept_instances = self._keep_vars(project)

        spec: Optional[DistanceSpec] = None
        minimize_text = None
        if minimize is not None:
            if isinstance(minimize, DistanceSpec):
                spec = minimize
                minimize_text = _spec_text(spec)
            else:
                minimize_text = str(minimize)
                spec = parse_minimize_spec(minimize_text, self.layout)

        self.history.append(_solve_line(project, minimize_text))
        psi = implicit_constraints(self.layout)
        psi_keys = {_row_key(k) for k in psi}

        if spec is None:
            t = evaluate(expr, snap, budget)
            note = self._shadow_note(t, keep)
            if keep is not None:
                t = project_theory(t, keep)
            members = tuple(
                self._display(c, psi, psi_keys) for c in t
            )
            return Answer(members, note=note if members else None)

        out = evaluate(Minimize(expr, spec), snap, budget)
        assert isinstance(out, MinOutcome)
        if out.value is None:
            return Answer(())
        survivors = Theory.of([c for c, _ in out.members])
        note = self._shadow_note(survivors, keep)
        shown = []
        for c, _ in out.members:
            if keep is not None:
                (c,) = tuple(project_theory(Theory.of([c]), keep))
            shown.append(self._display(c, psi, psi_keys))
        witnesses = tuple(
            self._render_witness(w, kept_instances) for _, w in out.members
        )
        return Answer(tuple(shown), out.value, out.attained, witnesses, note)

    # --- decoding -----------------------------------------------------------

    def _shadow_note(self, t: Theory, keep) -> Optional[str]:
        if keep is None:
            return None
        eliminated = {
            v
            for c in t
            for k in c
            for v in k.lhs.variables
            if v in self.layout.mask and v not in keep
        }
        return SHADOW_NOTE if eliminated else None

    def _display(self, member: Conjunction, psi: Conjunction, psi_keys) -> tuple[str, ...]:
        """Member rows minus domain plumbing, pruned to the informative core.

        Domain rows serve as entailment context but are never displayed;
        a member row already implied by the context and its siblings is
        dropped.
        """
        rows = [k for k in member if not k.is_true and _row_key(k) not in psi_keys]
        i = 0
        while i < len(rows):
            context = Conjunction.of(rows[:i] + rows[i + 1:] + list(psi.constraints))
            if entailed(context, rows[i]):
                del rows[i]
            else:
                i += 1
        return tuple(decode_answer(Conjunction.of(rows), self.layout))

    def _render_witness(self, point: dict[int, Rat], kept_instances) -> dict:
        out: dict[str, dict[str, str]] = {}
        full = _complete_witness(self.layout, point)
        for inst in kept_instances:
            vals = decode_point(self.layout, inst, full)
            out[inst] = {
                f: (v if isinstance(v, str) else render_rat(v))
                for f, v in vals.items()
            }
        return out

    # --- script export --------------------------------------------------------

    def export_script(self) -> dict:
        return {
            "metadata": self.metadata_doc,
            "models": {f"{mid}.json": self.model_docs[mid] for mid in self.model_order},
            "script": "\n".join(self.history) + ("\n" if self.history else ""),
        }


def leaf_labels(tree: DecisionTree) -> set[str]:
    labels: set[str] = set()
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if hasattr(node, "label"):
            labels.add(node.label)
        else:
            stack.append(node.left)
            stack.append(node.right)
    return labels


def _row_key(k):
    s = scaled(k)
    return (s.lhs.terms, s.lhs.const, s.rel)


def _complete_witness(layout, point: dict[int, Rat]) -> dict[int, Rat]:
    """Fill variables the solver never saw: continuous features missing from
    the point default to their declared minimum, else 0; a fully absent
    one-hot block defaults to its first value."""
    full = dict(point)
    for (inst, feat), vid in layout.numeric.items():
        if vid not in full:
            meta = layout.by_feature[feat]
            full[vid] = meta.lo if meta.lo is not None else Rat(0)
    for (inst, feat), block in layout.onehot.items():
        if all(vid not in full for _, vid in block):
            for j, (_, vid) in enumerate(block):
                full[vid] = Rat(1) if j == 0 else Rat(0)
    return full


def _solve_line(project, minimize_text) -> str:
    line = "solve"
    if project is not None:
        line += " project=[" + ",".join(e.strip() for e in project) + "]"
    if minimize_text is not None:
        line += f" minimize={minimize_text}"
    return line


def _spec_text(spec: DistanceSpec) -> str:
    return (f"dist({spec.factual}, {spec.contrastive}, "
            f"beta={render_rat(spec.beta)}, gamma={render_rat(spec.gamma)})")


# --- script parsing -----------------------------------------------------------


def _usage(msg: str) -> InputError:
    return InputError(msg, kind="script")


def split_options(text: str) -> list[str]:
    """Whitespace-split at bracket depth zero, so values like
    minimize=l1norm(F, CE) stay whole."""
    parts: list[str] = []
    buf: list[str] = []
    depth = 0
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise _usage("unbalanced brackets in options")
        if ch.isspace() and depth == 0:
            if buf:
                parts.append("".join(buf))
                buf = []
        else:
            buf.append(ch)
    if depth != 0:
        raise _usage("unbalanced brackets in options")
    if buf:
        parts.append("".join(buf))
    return parts


def parse_command(line: str):
    """One script line to an event tuple, or None for blanks and comments."""
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    verb, _, rest = stripped.partition(" ")
    rest = rest.strip()
    if verb == "model":
        if not rest:
            raise _usage("model needs a file path")
        return ("model", rest)
    if verb == "instance":
        parts = rest.split()
        if len(parts) < 3:
            raise _usage("instance needs: <name> <model-id> label=<class> [minconf=<rat>]")
        name, model_id = parts[0], parts[1]
        label = None
        minconf = None
        for p in parts[2:]:
            if p.startswith("label="):
                label = p[len("label="):]
            elif p.startswith("minconf="):
                minconf = parse_rat(p[len("minconf="):])
            else:
                raise _usage(f"unknown instance option {p!r}")
        if label is None:
            raise _usage("instance needs label=<class>")
        return ("instance", name, model_id, label, minconf)
    if verb == "constraint":
        if not rest:
            raise _usage("constraint needs text")
        return ("constraint", rest)
    if verb == "retract":
        try:
            return ("retract", int(rest))
        except ValueError:
            raise _usage("retract needs a constraint id") from None
    if verb == "reset":
        if rest:
            raise _usage("reset takes no arguments")
        return ("reset",)
    if verb == "solve":
        project = None
        minimize = None
        for opt in split_options(rest):
            key, eq, value = opt.partition("=")
            if not eq:
                raise _usage(f"unknown solve option {opt!r}")
            if key == "project":
                if not (value.startswith("[") and value.endswith("]")):
                    raise _usage("project expects [name, ...]")
                inner = value[1:-1].strip()
                project = [e.strip() for e in inner.split(",")] if inner else []
            elif key == "minimize":
                minimize = value
            else:
                raise _usage(f"unknown solve option {key!r}")
        return ("solve", project, minimize)
    if verb in ("undo", "show"):
        if rest:
            raise _usage(f"{verb} takes no arguments")
        return (verb,)
    raise _usage(f"unknown command {verb!r}")


def apply_command(session: Session, event,
                  load_model_doc: Optional[Callable[[str], dict]] = None):
    """Execute one parsed event. `load_model_doc` maps a path to a decoded
    model document and is required for model events. Returns an Answer for
    solve, a string for show, None otherwise."""
    kind = event[0]
    if kind == "model":
        if load_model_doc is None:
            raise _usage("model files cannot be loaded here")
        session.model(load_model_doc(event[1]))
        return None
    if kind == "instance":
        session.instance(event[1], event[2], event[3], event[4])
        return None
    if kind == "constraint":
        session.constraint(event[1])
        return None
    if kind == "retract":
        session.retract(event[1])
        return None
    if kind == "reset":
        session.reset()
        return None
    if kind == "undo":
        session.undo()
        return None
    if kind == "show":
        return session.show()
    if kind == "solve":
        return session.solveopt(project=event[1], minimize=event[2])
    raise RationaleError(f"unhandled event {event!r}")
