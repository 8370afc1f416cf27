"""The user constraint language: comma-separated linear comparisons over
`Instance.feature` references, compiled to normalized constraints.

Grammar (whitespace between tokens is free):

    conj := cmp ("," cmp)*
    cmp  := sum rel sum
    rel  := "<=" | "<" | "=" | ">=" | ">" | "!="
    sum  := term (("+" | "-") term)*
    term := number | number "*" ref | ref | "-" term | "(" sum ")"
    ref  := ident "." ident
    number := int ["." digits] | int "/" int

A bare identifier (or a numeric literal facing a nominal feature) is a
nominal value literal; it is only legal as one whole side of a comparison
whose other side is a nominal feature reference. Nominal comparisons admit
only = and !=; numeric comparisons admit everything except !=.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import InputError
from .features import NOMINAL, VarLayout
from .linear import Conjunction, LinearConstraint, LinExpr, Rat, normalize, parse_rat

RELS = ("<=", ">=", "!=", "<", ">", "=")


@dataclass(frozen=True)
class Pos:
    line: int
    column: int


@dataclass(frozen=True)
class Num:
    text: str
    value: Rat
    pos: Pos


@dataclass(frozen=True)
class Ref:
    instance: str
    feature: str
    pos: Pos


@dataclass(frozen=True)
class Value:
    """A bare identifier used as a nominal value literal."""

    name: str
    pos: Pos


@dataclass(frozen=True)
class Neg:
    sub: "Term"
    pos: Pos


@dataclass(frozen=True)
class Mul:
    coef: Num
    ref: Ref
    pos: Pos


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Term"
    right: "Term"
    pos: Pos


Term = Union[Num, Ref, Value, Neg, Mul, Bin]


@dataclass(frozen=True)
class Cmp:
    left: Term
    rel: str
    right: Term
    pos: Pos


@dataclass(frozen=True)
class ConstraintAst:
    comparisons: tuple[Cmp, ...]


def _fail(msg: str, pos: Pos, kind: str = "parse_error") -> InputError:
    return InputError(f"{msg} (line {pos.line}, column {pos.column})", kind=kind,
                      line=pos.line, column=pos.column)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: Pos


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        pos = Pos(line, col)
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            elif j < n and text[j] == "/" and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            toks.append(_Tok("num", text[i:j], pos))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("ident", text[i:j], pos))
            col += j - i
            i = j
            continue
        two = text[i : i + 2]
        if two in ("<=", ">=", "!="):
            toks.append(_Tok("op", two, pos))
            i += 2
            col += 2
            continue
        if ch in "<>=+-*(),.":
            toks.append(_Tok("op", ch, pos))
            i += 1
            col += 1
            continue
        raise _fail(f"unexpected character {ch!r}", pos)
    toks.append(_Tok("end", "", Pos(line, col)))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def eat_op(self, text: str) -> bool:
        t = self.peek()
        if t.kind == "op" and t.text == text:
            self.i += 1
            return True
        return False

    def conj(self) -> ConstraintAst:
        cmps = [self.cmp()]
        while self.eat_op(","):
            cmps.append(self.cmp())
        t = self.peek()
        if t.kind != "end":
            raise _fail(f"unexpected {t.text!r}", t.pos)
        return ConstraintAst(tuple(cmps))

    def cmp(self) -> Cmp:
        left = self.sum()
        t = self.peek()
        if not (t.kind == "op" and t.text in RELS):
            raise _fail("expected a relation (<=, <, =, >=, >, !=)", t.pos)
        self.next()
        right = self.sum()
        return Cmp(left, t.text, right, t.pos)

    def sum(self) -> Term:
        acc = self.term()
        while True:
            t = self.peek()
            if t.kind == "op" and t.text in ("+", "-"):
                self.next()
                rhs = self.term()
                acc = Bin(t.text, acc, rhs, t.pos)
            else:
                return acc

    def term(self) -> Term:
        t = self.peek()
        if t.kind == "num":
            self.next()
            try:
                value = parse_rat(t.text)
            except InputError as e:
                raise _fail(str(e), t.pos) from None
            num = Num(t.text, value, t.pos)
            star = self.peek()
            if star.kind == "op" and star.text == "*":
                self.next()
                ref = self.term()
                if not isinstance(ref, Ref):
                    raise _fail("a coefficient must multiply a feature reference", star.pos)
                return Mul(num, ref, star.pos)
            return num
        if t.kind == "ident":
            self.next()
            if self.eat_op("."):
                f = self.next()
                if f.kind != "ident":
                    raise _fail("expected a feature name after '.'", f.pos)
                ref = Ref(t.text, f.text, t.pos)
                star = self.peek()
                if star.kind == "op" and star.text == "*":
                    self.next()
                    other = self.term()
                    if isinstance(other, (Ref, Mul)):
                        raise _fail("product of feature references is not linear", star.pos,
                                    kind="nonlinear")
                    raise _fail("a coefficient must be written before the reference, like 2*F.age",
                                star.pos)
                return ref
            return Value(t.text, t.pos)
        if t.kind == "op" and t.text == "-":
            self.next()
            return Neg(self.term(), t.pos)
        if t.kind == "op" and t.text == "(":
            self.next()
            inner = self.sum()
            t2 = self.peek()
            if not self.eat_op(")"):
                raise _fail("expected ')'", t2.pos)
            return inner
        raise _fail("expected a number, a reference, '-', or '('", t.pos)


def parse(text: str, layout: Optional[VarLayout] = None) -> ConstraintAst:
    """Parse constraint text; with a layout, also resolve every reference."""
    ast = _Parser(_tokenize(text)).conj()
    if layout is not None:
        for cmp in ast.comparisons:
            for side in (cmp.left, cmp.right):
                _check_refs(side, layout)
    return ast


def _check_refs(t: Term, layout: VarLayout) -> None:
    if isinstance(t, Ref):
        if t.instance not in layout._per_instance:
            raise _fail(f"unknown instance {t.instance!r}", t.pos, kind="unknown_ref")
        if t.feature not in layout.by_feature:
            raise _fail(f"unknown feature {t.feature!r}", t.pos, kind="unknown_ref")
    elif isinstance(t, Neg):
        _check_refs(t.sub, layout)
    elif isinstance(t, Mul):
        _check_refs(t.ref, layout)
    elif isinstance(t, Bin):
        _check_refs(t.left, layout)
        _check_refs(t.right, layout)


def _nominal_ref(t: Term, layout: VarLayout) -> Optional[Ref]:
    """The side is exactly one reference to a nominal feature, no arithmetic."""
    if isinstance(t, Ref) and layout.by_feature.get(t.feature) is not None:
        if layout.by_feature[t.feature].kind == NOMINAL:
            return t
    return None


def _value_literal(t: Term) -> Optional[tuple[str, Pos]]:
    if isinstance(t, Value):
        return t.name, t.pos
    if isinstance(t, Num):
        return t.text, t.pos
    return None


def _linear_side(t: Term, layout: VarLayout) -> LinExpr:
    """Fold a numeric side into a LinExpr; nominal refs may not appear here."""
    if isinstance(t, Num):
        return LinExpr.constant(t.value)
    if isinstance(t, Ref):
        _check_refs(t, layout)
        meta = layout.by_feature[t.feature]
        if meta.kind == NOMINAL:
            raise _fail(
                f"nominal feature {t.instance}.{t.feature} cannot appear in arithmetic; "
                "compare it directly with a value or another nominal feature",
                t.pos, kind="domain",
            )
        return LinExpr.var(layout.numeric[(t.instance, t.feature)])
    if isinstance(t, Value):
        raise _fail(
            f"value literal {t.name!r} may only be compared with a nominal feature",
            t.pos, kind="domain",
        )
    if isinstance(t, Neg):
        return -_linear_side(t.sub, layout)
    if isinstance(t, Mul):
        return _linear_side(t.ref, layout).scale(t.coef.value)
    return (
        _linear_side(t.left, layout) + _linear_side(t.right, layout)
        if t.op == "+"
        else _linear_side(t.left, layout) - _linear_side(t.right, layout)
    )


def _compile_cmp(cmp: Cmp, layout: VarLayout) -> list[LinearConstraint]:
    lref = _nominal_ref(cmp.left, layout)
    rref = _nominal_ref(cmp.right, layout)
    if lref is None and rref is None:
        if isinstance(cmp.left, Value) or isinstance(cmp.right, Value):
            v = cmp.left if isinstance(cmp.left, Value) else cmp.right
            raise _fail(
                f"value literal {v.name!r} may only be compared with a nominal feature",
                v.pos, kind="domain",
            )
        if cmp.rel == "!=":
            raise _fail("!= requires a nominal feature on one side", cmp.pos, kind="relation")
        lhs = _linear_side(cmp.left, layout)
        rhs = _linear_side(cmp.right, layout)
        return [normalize(lhs, cmp.rel, rhs)]

    if cmp.rel not in ("=", "!="):
        raise _fail(
            f"nominal features admit only = and !=, not {cmp.rel}", cmp.pos, kind="relation"
        )
    if lref is not None and rref is not None:
        _check_refs(lref, layout)
        _check_refs(rref, layout)
        lm = layout.by_feature[lref.feature]
        rm = layout.by_feature[rref.feature]
        if lm.values != rm.values:
            raise _fail(
                f"{lref.instance}.{lref.feature} and {rref.instance}.{rref.feature} "
                "have different value domains",
                cmp.pos, kind="domain",
            )
        if cmp.rel == "!=":
            raise _fail(
                "!= between two nominal features is a disjunction, not a conjunction "
                "of linear constraints",
                cmp.pos, kind="relation",
            )
        lblock = dict(layout.onehot[(lref.instance, lref.feature)])
        rblock = dict(layout.onehot[(rref.instance, rref.feature)])
        return [
            normalize(LinExpr.var(lblock[v]), "=", LinExpr.var(rblock[v]))
            for v in lm.values
        ]

    ref = lref if lref is not None else rref
    other = cmp.right if lref is not None else cmp.left
    _check_refs(ref, layout)
    lit = _value_literal(other)
    if lit is None:
        if isinstance(other, Ref):
            raise _fail(
                f"cannot compare nominal {ref.instance}.{ref.feature} with "
                f"{other.instance}.{other.feature}",
                cmp.pos, kind="domain",
            )
        raise _fail(
            f"nominal {ref.instance}.{ref.feature} must be compared with a value "
            "or another nominal feature, not arithmetic",
            cmp.pos, kind="domain",
        )
    name, pos = lit
    meta = layout.by_feature[ref.feature]
    if name not in meta.values:
        raise _fail(
            f"{name!r} is not a value of {ref.feature} (expected one of {list(meta.values)})",
            pos, kind="domain",
        )
    v = dict(layout.onehot[(ref.instance, ref.feature)])[name]
    target = Rat(1) if cmp.rel == "=" else Rat(0)
    return [normalize(LinExpr.var(v), "=", target)]


def compile_ast(ast: ConstraintAst, layout: VarLayout) -> Conjunction:
    """Compile a parsed constraint list against a layout."""
    out: list[LinearConstraint] = []
    for cmp in ast.comparisons:
        out.extend(_compile_cmp(cmp, layout))
    return Conjunction.of(out)


def compile_text(text: str, layout: VarLayout) -> Conjunction:
    """Parse and compile in one step."""
    return compile_ast(parse(text, layout), layout)
