"""Concrete syntax: tokenizer and recursive-descent parsers.

Model files follow the grammar in the README. Formulas use `[...]`/`<...>`
prefixes that bind tighter than the Boolean connectives, so compound bodies
need parentheses: `[A <- 0](B = 1 & C = 2)`. Implication `->` and
biconditional `<->` are accepted in both formula layers and desugared while
parsing. Comments run from `#` to end of line.

A quirk of the shared tokenizer: `<-` is always the assignment arrow, so an
ordered comparison against a negative literal needs a space (`X < -1`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import exprs, formulas
from .diagnostics import (FormulaError, ModelError, ParseError, SourceSpan,
                          ValidationReport)
from .exprs import Expr, Value
from .formulas import Formula, InterventionSpec
from .model import (ConstrainedModel, ConstraintSet, Context, ExtendedState,
                    Range, Signature)

KEYWORDS = frozenset({
    "model", "exogenous", "endogenous", "eq", "constraint", "states",
    "if", "then", "else", "disc", "true", "false",
})

_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>\#[^\n]*)
      | (?P<nl>\n)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<int>[0-9]+)
      | (?P<op><->|<-|<=|>=|==|!=|->|\.\.|[<>=!&|+\-*/%(){}\[\],:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "int", an operator string, or "eof"
    text: str
    span: SourceSpan


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             SourceSpan(line, col, pos))
        group = match.lastgroup
        value = match.group()
        span = SourceSpan(line, col, pos, len(value))
        if group == "nl":
            line += 1
            col = 1
        elif group in ("ws", "comment"):
            col += len(value)
        else:
            kind = value if group == "op" else group
            tokens.append(Token(kind, value, span))
            col += len(value)
        pos = match.end()
    tokens.append(Token("eof", "", SourceSpan(line, col, pos, 0)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.current
        return tok.kind == kind and (text is None or tok.text == text)

    def at_keyword(self, word: str) -> bool:
        return self.at("ident", word)

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.current.kind != kind:
            raise self.error(f"unexpected {self.describe(self.current)}",
                             expected=(what or kind,))
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            raise self.error(f"unexpected {self.describe(self.current)}",
                             expected=(word,))
        return self.advance()

    def error(self, message: str, expected: tuple[str, ...] = ()) -> ParseError:
        return ParseError(message, self.current.span, expected)

    @staticmethod
    def describe(tok: Token) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def expect_eof(self) -> None:
        if self.current.kind != "eof":
            raise self.error(f"trailing input: {self.describe(self.current)}")

    # ---- shared pieces -------------------------------------------------

    def parse_name(self, what: str = "identifier") -> Token:
        tok = self.expect("ident", what)
        if tok.text in KEYWORDS:
            raise ParseError(f"keyword {tok.text!r} used as {what}", tok.span)
        return tok

    def parse_int(self) -> int:
        negative = False
        if self.at("-"):
            self.advance()
            negative = True
        tok = self.expect("int", "integer")
        return -int(tok.text) if negative else int(tok.text)

    def parse_value(self) -> Value:
        if self.at("int") or self.at("-"):
            return self.parse_int()
        return self.parse_name("value").text

    # ---- expressions ---------------------------------------------------

    def parse_expr(self) -> Expr:
        if self.at_keyword("if"):
            self.advance()
            cond = self.parse_expr()
            self.expect_keyword("then")
            then = self.parse_expr()
            self.expect_keyword("else")
            orelse = self.parse_expr()
            return exprs.If(cond, then, orelse)
        return self._expr_iff()

    def _expr_iff(self) -> Expr:
        left = self._expr_implies()
        while self.at("<->"):
            self.advance()
            right = self._expr_implies()
            left = exprs.BoolOp("&", exprs.BoolOp("->", left, right),
                                exprs.BoolOp("->", right, left))
        return left

    def _expr_implies(self) -> Expr:
        left = self._expr_or()
        if self.at("->"):
            self.advance()
            return exprs.BoolOp("->", left, self._expr_implies())
        return left

    def _expr_or(self) -> Expr:
        left = self._expr_and()
        while self.at("|"):
            self.advance()
            left = exprs.BoolOp("|", left, self._expr_and())
        return left

    def _expr_and(self) -> Expr:
        left = self._expr_compare()
        while self.at("&"):
            self.advance()
            left = exprs.BoolOp("&", left, self._expr_compare())
        return left

    def _expr_compare(self) -> Expr:
        left = self._expr_add()
        for op in exprs.COMPARE_OPS:
            if self.at(op):
                self.advance()
                return exprs.Compare(op, left, self._expr_add())
        return left

    def _expr_add(self) -> Expr:
        left = self._expr_mul()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            left = exprs.Arith(op, left, self._expr_mul())
        return left

    def _expr_mul(self) -> Expr:
        left = self._expr_unary()
        while self.at("*") or self.at("/") or self.at("%"):
            op = self.advance().text
            left = exprs.Arith(op, left, self._expr_unary())
        return left

    def _expr_unary(self) -> Expr:
        if self.at("!"):
            self.advance()
            return exprs.Not(self._expr_unary())
        if self.at("-"):
            self.advance()
            operand = self._expr_unary()
            if isinstance(operand, exprs.Const) and isinstance(operand.value, int):
                return exprs.Const(-operand.value)
            return exprs.Arith("-", exprs.Const(0), operand)
        return self._expr_atom()

    def _expr_atom(self) -> Expr:
        if self.at("int"):
            return exprs.Const(int(self.advance().text))
        if self.at("("):
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if self.at_keyword("if"):
            return self.parse_expr()
        if self.at("ident"):
            tok = self.advance()
            if tok.text in KEYWORDS:
                raise ParseError(f"keyword {tok.text!r} in expression", tok.span)
            return exprs.Var(tok.text)
        raise self.error(f"unexpected {self.describe(self.current)}",
                         expected=("expression",))

    # ---- model files ---------------------------------------------------

    def parse_model(self) -> ConstrainedModel:
        self.expect_keyword("model")
        name = self.parse_name("model name").text
        exogenous: list[tuple[str, Range, SourceSpan]] = []
        endogenous: list[tuple[str, Range, SourceSpan]] = []
        equations: list[tuple[str, Expr, SourceSpan]] = []
        predicates: list[Expr] = []
        extensional: list[ExtendedState] | None = None

        while not self.at("eof"):
            if self.at_keyword("exogenous") or self.at_keyword("endogenous"):
                which = self.advance().text
                tok = self.parse_name("variable name")
                self.expect(":")
                rng = self.parse_range()
                target = exogenous if which == "exogenous" else endogenous
                target.append((tok.text, rng, tok.span))
            elif self.at_keyword("eq"):
                self.advance()
                tok = self.parse_name("variable name")
                self.expect("=")
                equations.append((tok.text, self.parse_expr(), tok.span))
            elif self.at_keyword("constraint"):
                self.advance()
                predicates.append(self.parse_expr())
            elif self.at_keyword("states"):
                self.advance()
                if extensional is None:
                    extensional = []
                extensional.extend(self.parse_states_block())
            else:
                raise self.error(
                    f"unexpected {self.describe(self.current)}",
                    expected=("exogenous", "endogenous", "eq", "constraint",
                              "states"))

        report = ValidationReport()
        seen: set[str] = set()
        for var, _, span in exogenous + endogenous:
            if var in seen:
                report.add("duplicate-declaration",
                           f"variable {var!r} declared twice", var, span)
            seen.add(var)
        eq_seen: set[str] = set()
        for var, _, span in equations:
            if var in eq_seen:
                report.add("duplicate-equation",
                           f"variable {var!r} has two equations", var, span)
            eq_seen.add(var)
        if report:
            raise ModelError(report)

        sig = Signature({var: rng for var, rng, _ in exogenous},
                        {var: rng for var, rng, _ in endogenous})
        constraints = ConstraintSet(
            predicates=tuple(predicates),
            extensional=tuple(extensional) if extensional is not None else None)
        return ConstrainedModel(signature=sig,
                                equations={var: e for var, e, _ in equations},
                                constraints=constraints,
                                name=name)

    def parse_range(self) -> Range:
        if self.at("{"):
            self.advance()
            values: list[Value] = []
            if not self.at("}"):
                values.append(self.parse_value())
                while self.at(","):
                    self.advance()
                    values.append(self.parse_value())
            self.expect("}")
            return Range(tuple(values))
        lo = self.parse_int()
        self.expect("..")
        hi = self.parse_int()
        return Range(tuple(range(lo, hi + 1)))

    def parse_states_block(self) -> list[ExtendedState]:
        self.expect("{")
        states: list[ExtendedState] = []
        if not self.at("}"):
            states.append(self.parse_extstate())
            while self.at(","):
                self.advance()
                states.append(self.parse_extstate())
        self.expect("}")
        return states

    def parse_extstate(self) -> ExtendedState:
        # The split into context vs state happens against the signature
        # once the whole file is read; store everything in `state` raw.
        self.expect("(")
        assignment: dict[str, Value] = {}
        while True:
            tok = self.parse_name("variable name")
            self.expect("=")
            if tok.text in assignment:
                raise ParseError(f"variable {tok.text!r} assigned twice in "
                                 f"one state", tok.span)
            assignment[tok.text] = self.parse_value()
            if not self.at(","):
                break
            self.advance()
        self.expect(")")
        return ExtendedState(context={}, state=assignment)

    # ---- formulas --------------------------------------------------------

    def parse_cform(self) -> Formula:
        left = self._cform_implies()
        while self.at("<->"):
            self.advance()
            left = formulas.iff(left, self._cform_implies())
        return left

    def _cform_implies(self) -> Formula:
        left = self._cform_or()
        if self.at("->"):
            self.advance()
            return formulas.implies(left, self._cform_implies())
        return left

    def _cform_or(self) -> Formula:
        left = self._cform_and()
        while self.at("|"):
            self.advance()
            left = formulas.Or(left, self._cform_and())
        return left

    def _cform_and(self) -> Formula:
        left = self._cform_unary()
        while self.at("&"):
            self.advance()
            left = formulas.And(left, self._cform_unary())
        return left

    def _cform_unary(self) -> Formula:
        if self.at("!"):
            self.advance()
            return formulas.Not(self._cform_unary())
        if self.at("("):
            self.advance()
            inner = self.parse_cform()
            self.expect(")")
            return inner
        if self.at("[") or self.at("<"):
            opener = self.advance().text
            closer = "]" if opener == "[" else ">"
            spec = self.parse_spec_items(stop=closer)
            self.expect(closer)
            body = self._sform_unary()
            mode = formulas.BOX if opener == "[" else formulas.DIAMOND
            return formulas.Basic(mode, spec, body)
        raise self.error(f"unexpected {self.describe(self.current)}",
                         expected=("[", "<", "!", "("))

    def parse_sform(self) -> Formula:
        left = self._sform_implies()
        while self.at("<->"):
            self.advance()
            left = formulas.iff(left, self._sform_implies())
        return left

    def _sform_implies(self) -> Formula:
        left = self._sform_or()
        if self.at("->"):
            self.advance()
            return formulas.implies(left, self._sform_implies())
        return left

    def _sform_or(self) -> Formula:
        left = self._sform_and()
        while self.at("|"):
            self.advance()
            left = formulas.Or(left, self._sform_and())
        return left

    def _sform_and(self) -> Formula:
        left = self._sform_unary()
        while self.at("&"):
            self.advance()
            left = formulas.And(left, self._sform_unary())
        return left

    def _sform_unary(self) -> Formula:
        if self.at("!"):
            self.advance()
            return formulas.Not(self._sform_unary())
        if self.at("("):
            self.advance()
            inner = self.parse_sform()
            self.expect(")")
            return inner
        if self.at_keyword("true"):
            self.advance()
            return formulas.BoolLit(True)
        if self.at_keyword("false"):
            self.advance()
            return formulas.BoolLit(False)
        if self.at("ident"):
            name = self.parse_name("variable name").text
            self.expect("=")
            return formulas.PrimitiveEvent(name, self.parse_value())
        raise self.error(f"unexpected {self.describe(self.current)}",
                         expected=("true", "false", "variable", "!", "("))

    def parse_spec_items(self, stop: str) -> InterventionSpec:
        disconnect: list[str] = []
        assignments: list[tuple[str, Value]] = []
        if self.at_keyword("disc"):
            self.advance()
            self.expect("(")
            if not self.at(")"):
                disconnect.append(self.parse_name("variable name").text)
                while self.at(","):
                    self.advance()
                    disconnect.append(self.parse_name("variable name").text)
            self.expect(")")
            if self.at(","):
                self.advance()
        while not self.at(stop):
            name = self.parse_name("variable name").text
            self.expect("<-")
            assignments.append((name, self.parse_value()))
            if self.at(","):
                self.advance()
            else:
                break
        return InterventionSpec(frozenset(disconnect), tuple(assignments))

    # ---- contexts ---------------------------------------------------------

    def parse_context_items(self) -> dict[str, Value]:
        out: dict[str, Value] = {}
        if self.at("eof"):
            return out
        while True:
            tok = self.parse_name("variable name")
            self.expect("=")
            if tok.text in out:
                raise ParseError(f"variable {tok.text!r} assigned twice",
                                 tok.span)
            out[tok.text] = self.parse_value()
            if not self.at(","):
                break
            self.advance()
        return out


def _symbol_vocabulary(sig: Signature) -> frozenset[str]:
    return frozenset(v for rng in sig.all_ranges.values()
                     for v in rng.values if isinstance(v, str))


def _resolve_symbols(expr: Expr, sig: Signature,
                     vocab: frozenset[str]) -> Expr:
    # An identifier in an expression names a variable when declared;
    # otherwise, if it occurs as a value of some range, it is a symbolic
    # constant. Anything else stays a variable reference so validation
    # reports it as unknown.
    if isinstance(expr, exprs.Var):
        if expr.name not in sig.all_ranges and expr.name in vocab:
            return exprs.Const(expr.name)
        return expr
    if isinstance(expr, exprs.Const):
        return expr
    if isinstance(expr, (exprs.Arith, exprs.Compare, exprs.BoolOp)):
        return type(expr)(expr.op,
                          _resolve_symbols(expr.left, sig, vocab),
                          _resolve_symbols(expr.right, sig, vocab))
    if isinstance(expr, exprs.Not):
        return exprs.Not(_resolve_symbols(expr.operand, sig, vocab))
    if isinstance(expr, exprs.If):
        return exprs.If(_resolve_symbols(expr.cond, sig, vocab),
                        _resolve_symbols(expr.then, sig, vocab),
                        _resolve_symbols(expr.orelse, sig, vocab))
    raise TypeError(f"not an expression: {expr!r}")


def parse_model(text: str) -> ConstrainedModel:
    """Parse a model file. Raises ParseError on syntax errors and
    ModelError for duplicate declarations; run `validate_model` on the
    result for the remaining well-formedness checks."""
    parser = _Parser(text)
    model = parser.parse_model()
    parser.expect_eof()
    model = _split_extensional(model)
    vocab = _symbol_vocabulary(model.signature)
    if vocab:
        sig = model.signature
        equations = {name: _resolve_symbols(eq, sig, vocab)
                     for name, eq in model.equations.items()}
        predicates = tuple(_resolve_symbols(p, sig, vocab)
                           for p in model.constraints.predicates)
        model = ConstrainedModel(
            sig, equations,
            ConstraintSet(predicates, model.constraints.extensional),
            model.name)
    return model


def _split_extensional(model: ConstrainedModel) -> ConstrainedModel:
    # `states` blocks are parsed with all assignments lumped together;
    # divide each into context vs state now that the signature is known.
    if model.constraints.extensional is None:
        return model
    sig = model.signature
    fixed = []
    for es in model.constraints.extensional:
        merged = es.env
        context = {n: merged[n] for n in sig.exo_names if n in merged}
        state = {n: merged[n] for n in sig.endo_names if n in merged}
        extra = {n: v for n, v in merged.items()
                 if n not in context and n not in state}
        fixed.append(ExtendedState(context, {**state, **extra}))
    constraints = ConstraintSet(model.constraints.predicates, tuple(fixed))
    return ConstrainedModel(model.signature, model.equations, constraints,
                            model.name)


def parse_expr(text: str) -> Expr:
    """Parse a bare expression (equation right-hand side or constraint)."""
    parser = _Parser(text)
    expr = parser.parse_expr()
    parser.expect_eof()
    return expr


def parse_formula(text: str, sig: Signature, *,
                  validate: bool = True) -> Formula:
    """Parse a causal formula. With `validate`, raise FormulaError when
    the result fails well-formedness against `sig`."""
    parser = _Parser(text)
    formula = parser.parse_cform()
    parser.expect_eof()
    if validate:
        report = formulas.well_formed(formula, sig)
        if report:
            raise FormulaError(report)
    return formula


def parse_spec(text: str, sig: Signature, *,
               validate: bool = True) -> InterventionSpec:
    """Parse a bare intervention spec such as `disc(LDL), TOT <- 12`."""
    parser = _Parser(text)
    spec = parser.parse_spec_items(stop="eof")
    parser.expect_eof()
    if validate:
        probe = formulas.Basic(formulas.BOX, spec, formulas.BoolLit(True))
        report = formulas.well_formed(probe, sig)
        if report:
            raise FormulaError(report)
    return spec


def parse_context(text: str, sig: Signature, *,
                  validate: bool = True) -> Context:
    """Parse `NAME=value, ...` into a context; with `validate`, require a
    total in-range assignment of exactly the exogenous variables."""
    parser = _Parser(text)
    out = parser.parse_context_items()
    parser.expect_eof()
    if validate:
        report = ValidationReport()
        for name, value in out.items():
            rng = sig.exogenous.get(name)
            if rng is None:
                kind = ("endogenous" if name in sig.endogenous
                        else "undeclared")
                report.add("unknown-variable",
                           f"context assigns {kind} variable {name!r}")
            elif value not in rng:
                report.add("out-of-range",
                           f"{name} = {value!r} outside its range")
        for name in sig.exo_names:
            if name not in out:
                report.add("partial-context",
                           f"context does not assign {name!r}")
        if report:
            raise FormulaError(report)
    return out


def parse_links(text: str, sig: Signature) -> ConstraintSet:
    """Parse a links file: zero or more `constraint <expr>` declarations."""
    parser = _Parser(text)
    vocab = _symbol_vocabulary(sig)
    predicates: list[Expr] = []
    while not parser.at("eof"):
        parser.expect_keyword("constraint")
        predicates.append(_resolve_symbols(parser.parse_expr(), sig, vocab))
    report = ValidationReport()
    for i, predicate in enumerate(predicates):
        unknown = exprs.free_vars(predicate) - set(sig.all_ranges)
        for name in sorted(unknown):
            report.add("unknown-variable",
                       f"link #{i + 1} references undeclared variable {name!r}")
    if report:
        raise ModelError(report)
    return ConstraintSet(predicates=tuple(predicates))
