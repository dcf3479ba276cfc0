"""Deterministic rendering of models, formulas, and expressions.

`parse(render(x))` returns a structurally identical AST (after
normalization, for formulas). Lookup-table equations have no literal
surface syntax; they render as a chain of conditionals that evaluates
identically, so re-parsing a rendered model preserves its semantics even
when it changes the equation representation.
"""

from __future__ import annotations

from . import exprs, formulas
from .exprs import Expr, Value
from .formulas import Formula, InterventionSpec
from .model import (ConstrainedModel, Equation, ExtendedState, Range,
                    Signature, TableEquation)

# Expression precedence levels, loosest first.
_LEVEL_IF = 0
_LEVEL_IMPLIES = 1
_LEVEL_OR = 2
_LEVEL_AND = 3
_LEVEL_COMPARE = 4
_LEVEL_ADD = 5
_LEVEL_MUL = 6
_LEVEL_UNARY = 7


def render_value(value: Value) -> str:
    return str(value)


def _expr_level(expr: Expr) -> int:
    if isinstance(expr, (exprs.Const, exprs.Var)):
        return _LEVEL_UNARY + 1
    if isinstance(expr, exprs.Not):
        return _LEVEL_UNARY
    if isinstance(expr, exprs.Arith):
        return _LEVEL_MUL if expr.op in ("*", "/", "%") else _LEVEL_ADD
    if isinstance(expr, exprs.Compare):
        return _LEVEL_COMPARE
    if isinstance(expr, exprs.BoolOp):
        if expr.op == "&":
            return _LEVEL_AND
        if expr.op == "|":
            return _LEVEL_OR
        return _LEVEL_IMPLIES
    if isinstance(expr, exprs.If):
        return _LEVEL_IF
    raise TypeError(f"not an expression: {expr!r}")


def render_expr(expr: Expr) -> str:
    return _render_expr(expr, 0)


def _wrap(text: str, level: int, minimum: int) -> str:
    return f"({text})" if level < minimum else text


def _render_expr(expr: Expr, minimum: int) -> str:
    level = _expr_level(expr)
    if isinstance(expr, exprs.Const):
        return render_value(expr.value)
    if isinstance(expr, exprs.Var):
        return expr.name
    if isinstance(expr, exprs.Not):
        return _wrap("!" + _render_expr(expr.operand, _LEVEL_UNARY),
                     level, minimum)
    if isinstance(expr, exprs.If):
        text = (f"if {_render_expr(expr.cond, 0)}"
                f" then {_render_expr(expr.then, 0)}"
                f" else {_render_expr(expr.orelse, 0)}")
        return _wrap(text, level, minimum)
    if isinstance(expr, (exprs.Arith, exprs.Compare, exprs.BoolOp)):
        # Left-associative chains render without parens on the left;
        # implication is right-associative. Comparison is non-associative,
        # so both sides must bind tighter.
        if isinstance(expr, exprs.Compare):
            left = _render_expr(expr.left, level + 1)
            right = _render_expr(expr.right, level + 1)
        elif isinstance(expr, exprs.BoolOp) and expr.op == "->":
            left = _render_expr(expr.left, level + 1)
            right = _render_expr(expr.right, level)
        else:
            left = _render_expr(expr.left, level)
            right = _render_expr(expr.right, level + 1)
        return _wrap(f"{left} {expr.op} {right}", level, minimum)
    raise TypeError(f"not an expression: {expr!r}")


def render_equation(equation: Equation) -> str:
    if isinstance(equation, TableEquation):
        return render_expr(table_to_expr(equation))
    return render_expr(equation)


def table_to_expr(table: TableEquation) -> Expr:
    """Equivalent conditional chain; the last entry becomes the final else."""
    entries = list(table.table.items())
    if not entries:
        raise ValueError("empty lookup table")
    if not table.inputs:
        return exprs.Const(entries[0][1])

    def condition(key: tuple[Value, ...]) -> Expr:
        clause: Expr | None = None
        for name, value in zip(table.inputs, key):
            piece = exprs.Compare("==", exprs.Var(name), exprs.Const(value))
            clause = piece if clause is None else exprs.BoolOp("&", clause, piece)
        return clause

    out: Expr = exprs.Const(entries[-1][1])
    for key, value in reversed(entries[:-1]):
        out = exprs.If(condition(key), exprs.Const(value), out)
    return out


def render_range(rng: Range) -> str:
    values = rng.values
    if (len(values) > 1 and all(isinstance(v, int) for v in values)
            and values == tuple(range(values[0], values[-1] + 1))):
        return f"{values[0]}..{values[-1]}"
    return "{" + ", ".join(render_value(v) for v in values) + "}"


def render_extstate(es: ExtendedState, sig: Signature) -> str:
    names = sig.exo_names + sig.endo_names
    inner = ", ".join(f"{n} = {render_value(es.env[n])}" for n in names)
    return f"({inner})"


def render_model(model: ConstrainedModel) -> str:
    sig = model.signature
    lines = [f"model {model.name}"]
    for name in sig.exo_names:
        lines.append(f"exogenous {name} : {render_range(sig.exogenous[name])}")
    for name in sig.endo_names:
        lines.append(f"endogenous {name} : {render_range(sig.endogenous[name])}")
    for name in sig.endo_names:
        if name in model.equations:
            lines.append(f"eq {name} = {render_equation(model.equations[name])}")
    for name in model.equations:
        if name not in sig.endogenous:  # invalid but still renderable
            lines.append(f"eq {name} = {render_equation(model.equations[name])}")
    for predicate in model.constraints.predicates:
        lines.append(f"constraint {render_expr(predicate)}")
    if model.constraints.extensional is not None:
        if model.constraints.extensional:
            body = ",\n  ".join(render_extstate(es, sig)
                                for es in model.constraints.extensional)
            lines.append("states {\n  " + body + "\n}")
        else:
            lines.append("states { }")
    return "\n".join(lines) + "\n"


def render_spec(spec: InterventionSpec, sig: Signature | None = None) -> str:
    parts = []
    if spec.disconnect:
        if sig is not None:
            order = {name: i for i, name in enumerate(sig.endo_names)}
            names = sorted(spec.disconnect,
                           key=lambda n: (order.get(n, -1), n))
        else:
            names = sorted(spec.disconnect)
        parts.append("disc(" + ", ".join(names) + ")")
    parts.extend(f"{name} <- {render_value(value)}"
                 for name, value in spec.assignments)
    return ", ".join(parts)


# Formula precedence levels, loosest first.
_F_OR = 1
_F_AND = 2
_F_UNARY = 3


def _formula_level(f: Formula) -> int:
    if isinstance(f, formulas.Or):
        return _F_OR
    if isinstance(f, formulas.And):
        return _F_AND
    if isinstance(f, formulas.Not):
        return _F_UNARY
    return _F_UNARY + 1


def render_formula(f: Formula, sig: Signature | None = None) -> str:
    return _render_formula(f, 0, sig)


def _render_formula(f: Formula, minimum: int, sig: Signature | None) -> str:
    level = _formula_level(f)
    if isinstance(f, formulas.BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, formulas.PrimitiveEvent):
        return f"{f.variable} = {render_value(f.value)}"
    if isinstance(f, formulas.Not):
        return _wrap("!" + _render_formula(f.operand, _F_UNARY, sig),
                     level, minimum)
    if isinstance(f, formulas.And):
        left = _render_formula(f.left, _F_AND, sig)
        right = _render_formula(f.right, _F_AND + 1, sig)
        return _wrap(f"{left} & {right}", level, minimum)
    if isinstance(f, formulas.Or):
        left = _render_formula(f.left, _F_OR, sig)
        right = _render_formula(f.right, _F_OR + 1, sig)
        return _wrap(f"{left} | {right}", level, minimum)
    if isinstance(f, formulas.Basic):
        opener, closer = ("[", "]") if f.mode == formulas.BOX else ("<", ">")
        spec = render_spec(f.spec, sig)
        body = _render_body(f.body, sig)
        inner = spec if spec else " "
        return f"{opener}{inner}{closer} {body}"
    raise TypeError(f"not a formula: {f!r}")


def _render_body(body: Formula, sig: Signature | None) -> str:
    # Prefix bodies parse at unary level, so anything looser gets parens.
    if _formula_level(body) <= _F_AND:
        return "(" + _render_formula(body, 0, sig) + ")"
    if isinstance(body, formulas.PrimitiveEvent):
        return "(" + _render_formula(body, 0, sig) + ")"
    return _render_formula(body, _F_UNARY, sig)
