"""Expression AST for structural equations and constraint predicates.

Values are exact: Python ints for numbers, interned strings for symbolic
constants. There is no floating point anywhere in the language. Arithmetic
and ordered comparison are defined on ints only; symbols support equality
and inequality. Division is integer (floor) division and dividing or taking
a modulus by zero is a hard evaluation error, never a silent false.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .diagnostics import EvaluationError

Value = Union[int, str]

ARITH_OPS = ("+", "-", "*", "/", "%")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("&", "|", "->")


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Arith:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class BoolOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"


Expr = Union[Const, Var, Arith, Compare, BoolOp, Not, If]


def eval_expr(expr: Expr, env: Mapping[str, Value]):
    """Evaluate `expr` under the total assignment `env`.

    Returns an int, str, or bool. Raises EvaluationError for division or
    modulus by zero, arithmetic/ordering on non-integers, and boolean
    connectives applied to non-booleans.
    """
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        try:
            return env[expr.name]
        except KeyError:
            raise EvaluationError(f"unbound variable {expr.name!r}") from None
    if isinstance(expr, Arith):
        left = eval_expr(expr.left, env)
        right = eval_expr(expr.right, env)
        # bool is an int subclass; reject it so 'true + 1' cannot sneak through
        if type(left) is not int or type(right) is not int:
            raise EvaluationError(
                f"arithmetic {expr.op!r} on non-integer operands "
                f"({left!r}, {right!r})", env)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            if right == 0:
                raise EvaluationError("division by zero", env)
            return left // right
        if expr.op == "%":
            if right == 0:
                raise EvaluationError("modulus by zero", env)
            return left % right
        raise EvaluationError(f"unknown arithmetic operator {expr.op!r}")
    if isinstance(expr, Compare):
        left = eval_expr(expr.left, env)
        right = eval_expr(expr.right, env)
        if expr.op == "==":
            return left == right
        if expr.op == "!=":
            return left != right
        if type(left) is not int or type(right) is not int:
            raise EvaluationError(
                f"ordered comparison {expr.op!r} on non-integer operands "
                f"({left!r}, {right!r})", env)
        if expr.op == "<":
            return left < right
        if expr.op == "<=":
            return left <= right
        if expr.op == ">":
            return left > right
        if expr.op == ">=":
            return left >= right
        raise EvaluationError(f"unknown comparison operator {expr.op!r}")
    if isinstance(expr, BoolOp):
        left = eval_expr(expr.left, env)
        right = eval_expr(expr.right, env)
        if type(left) is not bool or type(right) is not bool:
            raise EvaluationError(
                f"boolean {expr.op!r} on non-boolean operands "
                f"({left!r}, {right!r})", env)
        if expr.op == "&":
            return left and right
        if expr.op == "|":
            return left or right
        if expr.op == "->":
            return (not left) or right
        raise EvaluationError(f"unknown boolean operator {expr.op!r}")
    if isinstance(expr, Not):
        operand = eval_expr(expr.operand, env)
        if type(operand) is not bool:
            raise EvaluationError(f"negation of non-boolean {operand!r}", env)
        return not operand
    if isinstance(expr, If):
        cond = eval_expr(expr.cond, env)
        if type(cond) is not bool:
            raise EvaluationError(f"non-boolean condition {cond!r}", env)
        return eval_expr(expr.then if cond else expr.orelse, env)
    raise TypeError(f"not an expression: {expr!r}")


def free_vars(expr: Expr) -> frozenset[str]:
    """Names of all variables referenced anywhere in `expr`."""
    if isinstance(expr, Const):
        return frozenset()
    if isinstance(expr, Var):
        return frozenset((expr.name,))
    if isinstance(expr, (Arith, Compare, BoolOp)):
        return free_vars(expr.left) | free_vars(expr.right)
    if isinstance(expr, Not):
        return free_vars(expr.operand)
    if isinstance(expr, If):
        return free_vars(expr.cond) | free_vars(expr.then) | free_vars(expr.orelse)
    raise TypeError(f"not an expression: {expr!r}")


# Static kinds: "int", "sym" (symbolic constant), "mixed" (range holds both),
# "bool". Kind errors mirror the evaluation errors above but are found
# without running the expression.

def _join(a: str, b: str) -> str:
    if a == b:
        return a
    if "bool" in (a, b):
        return "bool"  # caller reports the clash separately
    return "mixed"


def infer_kind(expr: Expr, var_kinds: Mapping[str, str], problems: list[str]) -> str:
    """Infer the kind of `expr`, appending a message per kind violation.

    `var_kinds` maps variable names to "int"/"sym"/"mixed". Unknown variables
    are reported and treated as "mixed" to avoid cascading errors.
    """
    if isinstance(expr, Const):
        return "int" if isinstance(expr.value, int) else "sym"
    if isinstance(expr, Var):
        kind = var_kinds.get(expr.name)
        if kind is None:
            problems.append(f"unknown variable {expr.name!r}")
            return "mixed"
        return kind
    if isinstance(expr, Arith):
        for side in (expr.left, expr.right):
            kind = infer_kind(side, var_kinds, problems)
            if kind != "int":
                problems.append(
                    f"arithmetic {expr.op!r} applied to non-integer operand")
        return "int"
    if isinstance(expr, Compare):
        left = infer_kind(expr.left, var_kinds, problems)
        right = infer_kind(expr.right, var_kinds, problems)
        if expr.op in ("==", "!="):
            if "bool" in (left, right):
                problems.append(f"equality {expr.op!r} applied to a boolean")
        else:
            for kind in (left, right):
                if kind != "int":
                    problems.append(
                        f"ordered comparison {expr.op!r} applied to "
                        f"non-integer operand")
        return "bool"
    if isinstance(expr, BoolOp):
        for side in (expr.left, expr.right):
            if infer_kind(side, var_kinds, problems) != "bool":
                problems.append(f"boolean {expr.op!r} applied to a non-boolean")
        return "bool"
    if isinstance(expr, Not):
        if infer_kind(expr.operand, var_kinds, problems) != "bool":
            problems.append("negation applied to a non-boolean")
        return "bool"
    if isinstance(expr, If):
        if infer_kind(expr.cond, var_kinds, problems) != "bool":
            problems.append("conditional with a non-boolean condition")
        then = infer_kind(expr.then, var_kinds, problems)
        orelse = infer_kind(expr.orelse, var_kinds, problems)
        return _join(then, orelse)
    raise TypeError(f"not an expression: {expr!r}")
