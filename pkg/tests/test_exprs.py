import pytest

from ccm.diagnostics import EvaluationError
from ccm.exprs import (Arith, BoolOp, Compare, Const, If, Not, Var,
                       eval_expr, free_vars, infer_kind)


def test_arithmetic():
    expr = Arith("+", Arith("*", Const(5), Var("TF")), Const(0))
    assert eval_expr(expr, {"TF": 95}) == 475
    assert eval_expr(Arith("/", Const(7), Const(2)), {}) == 3
    assert eval_expr(Arith("%", Const(7), Const(2)), {}) == 1
    assert eval_expr(Arith("-", Const(0), Var("x")), {"x": 4}) == -4


def test_division_by_zero_is_hard_error():
    with pytest.raises(EvaluationError):
        eval_expr(Arith("/", Const(1), Var("x")), {"x": 0})
    with pytest.raises(EvaluationError):
        eval_expr(Arith("%", Const(1), Const(0)), {})


def test_symbols_compare_only_by_equality():
    assert eval_expr(Compare("==", Var("c"), Const("red")), {"c": "red"})
    assert eval_expr(Compare("!=", Var("c"), Const("blue")), {"c": "red"})
    with pytest.raises(EvaluationError):
        eval_expr(Compare("<", Var("c"), Const("red")), {"c": "red"})
    with pytest.raises(EvaluationError):
        eval_expr(Arith("+", Var("c"), Const(1)), {"c": "red"})


def test_integers_never_equal_symbols():
    assert not eval_expr(Compare("==", Const(1), Const("s1")), {})


def test_conditional_and_boolean():
    expr = If(Compare(">=", Var("TC"), Const(40)), Const(1), Const(0))
    assert eval_expr(expr, {"TC": 41}) == 1
    assert eval_expr(expr, {"TC": 35}) == 0
    imp = BoolOp("->", Compare("==", Var("a"), Const(0)),
                 Compare("==", Var("b"), Const(1)))
    assert eval_expr(imp, {"a": 1, "b": 0}) is True
    assert eval_expr(imp, {"a": 0, "b": 0}) is False
    true_cmp = Compare("==", Const(1), Const(1))
    false_cmp = Compare("==", Const(0), Const(1))
    assert eval_expr(Not(BoolOp("&", true_cmp, false_cmp)), {}) is True


def test_unbound_variable():
    with pytest.raises(EvaluationError):
        eval_expr(Var("nope"), {})


def test_free_vars():
    expr = If(Compare(">=", Var("TC"), Const(40)), Var("A"),
              Arith("+", Var("B"), Const(1)))
    assert free_vars(expr) == {"TC", "A", "B"}
    assert free_vars(Const(3)) == frozenset()


def test_kind_inference():
    kinds = {"TC": "int", "c": "sym", "m": "mixed"}
    problems = []
    assert infer_kind(Compare("<", Var("TC"), Const(40)), kinds,
                      problems) == "bool"
    assert problems == []
    infer_kind(Arith("+", Var("c"), Const(1)), kinds, problems)
    assert any("arithmetic" in p for p in problems)
    problems = []
    infer_kind(Compare("<=", Var("m"), Const(3)), kinds, problems)
    assert any("ordered comparison" in p for p in problems)
    problems = []
    infer_kind(BoolOp("&", Compare("==", Var("TC"), Const(1)), Var("TC")),
               kinds, problems)
    assert any("boolean" in p for p in problems)
    problems = []
    infer_kind(Var("zzz"), kinds, problems)
    assert any("unknown variable" in p for p in problems)
