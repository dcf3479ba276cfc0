"""Core model objects: signatures, equations, constraints, and models.

A model is a triple of a signature (exogenous and endogenous variables with
finite value ranges), a partial set of structural equations (not every
endogenous variable needs one), and a constraint set carving out the
admissible context/state pairs. All objects are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Union

from . import exprs
from .diagnostics import CombineError, EvaluationError, ValidationReport
from .exprs import Expr, Value

Context = dict[str, Value]
State = dict[str, Value]


@dataclass(frozen=True)
class Range:
    """Finite, ordered set of possible values for one variable.

    Declaration order is preserved and defines the enumeration order used
    everywhere (solution listings, expansion order, canonical sorting).
    """

    values: tuple[Value, ...]

    @cached_property
    def index(self) -> dict[Value, int]:
        return {v: i for i, v in enumerate(self.values)}

    @cached_property
    def kind(self) -> str:
        kinds = {"int" if isinstance(v, int) else "sym" for v in self.values}
        if len(kinds) == 1:
            return kinds.pop()
        return "mixed"

    def __contains__(self, value: Value) -> bool:
        return value in self.index

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def int_range(lo: int, hi: int) -> Range:
    """Inclusive integer interval; empty when lo > hi."""
    return Range(tuple(range(lo, hi + 1)))


@dataclass(frozen=True)
class Signature:
    """Variable declarations: exogenous and endogenous names with ranges.

    Endogenous declaration order is the canonical variable order used to
    normalize interventions and to enumerate states.
    """

    exogenous: dict[str, Range]
    endogenous: dict[str, Range]

    def __post_init__(self):
        clash = set(self.exogenous) & set(self.endogenous)
        if clash:
            raise ValueError(f"variables declared twice: {sorted(clash)}")

    @cached_property
    def exo_names(self) -> tuple[str, ...]:
        return tuple(self.exogenous)

    @cached_property
    def endo_names(self) -> tuple[str, ...]:
        return tuple(self.endogenous)

    @cached_property
    def endo_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.endogenous)}

    @cached_property
    def all_ranges(self) -> dict[str, Range]:
        return {**self.exogenous, **self.endogenous}

    @cached_property
    def var_kinds(self) -> dict[str, str]:
        return {name: r.kind for name, r in self.all_ranges.items()}

    def range_of(self, name: str) -> Range:
        return self.all_ranges[name]

    def states(self) -> Iterator[State]:
        """All endogenous assignments, lexicographic in declaration order."""
        names = self.endo_names
        for combo in itertools.product(*(self.endogenous[n].values for n in names)):
            yield dict(zip(names, combo))

    def contexts(self) -> Iterator[Context]:
        """All exogenous assignments, lexicographic in declaration order."""
        names = self.exo_names
        for combo in itertools.product(*(self.exogenous[n].values for n in names)):
            yield dict(zip(names, combo))

    def state_count(self) -> int:
        n = 1
        for r in self.endogenous.values():
            n *= len(r)
        return n

    def state_key(self, state: Mapping[str, Value]) -> tuple[int, ...]:
        """Sort key placing states in canonical enumeration order."""
        return tuple(self.endogenous[n].index[state[n]] for n in self.endo_names)


@dataclass(frozen=True)
class TableEquation:
    """A structural equation given extensionally as a lookup table.

    `inputs` are the variables the function reads (any subset of the other
    variables); `table` maps each combination of their values, in declared
    range order per input, to the output value. Generated models use this
    form; parsed models use expression equations.
    """

    inputs: tuple[str, ...]
    table: dict[tuple[Value, ...], Value]

    def __call__(self, env: Mapping[str, Value]) -> Value:
        key = tuple(env[name] for name in self.inputs)
        try:
            return self.table[key]
        except KeyError:
            raise EvaluationError(
                f"lookup table has no entry for {key!r}") from None


Equation = Union[Expr, TableEquation]


def eval_equation(equation: Equation, env: Mapping[str, Value]) -> Value:
    if isinstance(equation, TableEquation):
        return equation(env)
    return exprs.eval_expr(equation, env)


def equation_inputs(equation: Equation) -> frozenset[str]:
    if isinstance(equation, TableEquation):
        return frozenset(equation.inputs)
    return exprs.free_vars(equation)


@dataclass(frozen=True)
class ExtendedState:
    """A context (exogenous assignment) paired with a state (endogenous)."""

    context: Context
    state: State

    @cached_property
    def env(self) -> dict[str, Value]:
        return {**self.context, **self.state}

    def value_tuple(self, sig: Signature) -> tuple[Value, ...]:
        return tuple(self.env[n] for n in sig.exo_names + sig.endo_names)


@dataclass(frozen=True)
class ConstraintSet:
    """Admissible extended states, intensionally or extensionally.

    With `extensional` set, the explicit list *is* the constraint set and
    the predicates are ignored. An empty predicate tuple places no
    constraints at all; an empty (but present) extensional tuple admits
    nothing.
    """

    predicates: tuple[Expr, ...] = ()
    extensional: tuple[ExtendedState, ...] | None = None

    def is_unconstrained(self) -> bool:
        return self.extensional is None and not self.predicates


@dataclass(frozen=True)
class ConstrainedModel:
    """A signature, a partial equation set, and a constraint set."""

    signature: Signature
    equations: dict[str, Equation]
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    name: str = "model"

    @cached_property
    def _extensional_tuples(self) -> frozenset[tuple[Value, ...]] | None:
        if self.constraints.extensional is None:
            return None
        return frozenset(es.value_tuple(self.signature)
                         for es in self.constraints.extensional)

    @cached_property
    def _plan_cache(self) -> dict:
        # Per-model cache of pruning plans, keyed by intervention shape;
        # see semantics.solutions_fast.
        return {}


def in_constraints(model: ConstrainedModel, es: ExtendedState, *,
                   strict: bool = True) -> bool:
    """Membership of `es` in the model's constraint set.

    With `strict` (the default) an expression evaluation error while
    checking a predicate propagates; with strict=False such a state is
    treated as outside the constraint set.
    """
    tuples = model._extensional_tuples
    if tuples is not None:
        return es.value_tuple(model.signature) in tuples
    env = es.env
    for predicate in model.constraints.predicates:
        try:
            if not exprs.eval_expr(predicate, env):
                return False
        except EvaluationError:
            if strict:
                raise
            return False
    return True


def satisfies_equations(equations: Mapping[str, Equation],
                        es: ExtendedState) -> bool:
    """True iff `es` satisfies every equation in the (partial) map."""
    env = es.env
    for name, equation in equations.items():
        if es.state[name] != eval_equation(equation, env):
            return False
    return True


def enumerate_extended_states(model: ConstrainedModel,
                              context: Context) -> Iterator[ExtendedState]:
    """Every state paired with the fixed context, in canonical order."""
    for state in model.signature.states():
        yield ExtendedState(context, state)


def validate_model(model: ConstrainedModel) -> ValidationReport:
    """Check well-formedness; an empty report means the model is valid.

    Finds: empty ranges, equations for undeclared or exogenous variables,
    self-referential equations, unknown variable references, kind-mismatched
    operators, equations that can produce an out-of-range value for some
    assignment of the variables they read, non-boolean constraint
    predicates, and malformed extensional states.
    """
    report = ValidationReport()
    sig = model.signature

    for name, rng in sig.all_ranges.items():
        if len(rng) == 0:
            report.add("empty-range", f"variable {name!r} has an empty range",
                       location=name)
        if len(set(rng.values)) != len(rng.values):
            report.add("duplicate-value",
                       f"range of {name!r} repeats a value", location=name)

    var_kinds = sig.var_kinds
    for name, equation in model.equations.items():
        location = f"eq {name}"
        if name not in sig.endogenous:
            which = "exogenous" if name in sig.exogenous else "undeclared"
            report.add("bad-equation-target",
                       f"equation for {which} variable {name!r}", location)
            continue
        inputs = equation_inputs(equation)
        if name in inputs:
            report.add("self-reference",
                       f"equation for {name!r} references {name!r}", location)
        unknown = inputs - set(sig.all_ranges)
        for missing in sorted(unknown):
            report.add("unknown-variable",
                       f"equation for {name!r} references undeclared "
                       f"variable {missing!r}", location)
        if isinstance(equation, TableEquation):
            _check_table(model, name, equation, report)
            continue
        problems: list[str] = []
        kind = exprs.infer_kind(equation, var_kinds, problems)
        for problem in problems:
            report.add("kind-mismatch", problem, location)
        if kind == "bool":
            report.add("kind-mismatch",
                       f"equation for {name!r} produces a boolean, not a value",
                       location)
        if problems or kind == "bool" or unknown or name in inputs:
            continue
        _check_closure(model, name, equation, inputs, report)

    for i, predicate in enumerate(model.constraints.predicates):
        location = f"constraint #{i + 1}"
        problems = []
        kind = exprs.infer_kind(predicate, var_kinds, problems)
        for problem in problems:
            report.add("kind-mismatch", problem, location)
        if not problems and kind != "bool":
            report.add("kind-mismatch",
                       "constraint predicate is not boolean", location)

    if model.constraints.extensional is not None:
        for i, es in enumerate(model.constraints.extensional):
            location = f"state #{i + 1}"
            for name in sig.all_ranges:
                env = es.env
                if name not in env:
                    report.add("partial-state",
                               f"extended state missing {name!r}", location)
                elif env[name] not in sig.range_of(name):
                    report.add("out-of-range",
                               f"{name} = {env[name]!r} outside its range",
                               location)
            for name in es.env:
                if name not in sig.all_ranges:
                    report.add("unknown-variable",
                               f"extended state assigns undeclared "
                               f"variable {name!r}", location)
    return report


def _check_closure(model: ConstrainedModel, name: str, equation: Expr,
                   inputs: frozenset[str], report: ValidationReport) -> None:
    # Exhaustive over the variables the expression actually reads; values of
    # unreferenced variables cannot change the result.
    sig = model.signature
    target = sig.endogenous[name]
    ordered = sorted(inputs)
    for combo in itertools.product(*(sig.range_of(v).values for v in ordered)):
        env = dict(zip(ordered, combo))
        try:
            result = exprs.eval_expr(equation, env)
        except EvaluationError as err:
            report.add("evaluation-error",
                       f"equation for {name!r} fails on {env!r}: {err}",
                       location=f"eq {name}")
            return
        if result not in target:
            report.add("out-of-range",
                       f"equation for {name!r} yields {result!r} ∉ range "
                       f"when {env!r}", location=f"eq {name}")
            return


def _check_table(model: ConstrainedModel, name: str, equation: TableEquation,
                 report: ValidationReport) -> None:
    sig = model.signature
    target = sig.endogenous.get(name)
    if target is None:
        return
    known = [v for v in equation.inputs if v in sig.all_ranges]
    if len(known) != len(equation.inputs):
        return  # unknown inputs already reported
    expected = 1
    for v in known:
        expected *= len(sig.range_of(v))
    if len(equation.table) != expected:
        report.add("partial-table",
                   f"lookup table for {name!r} has {len(equation.table)} "
                   f"entries, expected {expected}", location=f"eq {name}")
    for key, value in equation.table.items():
        if value not in target:
            report.add("out-of-range",
                       f"lookup table for {name!r} yields {value!r} ∉ range "
                       f"at {key!r}", location=f"eq {name}")
            return


def _extensional_to_predicate(constraints: ConstraintSet,
                              sig: Signature) -> tuple[Expr, ...]:
    """Rewrite an extensional constraint set as one disjunctive predicate."""
    if constraints.extensional is None:
        return constraints.predicates
    states = constraints.extensional
    if not states:
        return (exprs.Compare("==", exprs.Const(0), exprs.Const(1)),)
    alternatives = []
    names = sig.exo_names + sig.endo_names
    for es in states:
        env = es.env
        clause: Expr = None
        for name in names:
            piece = exprs.Compare("==", exprs.Var(name), exprs.Const(env[name]))
            clause = piece if clause is None else exprs.BoolOp("&", clause, piece)
        alternatives.append(clause)
    combined = alternatives[0]
    for clause in alternatives[1:]:
        combined = exprs.BoolOp("|", combined, clause)
    return (combined,)


def combine(a: ConstrainedModel, b: ConstrainedModel,
            links: ConstraintSet = ConstraintSet(),
            name: str | None = None) -> ConstrainedModel:
    """Merge two models over compatible signatures into one.

    Endogenous variables must be disjoint; exogenous variables with the
    same name are shared and must declare identical ranges. The combined
    constraint set is the conjunction of both models' constraints plus the
    linking constraints (so it denotes the intersection of the admissible
    sets, extended to the union signature).
    """
    endo_clash = set(a.signature.endogenous) & set(b.signature.endogenous)
    if endo_clash:
        raise CombineError(
            f"endogenous variables declared in both models: {sorted(endo_clash)}")
    cross = ((set(a.signature.endogenous) & set(b.signature.exogenous))
             | (set(b.signature.endogenous) & set(a.signature.exogenous)))
    if cross:
        raise CombineError(
            f"variables declared endogenous in one model and exogenous "
            f"in the other: {sorted(cross)}")
    exogenous = dict(a.signature.exogenous)
    for var, rng in b.signature.exogenous.items():
        if var in exogenous and exogenous[var] != rng:
            raise CombineError(
                f"shared exogenous variable {var!r} declares different ranges")
        exogenous.setdefault(var, rng)

    sig = Signature(exogenous,
                    {**a.signature.endogenous, **b.signature.endogenous})
    if links.extensional is not None:
        raise CombineError("linking constraints must be predicates")
    for i, predicate in enumerate(links.predicates):
        unknown = exprs.free_vars(predicate) - set(sig.all_ranges)
        if unknown:
            raise CombineError(
                f"linking constraint #{i + 1} references unknown "
                f"variables: {sorted(unknown)}")

    predicates = (_extensional_to_predicate(a.constraints, a.signature)
                  + _extensional_to_predicate(b.constraints, b.signature)
                  + links.predicates)
    return ConstrainedModel(
        signature=sig,
        equations={**a.equations, **b.equations},
        constraints=ConstraintSet(predicates=predicates),
        name=name or f"{a.name}_{b.name}",
    )
