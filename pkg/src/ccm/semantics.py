"""The satisfaction relation: submodels, solution sets, formula evaluation.

A box `[disc(X), Y <- y] phi` holds at (model, context) iff `phi` holds in
every state that (a) lies in the constraint set together with the context
and (b) satisfies the submodel's equations, i.e. the model's equations with
the disconnected variables' equations deleted and the assigned variables'
equations replaced by constants. No solutions means the box is vacuously
true and the dual diamond false.

`solutions` enumerates the full state product and filters; `solutions_fast`
forward-evaluates equations whose dependency subgraph is acyclic and only
enumerates the rest. Both return identical solution lists in canonical
enumeration order; the naive form is the reference the fast form is tested
against. Everything here is pure and thread-safe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from . import exprs, formulas
from .diagnostics import EvaluationError
from .exprs import Const
from .formulas import Basic, Formula, InterventionSpec, normalize_spec
from .model import (ConstrainedModel, Context, Equation, ExtendedState, State,
                    enumerate_extended_states, eval_equation, equation_inputs,
                    in_constraints, satisfies_equations)


@dataclass(frozen=True)
class Submodel:
    """A model under an intervention: equations removed and pinned."""

    base: ConstrainedModel
    removed: frozenset[str]
    pinned: dict[str, object]

    @cached_property
    def effective_equations(self) -> dict[str, Equation]:
        out: dict[str, Equation] = {}
        for name, equation in self.base.equations.items():
            if name not in self.removed and name not in self.pinned:
                out[name] = equation
        for name, value in self.pinned.items():
            out[name] = Const(value)
        return out


@dataclass(frozen=True)
class SolutionSet:
    """All constraint-respecting solutions of an intervened model at a
    context, in canonical enumeration order."""

    context: Context
    spec: InterventionSpec
    states: tuple[State, ...]

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)


def submodel(model: ConstrainedModel, spec: InterventionSpec) -> Submodel:
    """Build the intervened model for a normalized spec.

    The constraint set is untouched: interventions never alter which
    extended states are admissible.
    """
    if not formulas.is_normalized(spec, model.signature):
        raise ValueError(f"intervention spec not normalized: {spec}")
    return Submodel(base=model,
                    removed=spec.disconnect,
                    pinned=dict(spec.assignments))


def _check_context(model: ConstrainedModel, context: Context) -> None:
    if set(context) != set(model.signature.exo_names):
        raise ValueError(
            f"context must assign exactly the exogenous variables "
            f"{model.signature.exo_names}, got {tuple(context)}")


def solutions(model: ConstrainedModel, context: Context,
              spec: InterventionSpec) -> SolutionSet:
    """Reference solution enumeration: filter the full state product.

    Constraint membership is checked before the equations, so an equation
    that would fail to evaluate on a state outside the constraint set never
    runs on it.
    """
    _check_context(model, context)
    sub = submodel(model, spec)
    effective = sub.effective_equations
    found: list[State] = []
    for es in enumerate_extended_states(model, context):
        if not in_constraints(model, es):
            continue
        if satisfies_equations(effective, es):
            found.append(es.state)
    return SolutionSet(dict(context), spec, tuple(found))


# ---- pruned enumeration ---------------------------------------------------

@dataclass(frozen=True)
class _Plan:
    """How to enumerate solutions for one intervention shape.

    `free` variables are enumerated over their ranges; `hoisted` equations
    depend on nothing enumerated and are evaluated once per call;
    `forward` equations are evaluated in dependency order per candidate;
    `filters` are the equations that cannot be forwarded (cyclic
    dependencies) and are checked per candidate.
    """

    free: tuple[str, ...]
    hoisted: tuple[tuple[str, Equation], ...]
    forward: tuple[tuple[str, Equation], ...]
    filters: tuple[tuple[str, Equation], ...]


def _reaches(start: str, target: str, deps: dict[str, frozenset[str]]) -> bool:
    stack, seen = [start], set()
    while stack:
        node = stack.pop()
        for dep in deps.get(node, ()):
            if dep == target:
                return True
            if dep in deps and dep not in seen:
                seen.add(dep)
                stack.append(dep)
    return False


def _make_plan(model: ConstrainedModel, removed: frozenset[str],
               pinned_names: frozenset[str]) -> _Plan:
    sig = model.signature
    endo = set(sig.endo_names)
    equations = {name: eq for name, eq in model.equations.items()
                 if name not in removed and name not in pinned_names
                 and name in endo}
    deps = {name: equation_inputs(eq) & endo for name, eq in equations.items()}

    order: list[str] = []
    filters: list[str] = []
    remaining = dict(deps)
    while remaining:
        ready = [name for name, need in remaining.items()
                 if not (need & remaining.keys())]
        if ready:
            for name in sorted(ready, key=sig.endo_index.__getitem__):
                order.append(name)
                del remaining[name]
            continue
        # Everyone left depends on someone left, so a cycle exists; demote
        # its members to per-candidate filters and keep peeling.
        cyclic = sorted((n for n in remaining if _reaches(n, n, remaining)),
                        key=sig.endo_index.__getitem__)
        for name in cyclic:
            filters.append(name)
            del remaining[name]

    forwarded = set(order)
    free = tuple(n for n in sig.endo_names
                 if n not in forwarded and n not in pinned_names)
    # An equation whose endogenous dependencies are all pinned or already
    # hoisted never varies within the enumeration, so it can be evaluated
    # once per call instead of once per candidate.
    hoisted: list[str] = []
    hoistable: set[str] = set()
    for name in order:
        if all(d in pinned_names or d in hoistable for d in deps[name]):
            hoisted.append(name)
            hoistable.add(name)
    inner = [n for n in order if n not in hoistable]
    return _Plan(free=free,
                 hoisted=tuple((n, equations[n]) for n in hoisted),
                 forward=tuple((n, equations[n]) for n in inner),
                 filters=tuple((n, equations[n]) for n in filters))


def _plan_for(model: ConstrainedModel, spec: InterventionSpec) -> _Plan:
    key = (spec.disconnect, frozenset(spec.assigned_names))
    plan = model._plan_cache.get(key)
    if plan is None:
        plan = _make_plan(model, spec.disconnect,
                          frozenset(spec.assigned_names))
        model._plan_cache[key] = plan
    return plan


def _brute_block(model: ConstrainedModel, context: Context, fixed: dict,
                 plan: _Plan, pinned: dict):
    # Forward evaluation failed somewhere; fall back to the reference
    # behavior for every completion of the already-fixed assignment.
    sig = model.signature
    effective = dict(plan.hoisted + plan.forward + plan.filters)
    open_names = tuple(n for n in sig.endo_names
                       if n not in fixed and n not in pinned)
    for combo in itertools.product(
            *(sig.endogenous[n].values for n in open_names)):
        merged = dict(fixed)
        merged.update(pinned)
        merged.update(zip(open_names, combo))
        state = {n: merged[n] for n in sig.endo_names}
        es = ExtendedState(context, state)
        if not in_constraints(model, es):
            continue
        env = es.env
        ok = True
        for name, eq in effective.items():
            if state[name] != eval_equation(eq, env):
                ok = False
                break
        if ok:
            yield state


def _iter_fast(model: ConstrainedModel, context: Context,
               spec: InterventionSpec):
    """Stream the solution states of one intervention, unsorted.

    The working environment is a single dict mutated per candidate, so
    constraint checks avoid building throwaway objects.
    """
    sig = model.signature
    plan = _plan_for(model, spec)
    pinned = dict(spec.assignments)
    extensional = model._extensional_tuples
    predicates = model.constraints.predicates
    all_names = sig.exo_names + sig.endo_names
    endo_names = sig.endo_names

    env = dict(context)
    env.update(pinned)
    try:
        for name, equation in plan.hoisted:
            value = eval_equation(equation, env)
            if value not in sig.endogenous[name]:
                return  # no candidate can satisfy this equation
            env[name] = value
    except EvaluationError:
        # The reference path only raises for states that pass the
        # constraint check; defer to it for the whole enumeration.
        yield from _brute_block(model, context, {}, plan, pinned)
        return

    free_ranges = [sig.endogenous[n].values for n in plan.free]
    free_names = plan.free
    for combo in itertools.product(*free_ranges):
        for name, value in zip(free_names, combo):
            env[name] = value
        viable = True
        try:
            for name, equation in plan.forward:
                value = eval_equation(equation, env)
                if value not in sig.endogenous[name]:
                    viable = False
                    break
                env[name] = value
        except EvaluationError:
            fixed = {n: env[n] for n in free_names}
            yield from _brute_block(model, context, fixed, plan, pinned)
            continue
        if not viable:
            continue
        if extensional is not None:
            if tuple(env[n] for n in all_names) not in extensional:
                continue
        else:
            admitted = True
            for predicate in predicates:
                if not exprs.eval_expr(predicate, env):
                    admitted = False
                    break
            if not admitted:
                continue
        ok = True
        for name, equation in plan.filters:
            if env[name] != eval_equation(equation, env):
                ok = False
                break
        if ok:
            yield {n: env[n] for n in endo_names}


def solutions_fast(model: ConstrainedModel, context: Context,
                   spec: InterventionSpec) -> SolutionSet:
    """Pruned enumeration; always returns exactly what `solutions` does.

    Equations over an acyclic dependency subgraph are forward-evaluated
    (once per call when they depend on nothing enumerated), everything
    else is enumerated and filtered. If forward evaluation raises on a
    block of candidates (for example a division by zero), that block falls
    back to the reference behavior, so the same solutions are found and
    errors surface only for states that pass the constraint check — though
    not necessarily the same error first when several states fail.
    """
    _check_context(model, context)
    if not formulas.is_normalized(spec, model.signature):
        raise ValueError(f"intervention spec not normalized: {spec}")
    found = list(_iter_fast(model, context, spec))
    found.sort(key=model.signature.state_key)
    return SolutionSet(dict(context), spec, tuple(found))


def solution_exists(model: ConstrainedModel, context: Context,
                    spec: InterventionSpec) -> bool:
    """Whether the intervention has any constraint-respecting solution.

    Stops at the first solution found, so an evaluation error lurking in a
    later candidate state is not necessarily surfaced.
    """
    _check_context(model, context)
    if not formulas.is_normalized(spec, model.signature):
        raise ValueError(f"intervention spec not normalized: {spec}")
    return next(_iter_fast(model, context, spec), None) is not None


# ---- formula evaluation ----------------------------------------------------

def holds_state(f: Formula, state: State) -> bool:
    """Truth of a Boolean combination of primitive events at a state."""
    if isinstance(f, formulas.PrimitiveEvent):
        return state[f.variable] == f.value
    if isinstance(f, formulas.BoolLit):
        return f.value
    if isinstance(f, formulas.Not):
        return not holds_state(f.operand, state)
    if isinstance(f, formulas.And):
        return holds_state(f.left, state) and holds_state(f.right, state)
    if isinstance(f, formulas.Or):
        return holds_state(f.left, state) or holds_state(f.right, state)
    raise TypeError(f"not a state formula: {f!r}")


def evaluate(model: ConstrainedModel, context: Context, f: Formula,
             *, solution_hook=None) -> bool:
    """Truth of a causal formula at (model, context).

    Boxes quantify over all solutions of their intervention (vacuously true
    when there are none); diamonds over some. Solution sets are computed
    once per distinct normalized spec within one call. `solution_hook`, if
    given, receives each (basic, SolutionSet) pair as it is computed.
    """
    _check_context(model, context)
    sig = model.signature
    cache: dict[InterventionSpec, SolutionSet] = {}

    def solve(basic: Basic) -> SolutionSet:
        spec = normalize_spec(basic.spec, sig)
        sols = cache.get(spec)
        if sols is None:
            sols = solutions_fast(model, context, spec)
            cache[spec] = sols
        if solution_hook is not None:
            solution_hook(basic, sols)
        return sols

    def ev(g: Formula) -> bool:
        if isinstance(g, Basic):
            sols = solve(g)
            if g.mode == formulas.BOX:
                return all(holds_state(g.body, v) for v in sols.states)
            return any(holds_state(g.body, v) for v in sols.states)
        if isinstance(g, formulas.Not):
            return not ev(g.operand)
        if isinstance(g, formulas.And):
            return ev(g.left) and ev(g.right)
        if isinstance(g, formulas.Or):
            return ev(g.left) or ev(g.right)
        if isinstance(g, formulas.BoolLit):
            return g.value
        raise TypeError(
            f"not a Boolean combination of basic causal formulas: {g!r}")

    return ev(f)


def evaluate_extended(model: ConstrainedModel, context: Context, state: State,
                      f: Formula) -> bool:
    """Truth of a state formula at a full extended state of the model.

    A primitive event `X = x` holds iff the extended state satisfies every
    equation of the model *and* the state assigns x to X; the Boolean
    connectives are interpreted on top of that in the standard way. Note
    that membership in the constraint set is deliberately not required.
    """
    es = ExtendedState(dict(context), dict(state))
    satisfied = satisfies_equations(model.equations, es)

    def ev(g: Formula) -> bool:
        if isinstance(g, formulas.PrimitiveEvent):
            return satisfied and state[g.variable] == g.value
        if isinstance(g, formulas.BoolLit):
            return g.value
        if isinstance(g, formulas.Not):
            return not ev(g.operand)
        if isinstance(g, formulas.And):
            return ev(g.left) and ev(g.right)
        if isinstance(g, formulas.Or):
            return ev(g.left) or ev(g.right)
        raise TypeError(f"not a state formula: {g!r}")

    return ev(f)
