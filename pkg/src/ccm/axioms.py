"""Axiom schemas and machine checks of their validity over finite models.

The schema family covers the standard intervention axioms (propositional
tautologies, definiteness, composition, effectiveness, reversibility,
distribution, generalization), the two unique-outcome replacements needed
once constraints and partial equation sets are allowed, and the
disconnection-expansion biconditional. The superseded unique-outcome axiom
is kept as schema `D9` purely to exhibit its failure on constrained
models; `all` deliberately excludes it.

Two complementary checks: `check_soundness` evaluates bounded random
instances of each schema on (typically random) models, expecting zero
violations; `check_validity` decides a single formula by exhaustively
enumerating every model over a signature (all partial lookup-table
equation sets crossed with all extensional constraint sets), or a seeded
sample of them.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator, Union

from . import formulas
from .diagnostics import BudgetError, EvaluationError
from .exprs import Value
from .formulas import (Basic, BoolLit, Formula, InterventionSpec,
                       PrimitiveEvent, conj, disj, iff, implies)
from .model import (ConstrainedModel, ConstraintSet, Context, ExtendedState,
                    Signature, TableEquation)
from .semantics import evaluate

SCHEMA_IDS = ("D0", "D1", "D2", "D3", "D4", "D5", "D7", "D8",
              "D9p", "D9pp", "DSC")
LEGACY_SCHEMA_IDS = ("D9",)


@dataclass(frozen=True)
class InstantiationBounds:
    """Limits for sampling the (infinite) schema families."""

    max_set_size: int = 2
    max_body_depth: int = 2
    max_instances: int = 8
    seed: int = 0

    def __post_init__(self):
        if (self.max_set_size < 0 or self.max_body_depth < 0
                or self.max_instances <= 0):
            raise ValueError("bounds must be positive")


def _box(spec: InterventionSpec, body: Formula) -> Basic:
    return Basic(formulas.BOX, spec, body)


def _dia(spec: InterventionSpec, body: Formula) -> Basic:
    return Basic(formulas.DIAMOND, spec, body)


def _assign(pairs) -> InterventionSpec:
    return InterventionSpec(frozenset(), tuple(pairs))


def _subsets(names: tuple[str, ...], max_size: int,
             min_size: int = 0) -> Iterator[tuple[str, ...]]:
    for size in range(min_size, min(max_size, len(names)) + 1):
        yield from itertools.combinations(names, size)


def _random_values(rng: random.Random, sig: Signature,
                   names: tuple[str, ...]) -> tuple[tuple[str, Value], ...]:
    return tuple((n, rng.choice(sig.endogenous[n].values)) for n in names)


def random_state_formula(sig: Signature, rng: random.Random,
                         depth: int) -> Formula:
    """Random Boolean combination of primitive events (box/diamond body)."""
    if depth <= 0 or rng.random() < 0.35:
        if rng.random() < 0.08:
            return BoolLit(rng.random() < 0.5)
        name = rng.choice(sig.endo_names)
        return PrimitiveEvent(name, rng.choice(sig.endogenous[name].values))
    shape = rng.random()
    if shape < 0.3:
        return formulas.Not(random_state_formula(sig, rng, depth - 1))
    left = random_state_formula(sig, rng, depth - 1)
    right = random_state_formula(sig, rng, depth - 1)
    return (formulas.And if shape < 0.65 else formulas.Or)(left, right)


def random_spec(sig: Signature, rng: random.Random, max_set_size: int,
                *, allow_disc: bool = True,
                require_disc: bool = False) -> InterventionSpec:
    """Random well-formed intervention spec over `sig`."""
    names = list(sig.endo_names)
    rng.shuffle(names)
    top = min(max_set_size, len(names) - 1 if require_disc else len(names))
    k = rng.randint(0, max(top, 0))
    assigned = names[:k]
    rest = names[k:]
    disconnect: list[str] = []
    if allow_disc and rest:
        low = 1 if require_disc else 0
        d = max(rng.randint(low, min(max_set_size, len(rest))), low)
        disconnect = rest[:d]
    elif require_disc:
        raise ValueError("cannot require a disconnection: no variables left")
    return formulas.normalize_spec(
        InterventionSpec(frozenset(disconnect),
                         _random_values(rng, sig, tuple(assigned))),
        sig)


def random_basic(sig: Signature, rng: random.Random, max_set_size: int,
                 depth: int, *, allow_disc: bool = True,
                 require_disc: bool = False) -> Basic:
    mode = formulas.BOX if rng.random() < 0.5 else formulas.DIAMOND
    spec = random_spec(sig, rng, max_set_size, allow_disc=allow_disc,
                       require_disc=require_disc)
    return Basic(mode, spec, random_state_formula(sig, rng, depth))


def random_causal_formula(sig: Signature, rng: random.Random,
                          max_set_size: int, depth: int,
                          *, require_disc: bool = False) -> Formula:
    """Random causal formula; with `require_disc`, at least one prefix
    carries a nonempty disconnection set."""
    anchored = random_basic(sig, rng, max_set_size, depth,
                            require_disc=require_disc)
    shape = rng.random()
    if shape < 0.35:
        return anchored
    other = random_basic(sig, rng, max_set_size, depth)
    if shape < 0.55:
        return formulas.Not(anchored)
    if shape < 0.75:
        return formulas.And(other, anchored)
    return formulas.Or(anchored, formulas.Not(other))


# ---- schema instantiators ---------------------------------------------------

def _multi_valued(sig: Signature) -> tuple[str, ...]:
    return tuple(n for n in sig.endo_names if len(sig.endogenous[n]) >= 2)


def _inst_d0(sig: Signature, bounds: InstantiationBounds,
             rng: random.Random) -> Iterator[Formula]:
    while True:
        psi = random_basic(sig, rng, bounds.max_set_size,
                           bounds.max_body_depth)
        chi = random_basic(sig, rng, bounds.max_set_size,
                           bounds.max_body_depth)
        pattern = rng.randrange(5)
        if pattern == 0:
            yield formulas.Or(psi, formulas.Not(psi))
        elif pattern == 1:
            yield implies(psi, psi)
        elif pattern == 2:
            yield implies(psi, implies(chi, psi))
        elif pattern == 3:
            yield implies(formulas.And(psi, chi), psi)
        else:
            yield formulas.Not(formulas.And(psi, formulas.Not(psi)))


def _inst_d1(sig: Signature, bounds: InstantiationBounds,
             rng: random.Random) -> Iterator[Formula]:
    for spec_vars in _subsets(sig.endo_names, bounds.max_set_size):
        for x_var in _multi_valued(sig):
            values = sig.endogenous[x_var].values
            for x, x_other in itertools.permutations(values, 2):
                spec = _assign(_random_values(rng, sig, spec_vars))
                yield _box(spec, implies(PrimitiveEvent(x_var, x),
                                         formulas.Not(
                                             PrimitiveEvent(x_var, x_other))))


def _inst_d2(sig: Signature, bounds: InstantiationBounds,
             rng: random.Random) -> Iterator[Formula]:
    for spec_vars in _subsets(sig.endo_names, bounds.max_set_size):
        for x_var in sig.endo_names:
            spec = _assign(_random_values(rng, sig, spec_vars))
            yield _box(spec, disj([PrimitiveEvent(x_var, v)
                                   for v in sig.endogenous[x_var].values]))


def _inst_d3(sig: Signature, bounds: InstantiationBounds,
             rng: random.Random) -> Iterator[Formula]:
    for spec_vars in _subsets(sig.endo_names, bounds.max_set_size):
        for w_var in sig.endo_names:
            if w_var in spec_vars:
                continue
            assignments = _random_values(rng, sig, spec_vars)
            w_value = rng.choice(sig.endogenous[w_var].values)
            body = random_state_formula(sig, rng, bounds.max_body_depth)
            left = _dia(_assign(assignments),
                        formulas.And(PrimitiveEvent(w_var, w_value), body))
            right = _dia(_assign(assignments + ((w_var, w_value),)), body)
            yield implies(left, right)


def _inst_d4(sig: Signature, bounds: InstantiationBounds,
             rng: random.Random) -> Iterator[Formula]:
    for spec_vars in _subsets(sig.endo_names, bounds.max_set_size, min_size=1):
        ranges = [sig.endogenous[n].values for n in spec_vars]
        for combo in itertools.product(*ranges):
            pairs = tuple(zip(spec_vars, combo))
            yield _box(_assign(pairs),
                       conj([PrimitiveEvent(n, v) for n, v in pairs]))


def _inst_d5(sig: Signature, bounds: InstantiationBounds,
             rng: random.Random) -> Iterator[Formula]:
    for w_var, y_var in itertools.permutations(sig.endo_names, 2):
        others = tuple(n for n in sig.endo_names if n not in (w_var, y_var))
        for spec_vars in _subsets(others, bounds.max_set_size):
            rest = tuple(n for n in others if n not in spec_vars)
            x_pairs = _random_values(rng, sig, spec_vars)
            w = rng.choice(sig.endogenous[w_var].values)
            y = rng.choice(sig.endogenous[y_var].values)
            z_pairs = _random_values(rng, sig, rest)
            z_events = [PrimitiveEvent(n, v) for n, v in z_pairs]
            left1 = _dia(_assign(x_pairs + ((y_var, y),)),
                         conj([PrimitiveEvent(w_var, w)] + z_events))
            left2 = _dia(_assign(x_pairs + ((w_var, w),)),
                         conj([PrimitiveEvent(y_var, y)] + z_events))
            right = _dia(_assign(x_pairs),
                         conj([PrimitiveEvent(w_var, w),
                               PrimitiveEvent(y_var, y)] + z_events))
            yield implies(formulas.And(left1, left2), right)


def _inst_d7(sig: Signature, bounds: InstantiationBounds,
             rng: random.Random) -> Iterator[Formula]:
    for spec_vars in _subsets(sig.endo_names, bounds.max_set_size):
        spec = _assign(_random_values(rng, sig, spec_vars))
        phi = random_state_formula(sig, rng, bounds.max_body_depth)
        psi = random_state_formula(sig, rng, bounds.max_body_depth)
        yield implies(formulas.And(_box(spec, phi),
                                   _box(spec, implies(phi, psi))),
                      _box(spec, psi))


def _inst_d8(sig: Signature, bounds: InstantiationBounds,
             rng: random.Random) -> Iterator[Formula]:
    for spec_vars in _subsets(sig.endo_names, bounds.max_set_size):
        spec = _assign(_random_values(rng, sig, spec_vars))
        phi = random_state_formula(sig, rng, bounds.max_body_depth)
        chi = random_state_formula(sig, rng, bounds.max_body_depth)
        pattern = rng.randrange(3)
        if pattern == 0:
            taut = formulas.Or(phi, formulas.Not(phi))
        elif pattern == 1:
            taut = implies(phi, phi)
        else:
            taut = implies(formulas.And(phi, chi), phi)
        yield _box(spec, taut)


def _all_but(sig: Signature, x_var: str) -> tuple[str, ...]:
    return tuple(n for n in sig.endo_names if n != x_var)


def _inst_d9(sig: Signature, bounds: InstantiationBounds,
             rng: random.Random) -> Iterator[Formula]:
    # Superseded unique-outcome schema: the prefix covers all endogenous
    # variables, or all but one.
    groups = [sig.endo_names]
    groups.extend(_all_but(sig, x_var) for x_var in sig.endo_names)
    for spec_vars in groups:
        pairs = _random_values(rng, sig, spec_vars)
        spec = _assign(pairs)
        phi = random_state_formula(sig, rng, bounds.max_body_depth)
        yield formulas.And(_dia(spec, BoolLit(True)),
                           implies(_dia(spec, phi), _box(spec, phi)))


def _inst_d9p(sig: Signature, bounds: InstantiationBounds,
              rng: random.Random) -> Iterator[Formula]:
    for x_var in _multi_valued(sig):
        rest = _all_but(sig, x_var)
        values = sig.endogenous[x_var].values
        for x, x_other in itertools.permutations(values, 2):
            y_pairs = _random_values(rng, sig, rest)
            y_star_pairs = _random_values(rng, sig, rest)
            x_new = rng.choice(values)
            premise = conj([
                _dia(_assign(y_pairs), PrimitiveEvent(x_var, x)),
                _dia(_assign(y_pairs), PrimitiveEvent(x_var, x_other)),
                _dia(_assign(y_star_pairs + ((x_var, x_new),)),
                     BoolLit(True)),
            ])
            yield implies(premise,
                          _dia(_assign(y_star_pairs),
                               PrimitiveEvent(x_var, x_new)))


def _inst_d9pp(sig: Signature, bounds: InstantiationBounds,
               rng: random.Random) -> Iterator[Formula]:
    for x_var in sig.endo_names:
        rest = _all_but(sig, x_var)
        y_pairs = _random_values(rng, sig, rest)
        premise = conj([
            _dia(_assign(y_pairs + ((x_var, x),)), BoolLit(True))
            for x in sig.endogenous[x_var].values])
        yield implies(premise, _dia(_assign(y_pairs), BoolLit(True)))


def _inst_dsc(sig: Signature, bounds: InstantiationBounds,
              rng: random.Random) -> Iterator[Formula]:
    for disc_vars in _subsets(sig.endo_names, bounds.max_set_size, min_size=1):
        rest = tuple(n for n in sig.endo_names if n not in disc_vars)
        assign_vars = tuple(n for n in rest if rng.random() < 0.5)
        y_pairs = _random_values(rng, sig, assign_vars)
        phi = random_state_formula(sig, rng, bounds.max_body_depth)
        left = _box(formulas.normalize_spec(
            InterventionSpec(frozenset(disc_vars), y_pairs), sig), phi)
        branches = []
        for combo in itertools.product(
                *(sig.endogenous[n].values for n in disc_vars)):
            merged = formulas.normalize_spec(
                _assign(tuple(zip(disc_vars, combo)) + y_pairs), sig)
            branches.append(_box(merged, phi))
        yield iff(left, conj(branches))


@dataclass(frozen=True)
class AxiomSchema:
    id: str
    description: str
    instantiator: Callable[[Signature, InstantiationBounds, random.Random],
                           Iterator[Formula]]
    applicable: Callable[[Signature], str | None]  # returns skip reason


def _needs_endo(sig: Signature) -> str | None:
    return None if sig.endo_names else "no endogenous variables"


def _needs_two_endo(sig: Signature) -> str | None:
    if len(sig.endo_names) < 2:
        return "needs at least two endogenous variables"
    return None


def _needs_multi_valued(sig: Signature) -> str | None:
    if not _multi_valued(sig):
        return "needs an endogenous variable with at least two values"
    return None


SCHEMAS: dict[str, AxiomSchema] = {s.id: s for s in (
    AxiomSchema("D0", "propositional tautologies", _inst_d0, _needs_endo),
    AxiomSchema("D1", "a variable cannot take two values", _inst_d1,
                _needs_multi_valued),
    AxiomSchema("D2", "a variable takes some value in its range", _inst_d2,
                _needs_endo),
    AxiomSchema("D3", "composition", _inst_d3, _needs_endo),
    AxiomSchema("D4", "effectiveness of interventions", _inst_d4,
                _needs_endo),
    AxiomSchema("D5", "reversibility", _inst_d5, _needs_two_endo),
    AxiomSchema("D7", "distribution over implication", _inst_d7,
                _needs_endo),
    AxiomSchema("D8", "generalization of tautologies", _inst_d8,
                _needs_endo),
    AxiomSchema("D9", "unique outcomes (superseded; fails with constraints)",
                _inst_d9, _needs_endo),
    AxiomSchema("D9p", "agreement under undefined equations", _inst_d9p,
                _needs_multi_valued),
    AxiomSchema("D9pp", "solution existence from pointwise consistency",
                _inst_d9pp, _needs_endo),
    AxiomSchema("DSC", "disconnection as nondeterministic assignment",
                _inst_dsc, _needs_endo),
)}


def instantiate(schema: AxiomSchema, sig: Signature,
                bounds: InstantiationBounds) -> list[Formula]:
    """Up to `bounds.max_instances` distinct well-formed instances,
    deterministic under the seed. Returns [] when the signature cannot
    host the schema.

    Instantiators enumerate the schema's structural choices once per pass
    with fresh random values and bodies; passes repeat until the requested
    count is reached or a pass yields nothing new (fully deterministic
    schemas such as D4 exhaust their family)."""
    if schema.applicable(sig) is not None:
        return []
    rng = random.Random(f"{bounds.seed}:{schema.id}")
    out: list[Formula] = []
    seen: set[Formula] = set()
    while True:
        new_this_pass = 0
        for formula in schema.instantiator(sig, bounds, rng):
            if formula in seen:
                continue
            seen.add(formula)
            out.append(formula)
            new_this_pass += 1
            if len(out) >= bounds.max_instances:
                return out
        if new_this_pass == 0:
            return out


# ---- model generation -------------------------------------------------------

def _table_inputs(sig: Signature, x_var: str) -> tuple[str, ...]:
    return tuple(n for n in sig.exo_names + sig.endo_names if n != x_var)


def _table_rows(sig: Signature, inputs: tuple[str, ...]) -> list[tuple]:
    return list(itertools.product(*(sig.range_of(n).values for n in inputs)))


def random_model(sig: Signature, seed: int, p_undefined: float = 0.3,
                 p_state_in_c: float = 0.7) -> ConstrainedModel:
    """Seeded random constrained model: each endogenous variable is
    undefined with probability `p_undefined`, otherwise a uniform random
    lookup table; each extended state enters the extensional constraint
    set with probability `p_state_in_c`."""
    if not 0.0 <= p_undefined <= 1.0 or not 0.0 <= p_state_in_c <= 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    rng = random.Random(seed)
    equations: dict[str, TableEquation] = {}
    for x_var in sig.endo_names:
        if rng.random() < p_undefined:
            continue
        inputs = _table_inputs(sig, x_var)
        values = sig.endogenous[x_var].values
        table = {row: rng.choice(values)
                 for row in _table_rows(sig, inputs)}
        equations[x_var] = TableEquation(inputs, table)
    admitted = tuple(
        ExtendedState(context, state)
        for context in sig.contexts() for state in sig.states()
        if rng.random() < p_state_in_c)
    return ConstrainedModel(sig, equations,
                            ConstraintSet(extensional=admitted),
                            name=f"random_{seed}")


@dataclass(frozen=True)
class ModelEnumerationConfig:
    """Exhaustive (or seeded-sampled) enumeration of every model over a
    signature: all partial lookup-table equation sets crossed with all
    extensional constraint sets."""

    signature: Signature
    sample_fraction: float | None = None
    seed: int = 0
    budget: int = 1_000_000

    def equation_set_count(self) -> int:
        n = 1
        for x_var in self.signature.endo_names:
            rows = 1
            for name in _table_inputs(self.signature, x_var):
                rows *= len(self.signature.range_of(name))
            n *= 1 + len(self.signature.endogenous[x_var]) ** rows
        return n

    def constraint_set_count(self) -> int:
        states = 1
        for rng in self.signature.all_ranges.values():
            states *= len(rng)
        return 2 ** states

    def model_count(self) -> int:
        return self.equation_set_count() * self.constraint_set_count()

    def pair_count(self) -> int:
        contexts = 1
        for rng in self.signature.exogenous.values():
            contexts *= len(rng)
        return self.model_count() * contexts


def enumerate_models(config: ModelEnumerationConfig) -> Iterator[ConstrainedModel]:
    """Yield every model over the signature in a fixed deterministic order
    (equation sets vary slowest, constraint subsets fastest)."""
    sig = config.signature
    per_var_options: list[list[TableEquation | None]] = []
    for x_var in sig.endo_names:
        inputs = _table_inputs(sig, x_var)
        rows = _table_rows(sig, inputs)
        options: list[TableEquation | None] = [None]
        for outputs in itertools.product(sig.endogenous[x_var].values,
                                         repeat=len(rows)):
            options.append(TableEquation(inputs, dict(zip(rows, outputs))))
        expected = 1 + len(sig.endogenous[x_var]) ** len(rows)
        assert len(options) == expected, "enumeration disagrees with closed form"
        per_var_options.append(options)

    all_states = [ExtendedState(context, state)
                  for context in sig.contexts() for state in sig.states()]
    subsets: list[tuple[ExtendedState, ...]] = []
    for mask in range(2 ** len(all_states)):
        subsets.append(tuple(es for i, es in enumerate(all_states)
                             if mask >> i & 1))
    assert len(subsets) == config.constraint_set_count()

    rng = (random.Random(config.seed)
           if config.sample_fraction is not None else None)
    index = 0
    for choice in itertools.product(*per_var_options):
        equations = {name: eq for name, eq in zip(sig.endo_names, choice)
                     if eq is not None}
        for subset in subsets:
            if rng is not None and rng.random() >= config.sample_fraction:
                index += 1
                continue
            yield ConstrainedModel(sig, equations,
                                   ConstraintSet(extensional=subset),
                                   name=f"enum_{index}")
            index += 1


# ---- checking ---------------------------------------------------------------

@dataclass(frozen=True)
class SchemaStats:
    schema: str
    instances: int
    models: int
    contexts: int
    skipped: str | None = None


@dataclass(frozen=True)
class SoundnessViolation:
    schema: str
    model: ConstrainedModel
    model_index: int
    context: Context
    formula: Formula
    kind: str = "false"  # or "error"
    detail: str = ""


@dataclass
class SoundnessReport:
    stats: list[SchemaStats] = field(default_factory=list)
    violations: list[SoundnessViolation] = field(default_factory=list)

    def ok(self) -> bool:
        return not self.violations

    def checked_instances(self) -> int:
        return sum(s.instances for s in self.stats)


def check_soundness(models: list[ConstrainedModel],
                    schemas: list[str],
                    bounds: InstantiationBounds) -> SoundnessReport:
    """Evaluate every bounded instance of each schema at every context of
    every model. Any violation is an implementation bug for the schemas in
    SCHEMA_IDS; the superseded `D9` is expected to produce violations on
    constrained models."""
    if not models:
        raise ValueError("no models to check")
    sig = models[0].signature
    for m in models:
        if m.signature != sig:
            raise ValueError("all models must share one signature")
    contexts = list(sig.contexts())
    report = SoundnessReport()
    for schema_id in schemas:
        schema = SCHEMAS[schema_id]
        skip = schema.applicable(sig)
        if skip is not None:
            report.stats.append(SchemaStats(schema_id, 0, 0, 0, skipped=skip))
            continue
        instances = instantiate(schema, sig, bounds)
        report.stats.append(SchemaStats(schema_id, len(instances),
                                        len(models), len(contexts)))
        for model_index, model in enumerate(models):
            for context in contexts:
                for formula in instances:
                    try:
                        value = evaluate(model, context, formula)
                    except EvaluationError as err:
                        report.violations.append(SoundnessViolation(
                            schema_id, model, model_index, dict(context),
                            formula, kind="error", detail=str(err)))
                        continue
                    if not value:
                        report.violations.append(SoundnessViolation(
                            schema_id, model, model_index, dict(context),
                            formula))
    return report


@dataclass(frozen=True)
class Valid:
    pairs_checked: int


@dataclass(frozen=True)
class Counterexample:
    model: ConstrainedModel
    context: Context
    pair_index: int


def check_validity(sig: Signature, f: Formula,
                   config: ModelEnumerationConfig | None = None
                   ) -> Union[Valid, Counterexample]:
    """Decide whether `f` holds at every (model, context) over `sig`.

    Exhaustive unless `config.sample_fraction` is set. Enumerating more
    than `config.budget` model-context pairs raises BudgetError instead of
    silently sampling. Returns the first counterexample in enumeration
    order, if any.
    """
    config = config or ModelEnumerationConfig(sig)
    if config.signature != sig:
        raise ValueError("config signature differs from the query signature")
    if config.sample_fraction is None and config.pair_count() > config.budget:
        raise BudgetError(
            f"{config.pair_count()} model-context pairs exceed the budget "
            f"of {config.budget}; raise it or request sampling")
    contexts = list(sig.contexts())
    index = 0
    for model in enumerate_models(config):
        for context in contexts:
            if not evaluate(model, context, f):
                return Counterexample(model, dict(context), index)
            index += 1
    return Valid(pairs_checked=index)
