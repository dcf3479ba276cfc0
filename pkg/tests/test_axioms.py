import itertools
import random

import pytest

from ccm.axioms import (LEGACY_SCHEMA_IDS, SCHEMA_IDS, SCHEMAS, Counterexample,
                        InstantiationBounds, ModelEnumerationConfig, Valid,
                        check_soundness, check_validity, enumerate_models,
                        instantiate, random_model)
from ccm.diagnostics import BudgetError
from ccm.formulas import (And, Basic, BoolLit, Not, Or, PrimitiveEvent,
                          subformulas, well_formed)
from ccm.model import ConstraintSet, Range, Signature, validate_model
from ccm.parser import parse_formula
from ccm.semantics import evaluate

TINY = Signature({"U1": Range((0, 1))},
                 {"A": Range((0, 1)), "B": Range((0, 1))})
MICRO = Signature({"U1": Range((0,))}, {"A": Range((0, 1))})

BOUNDS = InstantiationBounds(max_set_size=2, max_body_depth=2,
                             max_instances=16, seed=7)


# ---- instantiation ----------------------------------------------------------

def test_every_instance_is_well_formed():
    for schema_id in SCHEMA_IDS + LEGACY_SCHEMA_IDS:
        for formula in instantiate(SCHEMAS[schema_id], TINY, BOUNDS):
            assert well_formed(formula, TINY).ok(), schema_id


def test_instantiate_deterministic_under_seed():
    for schema_id in SCHEMA_IDS:
        first = instantiate(SCHEMAS[schema_id], TINY, BOUNDS)
        second = instantiate(SCHEMAS[schema_id], TINY, BOUNDS)
        assert first == second


def test_d4_includes_full_product_instance():
    instances = instantiate(SCHEMAS["D4"], TINY, BOUNDS)
    want = parse_formula("[A <- 0, B <- 1] (A = 0 & B = 1)", TINY)
    assert want in instances


def test_d1_includes_empty_prefix_instance():
    instances = instantiate(SCHEMAS["D1"], TINY, BOUNDS)
    # X = x -> X != x' desugars to !(X = x) | !(X = x').
    found = False
    for inst in instances:
        if (isinstance(inst, Basic) and inst.spec.is_empty()
                and inst.body == Or(Not(PrimitiveEvent("A", 0)),
                                    Not(PrimitiveEvent("A", 1)))):
            found = True
    assert found


def test_d9pp_pattern():
    instances = instantiate(SCHEMAS["D9pp"], TINY, BOUNDS)
    # For X = A: (<B<-y, A<-0>true & <B<-y, A<-1>true) -> <B<-y>true.
    matched = False
    for inst in instances:
        basics = subformulas(inst)
        if len(basics) != 3:
            continue
        premise_vars = [dict(b.spec.assignments) for b in basics[:2]]
        conclusion = basics[2]
        if (all(set(p) == {"A", "B"} for p in premise_vars)
                and {p["A"] for p in premise_vars} == {0, 1}
                and set(dict(conclusion.spec.assignments)) == {"B"}
                and conclusion.body == BoolLit(True)):
            matched = True
    assert matched


def test_d3_side_condition_w_not_in_prefix():
    for inst in instantiate(SCHEMAS["D3"], TINY, BOUNDS):
        # Implication desugars to Or(Not(premise), conclusion); the
        # conclusion's prefix extends the premise's by exactly one variable.
        premise = subformulas(inst)[0]
        conclusion = subformulas(inst)[1]
        premise_vars = set(premise.spec.assigned_names)
        conclusion_vars = set(conclusion.spec.assigned_names)
        added = conclusion_vars - premise_vars
        assert len(added) == 1
        assert not premise.spec.disconnect


def test_d5_needs_two_endogenous():
    assert SCHEMAS["D5"].applicable(MICRO) is not None
    assert instantiate(SCHEMAS["D5"], MICRO, BOUNDS) == []
    assert SCHEMAS["D5"].applicable(TINY) is None


def test_d1_needs_multivalued_range():
    singleton = Signature({"U1": Range((0,))}, {"A": Range((5,))})
    assert instantiate(SCHEMAS["D1"], singleton, BOUNDS) == []
    assert instantiate(SCHEMAS["D9p"], singleton, BOUNDS) == []


def test_dsc_instances_pair_disc_with_expansion():
    for inst in instantiate(SCHEMAS["DSC"], TINY, BOUNDS):
        basics = subformulas(inst)
        disc_boxes = [b for b in basics if b.spec.disconnect]
        plain = [b for b in basics if not b.spec.disconnect]
        assert disc_boxes and plain
        size = 1
        for name in disc_boxes[0].spec.disconnect:
            size *= len(TINY.endogenous[name])
        # Biconditional duplicates each side once.
        assert len(plain) == 2 * size


# ---- random models ----------------------------------------------------------

def test_random_model_deterministic():
    a = random_model(TINY, seed=123)
    b = random_model(TINY, seed=123)
    assert a == b
    assert a != random_model(TINY, seed=124)


def test_random_model_degenerate_probabilities():
    total = random_model(TINY, seed=1, p_undefined=0.0, p_state_in_c=1.0)
    assert set(total.equations) == {"A", "B"}
    assert len(total.constraints.extensional) == 8  # every extended state
    empty = random_model(TINY, seed=2, p_undefined=1.0)
    assert empty.equations == {}


def test_random_model_validates():
    for seed in range(20):
        model = random_model(TINY, seed=seed)
        assert validate_model(model).ok()


# ---- soundness --------------------------------------------------------------

def test_soundness_sweep_small():
    models = [random_model(TINY, seed=s, p_undefined=0.3, p_state_in_c=0.6)
              for s in range(30)]
    report = check_soundness(models, list(SCHEMA_IDS),
                             InstantiationBounds(max_instances=6, seed=3))
    assert report.ok(), [(v.schema, v.model_index) for v in report.violations]
    assert report.checked_instances() > 0


def test_legacy_d9_sound_on_standard_models():
    # Total equations, no constraints: the superseded schema still holds.
    models = [random_model(TINY, seed=s, p_undefined=0.0, p_state_in_c=1.0)
              for s in range(10)]
    report = check_soundness(models, ["D9"],
                             InstantiationBounds(max_instances=6, seed=4))
    assert report.ok()


def test_legacy_d9_fails_on_some_constrained_model():
    models = [random_model(TINY, seed=s, p_undefined=0.4, p_state_in_c=0.4)
              for s in range(40)]
    report = check_soundness(models, ["D9"],
                             InstantiationBounds(max_instances=6, seed=5))
    assert not report.ok()


def test_d0_holds_on_anything():
    models = [random_model(TINY, seed=s, p_state_in_c=0.2) for s in range(10)]
    report = check_soundness(models, ["D0"],
                             InstantiationBounds(max_instances=10, seed=6))
    assert report.ok()


def test_soundness_records_skips():
    models = [random_model(MICRO, seed=s) for s in range(3)]
    report = check_soundness(models, ["D5", "D2"], BOUNDS)
    by_schema = {s.schema: s for s in report.stats}
    assert by_schema["D5"].skipped is not None
    assert by_schema["D2"].skipped is None
    assert report.ok()


def test_soundness_requires_shared_signature():
    with pytest.raises(ValueError):
        check_soundness([random_model(TINY, 1), random_model(MICRO, 2)],
                        ["D2"], BOUNDS)


# ---- exhaustive enumeration -------------------------------------------------

def test_enumeration_counts_micro():
    config = ModelEnumerationConfig(MICRO)
    # A's table reads U1 only (1 row): 2 tables + undefined = 3 options;
    # 2 extended states give 4 constraint subsets.
    assert config.equation_set_count() == 3
    assert config.constraint_set_count() == 4
    assert config.model_count() == 12
    assert config.pair_count() == 12
    assert sum(1 for _ in enumerate_models(config)) == 12


def test_enumeration_counts_tiny_closed_form():
    config = ModelEnumerationConfig(TINY)
    assert config.equation_set_count() == (1 + 2 ** 4) ** 2 == 289
    assert config.constraint_set_count() == 2 ** 8 == 256
    assert config.model_count() == 73_984
    assert config.pair_count() == 147_968


def test_enumerated_models_validate():
    config = ModelEnumerationConfig(MICRO)
    for model in enumerate_models(config):
        assert validate_model(model).ok()


def test_check_validity_effectiveness_instance():
    result = check_validity(MICRO, parse_formula("[A <- 0] (A = 0)", MICRO))
    assert isinstance(result, Valid)
    assert result.pairs_checked == 12


def test_check_validity_finds_d9_counterexample_micro():
    # Prefix over V - {A} is empty here; the existence conjunct fails as
    # soon as the constraint set is empty.
    legacy = parse_formula("(<> true) & ((<> (A = 0)) -> ([] (A = 0)))",
                           MICRO)
    result = check_validity(MICRO, legacy)
    assert isinstance(result, Counterexample)
    assert result.model.constraints.extensional == ()
    assert not evaluate(result.model, result.context, legacy)


def test_check_validity_budget_refusal():
    config = ModelEnumerationConfig(TINY, budget=1000)
    with pytest.raises(BudgetError):
        check_validity(TINY, parse_formula("[ ] true", TINY), config)


def test_check_validity_sampling_mode():
    config = ModelEnumerationConfig(TINY, sample_fraction=0.002, seed=9,
                                    budget=1000)
    result = check_validity(TINY, parse_formula("[A <- 1] (A = 1)", TINY),
                            config)
    assert isinstance(result, Valid)
    assert 0 < result.pairs_checked < 2000


def test_counterexample_pair_index_is_first():
    legacy = parse_formula(
        "(<B <- 0> true) & ((<B <- 0> (A = 0)) -> ([B <- 0] (A = 0)))", TINY)
    config = ModelEnumerationConfig(TINY)
    result = check_validity(TINY, legacy, config)
    assert isinstance(result, Counterexample)
    assert result.pair_index == 0  # first model has no equations and C = {}
    assert result.model.equations == {}
    assert result.model.constraints.extensional == ()
