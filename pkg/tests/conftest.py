import random
from pathlib import Path

import pytest

from ccm.model import Range, Signature, validate_model
from ccm.parser import parse_model

FIXTURES = Path(__file__).parent.parent / "fixtures"


def load_fixture(name):
    model = parse_model((FIXTURES / name).read_text())
    report = validate_model(model)
    assert report.ok(), f"{name} invalid:\n{report.render()}"
    return model


@pytest.fixture(scope="session")
def temperature():
    return load_fixture("temperature.ccm")


@pytest.fixture(scope="session")
def cholesterol():
    return load_fixture("cholesterol.ccm")


@pytest.fixture(scope="session")
def geometry():
    return load_fixture("geometry.ccm")


@pytest.fixture(scope="session")
def tiny():
    return load_fixture("tiny.ccm")


def small_signature(rng: random.Random, max_endo=3, max_range=3) -> Signature:
    """Random signature with <= max_endo endogenous variables of range
    size <= max_range; occasionally symbolic values."""
    exo = {}
    for i in range(rng.randint(1, 2)):
        size = rng.randint(1, max_range)
        exo[f"U{i}"] = Range(tuple(range(size)))
    endo = {}
    for i in range(rng.randint(1, max_endo)):
        size = rng.randint(1, max_range)
        if rng.random() < 0.15:
            endo[f"V{i}"] = Range(tuple(f"s{j}" for j in range(size)))
        else:
            base = rng.randint(0, 2)
            endo[f"V{i}"] = Range(tuple(range(base, base + size)))
    return Signature(exo, endo)


def random_context(rng: random.Random, sig: Signature):
    return {name: rng.choice(sig.exogenous[name].values)
            for name in sig.exo_names}
