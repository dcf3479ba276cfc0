"""Formula AST: primitive events, Boolean structure, intervention prefixes.

Two layers share the Boolean connective nodes (Not/And/Or):

  * state formulas — Boolean combinations of primitive events `X = x` and
    the literals true/false; these are the bodies of boxes and diamonds;
  * causal formulas — Boolean combinations of `Basic` nodes, each a box
    `[spec] body` or diamond `<spec> body`.

Implication is surface syntax only; the parser and all builders desugar
`a -> b` to `!a | b`, so the AST has no implication node. Boxes can never
nest: `Basic` rejects any body containing another `Basic`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .diagnostics import ValidationReport
from .exprs import Value
from .model import Signature

BOX = "box"
DIAMOND = "diamond"


@dataclass(frozen=True)
class PrimitiveEvent:
    """`variable = value` over an endogenous variable."""

    variable: str
    value: Value


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Not:
    operand: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class InterventionSpec:
    """A disconnection set plus an ordered list of assignments.

    Either part may be empty; the empty spec is the plain `[ ]` prefix.
    `normalize_spec` sorts assignments into canonical variable order and
    drops assigned variables from the disconnection set.
    """

    disconnect: frozenset[str] = frozenset()
    assignments: tuple[tuple[str, Value], ...] = ()

    @property
    def assigned_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.assignments)

    def is_empty(self) -> bool:
        return not self.disconnect and not self.assignments


@dataclass(frozen=True)
class Basic:
    """One box or diamond: `[spec] body` / `<spec> body`."""

    mode: str
    spec: InterventionSpec
    body: "Formula"

    def __post_init__(self):
        if self.mode not in (BOX, DIAMOND):
            raise ValueError(f"bad mode {self.mode!r}")
        if contains_basic(self.body):
            raise ValueError("intervention prefixes cannot nest")


Formula = Union[PrimitiveEvent, BoolLit, Not, And, Or, Basic]

StateFormula = Formula  # a Formula containing no Basic nodes


def implies(left: Formula, right: Formula) -> Formula:
    """`left -> right`, desugared immediately."""
    return Or(Not(left), right)


def iff(left: Formula, right: Formula) -> Formula:
    return And(implies(left, right), implies(right, left))


def _balanced(parts: list[Formula], node) -> Formula:
    # Balanced fold keeps the tree depth logarithmic, so large expansions
    # stay within the recursion limits of the tree walkers.
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return node(_balanced(parts[:mid], node), _balanced(parts[mid:], node))


def conj(parts: list[Formula]) -> Formula:
    """Conjunction of `parts` in order; the empty conjunction is `true`."""
    if not parts:
        return BoolLit(True)
    return _balanced(list(parts), And)


def disj(parts: list[Formula]) -> Formula:
    if not parts:
        return BoolLit(False)
    return _balanced(list(parts), Or)


def contains_basic(f: Formula) -> bool:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Basic):
            return True
        if isinstance(g, Not):
            stack.append(g.operand)
        elif isinstance(g, (And, Or)):
            stack.append(g.left)
            stack.append(g.right)
    return False


def subformulas(f: Formula) -> list[Basic]:
    """Every basic causal formula occurrence, left to right."""
    out: list[Basic] = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Basic):
            out.append(g)
        elif isinstance(g, Not):
            stack.append(g.operand)
        elif isinstance(g, (And, Or)):
            stack.append(g.right)
            stack.append(g.left)
    return out


def well_formed(f: Formula, sig: Signature) -> ValidationReport:
    """Check names, ranges, and assignment distinctness against `sig`."""
    report = ValidationReport()

    def check_event(pe: PrimitiveEvent) -> None:
        rng = sig.endogenous.get(pe.variable)
        if rng is None:
            kind = ("exogenous" if pe.variable in sig.exogenous
                    else "undeclared")
            report.add("unknown-variable",
                       f"primitive event over {kind} variable {pe.variable!r}")
        elif pe.value not in rng:
            report.add("out-of-range",
                       f"{pe.variable} = {pe.value!r} outside its range")

    def check_spec(spec: InterventionSpec) -> None:
        seen: set[str] = set()
        for name, value in spec.assignments:
            if name in seen:
                report.add("duplicate-intervention",
                           f"variable {name!r} assigned twice in one prefix")
            seen.add(name)
            rng = sig.endogenous.get(name)
            if rng is None:
                kind = "exogenous" if name in sig.exogenous else "undeclared"
                report.add("unknown-variable",
                           f"intervention on {kind} variable {name!r}")
            elif value not in rng:
                report.add("out-of-range",
                           f"{name} <- {value!r} outside its range")
        for name in sorted(spec.disconnect):
            if name not in sig.endogenous:
                kind = "exogenous" if name in sig.exogenous else "undeclared"
                report.add("unknown-variable",
                           f"disconnection of {kind} variable {name!r}")

    def walk(g: Formula) -> None:
        if isinstance(g, PrimitiveEvent):
            check_event(g)
        elif isinstance(g, Basic):
            check_spec(g.spec)
            walk(g.body)
        elif isinstance(g, Not):
            walk(g.operand)
        elif isinstance(g, (And, Or)):
            walk(g.left)
            walk(g.right)

    walk(f)
    return report


def normalize_spec(spec: InterventionSpec, sig: Signature) -> InterventionSpec:
    """Canonical form: assignments in declaration order, overlap removed.

    Disconnecting a variable that is also assigned is redundant (the
    assignment replaces its equation anyway), so assigned names are dropped
    from the disconnection set.
    """
    order = sig.endo_index
    assignments = tuple(sorted(spec.assignments,
                               key=lambda pair: order.get(pair[0], -1)))
    disconnect = spec.disconnect - set(spec.assigned_names)
    return InterventionSpec(disconnect, assignments)


def is_normalized(spec: InterventionSpec, sig: Signature) -> bool:
    return spec == normalize_spec(spec, sig)


def normalize(f: Formula, sig: Signature) -> Formula:
    """Normalize every intervention prefix in `f`; idempotent.

    Diamonds are preserved (not expanded to negated boxes) so rendered
    output still echoes the query's shape.
    """
    if isinstance(f, Basic):
        return Basic(f.mode, normalize_spec(f.spec, sig), f.body)
    if isinstance(f, Not):
        return Not(normalize(f.operand, sig))
    if isinstance(f, And):
        return And(normalize(f.left, sig), normalize(f.right, sig))
    if isinstance(f, Or):
        return Or(normalize(f.left, sig), normalize(f.right, sig))
    return f
