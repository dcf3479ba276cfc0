"""Rewrites that eliminate the disconnection operator and diamonds.

Disconnecting a set of variables is equivalent to nondeterministically
assigning them every combination of values in their ranges: a box over a
disconnection becomes the conjunction, and a diamond the disjunction, of
the corresponding assignment-only prefixes. The expansion is exhaustive
over the product of ranges, so a configurable cap guards against
combinatorial blowup; exceeding it is a hard error, never a truncation.
"""

from __future__ import annotations

import itertools

from . import formulas
from .diagnostics import ExpansionLimitError
from .formulas import Basic, Formula, InterventionSpec, normalize
from .model import Signature

DEFAULT_EXPANSION_CAP = 4096


def expansion_size(spec: InterventionSpec, sig: Signature) -> int:
    size = 1
    for name in spec.disconnect:
        size *= len(sig.endogenous[name])
    return size


def _expand_basic(basic: Basic, sig: Signature, cap: int) -> Formula:
    spec = basic.spec
    if not spec.disconnect:
        return basic
    size = expansion_size(spec, sig)
    if size > cap:
        raise ExpansionLimitError(
            f"disconnection of {sorted(spec.disconnect)} expands into "
            f"{size} prefixes, above the cap of {cap}")
    names = sorted(spec.disconnect, key=sig.endo_index.__getitem__)
    branches: list[Formula] = []
    for combo in itertools.product(*(sig.endogenous[n].values for n in names)):
        merged = InterventionSpec(
            disconnect=frozenset(),
            assignments=tuple(zip(names, combo)) + spec.assignments)
        merged = formulas.normalize_spec(merged, sig)
        branches.append(Basic(basic.mode, merged, basic.body))
    if basic.mode == formulas.BOX:
        return formulas.conj(branches)
    return formulas.disj(branches)


def eliminate_disc(f: Formula, sig: Signature,
                   cap: int = DEFAULT_EXPANSION_CAP) -> Formula:
    """Rewrite away every disconnection set; semantics preserving.

    Boxes expand to conjunctions over the disconnected variables' value
    combinations (in range order, variables in canonical order), diamonds
    to disjunctions. The result is disconnect-free.
    """
    f = normalize(f, sig)

    def walk(g: Formula) -> Formula:
        if isinstance(g, Basic):
            return _expand_basic(g, sig, cap)
        if isinstance(g, formulas.Not):
            return formulas.Not(walk(g.operand))
        if isinstance(g, formulas.And):
            return formulas.And(walk(g.left), walk(g.right))
        if isinstance(g, formulas.Or):
            return formulas.Or(walk(g.left), walk(g.right))
        return g

    return walk(f)


def desugar_diamonds(f: Formula) -> Formula:
    """Replace every diamond `<s> phi` by `![s] !phi`; idempotent."""
    if isinstance(f, Basic):
        if f.mode == formulas.DIAMOND:
            return formulas.Not(Basic(formulas.BOX, f.spec,
                                      formulas.Not(f.body)))
        return f
    if isinstance(f, formulas.Not):
        return formulas.Not(desugar_diamonds(f.operand))
    if isinstance(f, formulas.And):
        return formulas.And(desugar_diamonds(f.left),
                            desugar_diamonds(f.right))
    if isinstance(f, formulas.Or):
        return formulas.Or(desugar_diamonds(f.left),
                           desugar_diamonds(f.right))
    return f


def has_disconnect(f: Formula) -> bool:
    """Syntactic scan for any disconnection set."""
    return any(basic.spec.disconnect for basic in formulas.subformulas(f))
