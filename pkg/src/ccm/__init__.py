"""Causal models extended with non-causal constraints.

Evaluate intervention and disconnection queries over finite-signature
models, rewrite disconnections away, and machine-check the axiom system on
random and exhaustively enumerated models.
"""

from .diagnostics import (BudgetError, CcmError, CombineError,
                          EvaluationError, ExpansionLimitError, FormulaError,
                          ModelError, ParseError, SourceSpan,
                          ValidationReport, Violation)
from .exprs import Value
from .formulas import (Basic, BoolLit, Formula, InterventionSpec,
                       PrimitiveEvent, normalize, normalize_spec,
                       subformulas, well_formed)
from .model import (ConstrainedModel, ConstraintSet, Context, ExtendedState,
                    Range, Signature, State, TableEquation, combine,
                    enumerate_extended_states, in_constraints, int_range,
                    satisfies_equations, validate_model)
from .parser import (parse_context, parse_formula, parse_links, parse_model,
                     parse_spec)
from .render import render_formula, render_model, render_spec
from .rewrite import desugar_diamonds, eliminate_disc, has_disconnect
from .semantics import (SolutionSet, Submodel, evaluate, evaluate_extended,
                        holds_state, solutions, solutions_fast, submodel)

__version__ = "0.1.0"
