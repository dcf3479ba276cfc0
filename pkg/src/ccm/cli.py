"""Command-line interface: evaluate, solutions, rewrite, axioms, validity,
combine, and an interactive REPL.

Exit codes: 0 success, 1 failed assertion / counterexample found /
soundness violations, 2 syntax error, 3 validation or evaluation error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import axioms, formulas, parser, render, rewrite, semantics
from .diagnostics import (BudgetError, CcmError, CombineError, EvaluationError,
                          ExpansionLimitError, FormulaError, ModelError,
                          ParseError)
from .formulas import InterventionSpec
from .model import ConstrainedModel, ConstraintSet, combine, validate_model

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_PARSE = 2
EXIT_INVALID = 3

JSON_SCHEMA_VERSION = 1


def _load_model(path: str) -> ConstrainedModel:
    model = parser.parse_model(Path(path).read_text())
    report = validate_model(model)
    if report:
        raise ModelError(report)
    return model


def _formula_text(arg: str) -> str:
    if arg.startswith("@"):
        return Path(arg[1:]).read_text()
    return arg


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _render_state(state: dict) -> str:
    return ", ".join(f"{name} = {value}" for name, value in state.items())


# ---- eval -------------------------------------------------------------------

def cmd_eval(args) -> int:
    model = _load_model(args.model)
    sig = model.signature
    context = parser.parse_context(args.context, sig)
    formula = parser.parse_formula(_formula_text(args.formula), sig)
    normalized = formulas.normalize(formula, sig)

    started = time.perf_counter()
    value = semantics.evaluate(model, context, normalized)
    per_box = []
    if args.show_solutions:
        for basic in formulas.subformulas(normalized):
            spec = formulas.normalize_spec(basic.spec, sig)
            sols = semantics.solutions_fast(model, context, spec)
            per_box.append((basic, sols))
    elapsed_ms = (time.perf_counter() - started) * 1000

    rendered = render.render_formula(normalized, sig)
    if args.json:
        flat = [dict(state) for _, sols in per_box for state in sols.states]
        _print_json({
            "schema": JSON_SCHEMA_VERSION,
            "model": model.name,
            "context": dict(context),
            "formula": rendered,
            "value": value,
            "solutions": flat,
            "elapsed_ms": elapsed_ms,
        })
    else:
        print(f"formula: {rendered}")
        print(f"context: {_render_state(context)}")
        print(f"value: {str(value).lower()}")
        for basic, sols in per_box:
            print(f"solutions of {render.render_formula(basic, sig)}: "
                  f"{len(sols)}")
            for state in sols.states:
                print(f"  {_render_state(state)}")
        print(f"elapsed: {elapsed_ms:.2f} ms")
    if args.assert_true and not value:
        return EXIT_ASSERTION
    return EXIT_OK


# ---- solutions --------------------------------------------------------------

def cmd_solutions(args) -> int:
    model = _load_model(args.model)
    sig = model.signature
    context = parser.parse_context(args.context, sig)
    spec = parser.parse_spec(_formula_text(args.spec), sig)
    spec = formulas.normalize_spec(spec, sig)
    sols = semantics.solutions_fast(model, context, spec)
    if args.json:
        _print_json({
            "schema": JSON_SCHEMA_VERSION,
            "model": model.name,
            "context": dict(context),
            "spec": render.render_spec(spec, sig),
            "count": len(sols),
            "solutions": ([] if args.count
                          else [dict(state) for state in sols.states]),
        })
        return EXIT_OK
    if args.count:
        print(len(sols))
        return EXIT_OK
    print(f"{len(sols)} solution(s) of [{render.render_spec(spec, sig)}] "
          f"at {_render_state(context)}")
    for state in sols.states:
        print(f"  {_render_state(state)}")
    return EXIT_OK


# ---- rewrite ----------------------------------------------------------------

def cmd_rewrite(args) -> int:
    model = _load_model(args.model)
    sig = model.signature
    formula = parser.parse_formula(_formula_text(args.formula), sig)
    out = rewrite.eliminate_disc(formula, sig, cap=args.cap)
    if args.desugar_diamonds:
        out = rewrite.desugar_diamonds(out)
    rendered = render.render_formula(out, sig)
    if args.json:
        _print_json({
            "schema": JSON_SCHEMA_VERSION,
            "model": model.name,
            "formula": render.render_formula(
                formulas.normalize(formula, sig), sig),
            "rewritten": rendered,
            "boxes": len(formulas.subformulas(out)),
        })
    else:
        print(rendered)
    return EXIT_OK


# ---- axioms -----------------------------------------------------------------

def _parse_schemas(text: str) -> list[str]:
    if text == "all":
        return list(axioms.SCHEMA_IDS)
    names = [part.strip() for part in text.split(",") if part.strip()]
    known = set(axioms.SCHEMA_IDS) | set(axioms.LEGACY_SCHEMA_IDS)
    unknown = [n for n in names if n not in known]
    if unknown:
        raise ValueError(f"unknown schemas {unknown}; choose from "
                         f"{sorted(known)} or 'all'")
    return names


def cmd_axioms(args) -> int:
    model = _load_model(args.sig)
    sig = model.signature
    try:
        schemas = _parse_schemas(args.schemas)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    bounds = axioms.InstantiationBounds(
        max_set_size=args.set_size, max_body_depth=args.depth,
        max_instances=args.instances, seed=args.seed)
    models = [axioms.random_model(sig, seed=args.seed + i,
                                  p_undefined=args.p_undefined,
                                  p_state_in_c=args.p_in_constraints)
              for i in range(args.models)]
    report = axioms.check_soundness(models, schemas, bounds)
    if args.json:
        _print_json({
            "schema": JSON_SCHEMA_VERSION,
            "signature": model.name,
            "models": args.models,
            "seed": args.seed,
            "per_schema": {
                s.schema: {"instances": s.instances, "models": s.models,
                           "contexts": s.contexts, "skipped": s.skipped}
                for s in report.stats},
            "violations": [
                {"schema": v.schema, "model_index": v.model_index,
                 "context": dict(v.context), "kind": v.kind,
                 "formula": render.render_formula(v.formula, sig)}
                for v in report.violations],
        })
    else:
        for s in report.stats:
            if s.skipped:
                print(f"{s.schema}: skipped ({s.skipped})")
            else:
                print(f"{s.schema}: {s.instances} instance(s) x {s.models} "
                      f"model(s) x {s.contexts} context(s)")
        print(f"{len(report.violations)} violations")
        for v in report.violations:
            print(f"  {v.schema} false on model {v.model_index} at "
                  f"{_render_state(v.context)}: "
                  f"{render.render_formula(v.formula, sig)}")
    return EXIT_OK if report.ok() else EXIT_ASSERTION


# ---- validity ---------------------------------------------------------------

def cmd_validity(args) -> int:
    model = _load_model(args.sig)
    sig = model.signature
    formula = parser.parse_formula(_formula_text(args.formula), sig)
    config = axioms.ModelEnumerationConfig(
        sig, sample_fraction=args.sample, seed=args.seed, budget=args.budget)
    result = axioms.check_validity(sig, formula, config)
    if isinstance(result, axioms.Valid):
        if args.json:
            _print_json({"schema": JSON_SCHEMA_VERSION, "valid": True,
                         "pairs_checked": result.pairs_checked,
                         "sampled": args.sample is not None})
        else:
            mode = "sampled" if args.sample is not None else "exhaustive"
            print(f"valid ({mode}: {result.pairs_checked} "
                  f"model-context pairs)")
        return EXIT_OK
    rendered_model = render.render_model(result.model)
    if args.out:
        Path(args.out).write_text(rendered_model)
    if args.json:
        _print_json({"schema": JSON_SCHEMA_VERSION, "valid": False,
                     "pair_index": result.pair_index,
                     "context": dict(result.context),
                     "model": rendered_model})
    else:
        print(f"counterexample at pair {result.pair_index}, context "
              f"{_render_state(result.context)}:")
        print(rendered_model, end="")
    return EXIT_ASSERTION


# ---- combine ----------------------------------------------------------------

def cmd_combine(args) -> int:
    model_a = _load_model(args.model_a)
    model_b = _load_model(args.model_b)
    links = ConstraintSet()
    combined_sig_probe = None
    if args.links:
        # Parse links against the union signature.
        merged = combine(model_a, model_b, ConstraintSet(), name="probe")
        combined_sig_probe = merged.signature
        links = parser.parse_links(Path(args.links).read_text(),
                                   combined_sig_probe)
    name = args.name or f"{model_a.name}_{model_b.name}"
    result = combine(model_a, model_b, links, name=name)
    report = validate_model(result)
    if report:
        raise ModelError(report)
    text = render.render_model(result)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


# ---- repl -------------------------------------------------------------------

def cmd_repl(args) -> int:
    try:
        import readline  # noqa: F401  (line editing when available)
    except ImportError:
        pass
    model = _load_model(args.model)
    sig = model.signature
    context = None
    if args.context:
        context = parser.parse_context(args.context, sig)
    print(f"model {model.name}; :context NAME=value[,...] to set the "
          f"context, :solutions <spec>, :quit to leave")
    while True:
        try:
            line = input("ccm> ").strip()
        except EOFError:
            print()
            return EXIT_OK
        if not line:
            continue
        try:
            if line in (":quit", ":q"):
                return EXIT_OK
            if line.startswith(":context"):
                context = parser.parse_context(line[len(":context"):], sig)
                print(f"context: {_render_state(context)}")
                continue
            if line.startswith(":solutions"):
                if context is None:
                    print("no context set; use :context NAME=value[,...]")
                    continue
                spec = parser.parse_spec(line[len(":solutions"):], sig)
                spec = formulas.normalize_spec(spec, sig)
                sols = semantics.solutions_fast(model, context, spec)
                print(f"{len(sols)} solution(s)")
                for state in sols.states:
                    print(f"  {_render_state(state)}")
                continue
            if line.startswith(":"):
                print(f"unknown command {line.split()[0]!r}")
                continue
            if context is None:
                print("no context set; use :context NAME=value[,...]")
                continue
            formula = parser.parse_formula(line, sig)
            value = semantics.evaluate(model, context,
                                       formulas.normalize(formula, sig))
            print(str(value).lower())
        except CcmError as err:
            print(f"error: {err}")


# ---- argument plumbing ------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ccm",
        description="Causal models with non-causal constraints: evaluate "
                    "intervention/disconnection queries, list solutions, "
                    "rewrite away disconnections, and machine-check axioms.")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--json", action="store_true",
                       help="emit JSON instead of human-readable output")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for any randomized part of the command")
        p.add_argument("--budget", type=int, default=1_000_000,
                       help="cap on exhaustively enumerated model-context "
                            "pairs")

    p = sub.add_parser("eval", help="evaluate a formula at a context")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-c", "--context", required=True,
                   help='e.g. "U=35" (must assign every exogenous variable)')
    p.add_argument("-f", "--formula", required=True,
                   help="inline formula or @path-to-file")
    p.add_argument("--show-solutions", action="store_true",
                   help="list the solution set of every box/diamond")
    p.add_argument("--assert-true", action="store_true",
                   help="exit 1 when the formula is false")
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("solutions", help="list solutions of an intervention")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-c", "--context", required=True)
    p.add_argument("-s", "--spec", required=True,
                   help='e.g. "disc(LDL), TOT <- 12"')
    p.add_argument("--count", action="store_true",
                   help="print only the number of solutions")
    common(p)
    p.set_defaults(func=cmd_solutions)

    p = sub.add_parser("rewrite", help="eliminate disconnections from a "
                                       "formula")
    p.add_argument("-m", "--model", required=True,
                   help="model file supplying the signature")
    p.add_argument("-f", "--formula", required=True)
    p.add_argument("--cap", type=int, default=rewrite.DEFAULT_EXPANSION_CAP,
                   help="max expanded prefixes per disconnection")
    p.add_argument("--desugar-diamonds", action="store_true",
                   help="also replace diamonds by negated boxes")
    common(p)
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("axioms", help="soundness sweep over random models")
    p.add_argument("--sig", required=True,
                   help="model file supplying the signature")
    p.add_argument("--schemas", default="all",
                   help="comma list of schema ids, or 'all' (the sound set; "
                        "name D9 explicitly to see it fail)")
    p.add_argument("--models", type=int, default=200)
    p.add_argument("--instances", type=int, default=8,
                   help="max instances per schema")
    p.add_argument("--set-size", type=int, default=2,
                   help="max intervention set size in instances")
    p.add_argument("--depth", type=int, default=2,
                   help="max body depth in instances")
    p.add_argument("--p-undefined", type=float, default=0.3,
                   help="probability an endogenous variable has no equation")
    p.add_argument("--p-in-constraints", type=float, default=0.7,
                   help="probability an extended state is admissible")
    common(p)
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("validity",
                       help="decide a formula over every model of a "
                            "signature")
    p.add_argument("--sig", required=True,
                   help="model file supplying the signature")
    p.add_argument("-f", "--formula", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exhaustive", action="store_true", default=True,
                       help="enumerate every model (default)")
    group.add_argument("--sample", type=float, default=None, metavar="FRAC",
                       help="check a seeded random fraction of models")
    p.add_argument("--out", help="write a counterexample model file here")
    common(p)
    p.set_defaults(func=cmd_validity)

    p = sub.add_parser("combine", help="merge two models plus linking "
                                       "constraints")
    p.add_argument("model_a")
    p.add_argument("model_b")
    p.add_argument("--links", help="file of `constraint <expr>` lines over "
                                   "the combined signature")
    p.add_argument("--name", help="name of the combined model")
    p.add_argument("-o", "--out", help="output path (default: stdout)")
    common(p)
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("repl", help="interactive query loop")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-c", "--context", default=None)
    common(p)
    p.set_defaults(func=cmd_repl)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (ModelError, FormulaError, EvaluationError, CombineError,
            BudgetError, ExpansionLimitError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
