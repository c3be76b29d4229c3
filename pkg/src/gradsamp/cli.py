"""Command-line interface.

Subcommands: sample (minimize a cost over model frequencies), solve (plain
one-model solving), query (marginal/MAP over a saved sample), encode
(reified encodings), gen (benchmark generators), selftest. Exit codes
follow solver conventions: 10 satisfiable/converged, 20 unsatisfiable,
3 non-convergence, 2 input error, 1 usage error, 0 for pure utilities.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .benchgen import gen_coins, gen_random_graph, gen_smokers
from .compile import compile_program
from .costfn import Add, CostSingularityError, CostSpec
from .infer import map_model, marginal, synthesize_mse
from .model import WEIGHT_AUX, EmptySampleError
from .oracle import enumerate_models, exact_feasibility
from .parsing import ParseError, Program, parse_program
from .reify import encode_equation, encode_minimize
from .sampleio import read_sample, write_sample
from .sampler import (
    CONVERGED,
    UNSAT,
    SamplerConfig,
    run_portfolio,
    run_sampling,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_SAT = 10
EXIT_UNSAT = 20


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fp:
        return fp.read()


def _load_program(path: str, fmt: Optional[str]) -> Program:
    return parse_program(_read_text(path), fmt)


def build_cost_spec(program: Program, use_closed_form: bool = False) -> Optional[CostSpec]:
    """Total cost: synthesized MSE over declared weights plus explicit terms."""
    expr = None
    mse_weights = None
    if program.weights:
        expr = synthesize_mse(program.weights, order=program.param_atoms)
        mse_weights = dict(program.weights)
    if program.cost is not None:
        expr = program.cost if expr is None else Add(expr, program.cost)
        mse_weights = None  # mixed objective: closed form no longer applies
    if expr is None:
        return None
    return CostSpec(
        expr,
        tuple(program.param_atoms),
        mse_weights=mse_weights,
        use_closed_form=use_closed_form,
    )


def _query_atom_names(program: Program) -> list[str]:
    table = program.table
    atoms = list(program.query_atoms)
    if not atoms:
        atoms = [p for p in program.param_atoms if table.kind(p) != WEIGHT_AUX]
    return [table.name(a) for a in atoms]


def _parse_stagnation(text: str) -> tuple[int, float]:
    try:
        window, eps = text.split(":")
        return int(window), float(eps)
    except ValueError:
        raise argparse.ArgumentTypeError("expected WINDOW:EPS, e.g. 200:1e-4") from None


def cmd_sample(args) -> int:
    program = _load_program(args.file, args.format)
    compiled = compile_program(program)
    cost_spec = build_cost_spec(program, use_closed_form=args.mse)
    window, eps = args.stagnation if args.stagnation else (0, 0.0)
    config = SamplerConfig(
        psi=args.psi,
        min_models=args.n,
        noise=args.noise,
        max_trials=args.max_trials,
        stagnation_window=window,
        stagnation_eps=eps,
        seed=args.seed,
        portfolio_width=args.threads,
    )
    runner = run_portfolio if args.threads > 1 else run_sampling
    try:
        result = runner(compiled, cost_spec, config)
    except CostSingularityError as exc:
        print(f"cost evaluation failed: {exc}", file=sys.stderr)
        return EXIT_INPUT

    table = program.table
    if result.accumulator.size > 0:
        for name in _query_atom_names(program):
            atom = table.lookup(name)
            prob = float(marginal(result.accumulator, atom))
            print(f"{name} {prob:.6f}")
    if args.out:
        theta = [table.name(p) for p in compiled.param_atoms]
        models = [
            frozenset(table.name(a) for a in m) for m in result.accumulator.models
        ]
        with open(args.out, "w", encoding="utf-8") as fp:
            write_sample(
                fp, models, theta, args.seed, args.psi, result.final_cost, result.reason
            )
    print(f"COST {'-' if result.final_cost is None else repr(result.final_cost)}")
    print(f"N {result.accumulator.size}")
    print(f"REASON {result.reason}")
    if result.reason == CONVERGED:
        return EXIT_SAT
    if result.reason == UNSAT:
        return EXIT_UNSAT
    return EXIT_NO_CONVERGENCE


def cmd_solve(args) -> int:
    program = _load_program(args.file, args.format)
    compiled = compile_program(program)
    config = SamplerConfig(seed=args.seed, portfolio_width=args.threads)
    runner = run_portfolio if args.threads > 1 else run_sampling
    result = runner(compiled, None, config)
    if result.reason != CONVERGED:
        print("UNSAT")
        return EXIT_UNSAT
    table = program.table
    model = result.accumulator.models[0]
    names = sorted(table.name(a) for a in model if table.kind(a) != WEIGHT_AUX)
    print(" ".join(names))
    return EXIT_SAT


def cmd_query(args) -> int:
    with open(args.sample, "r", encoding="utf-8") as fp:
        data = read_sample(fp)
    if not data.models:
        print("sample file contains no models", file=sys.stderr)
        return EXIT_INPUT
    n = len(data.models)
    if args.map is not None:
        query = set(args.map or data.theta)
        counts: dict[frozenset, int] = {}
        first: dict[frozenset, int] = {}
        for i, m in enumerate(data.models):
            counts[m] = counts.get(m, 0) + 1
            first.setdefault(m, i)
        best = max(counts, key=lambda m: (counts[m], -first[m]))
        print(" ".join(sorted(best & query)))
        return EXIT_OK
    atoms = args.atoms or data.theta
    for name in atoms:
        count = sum(1 for m in data.models if name in m)
        print(f"{name} {count / n:.6f}")
    return EXIT_OK


def cmd_encode(args) -> int:
    program = _load_program(args.file, args.format)
    if args.variant == "min":
        text = encode_minimize(program, args.nmodels)
    else:
        text = encode_equation(program, args.nmodels, args.tol, args.multiplier)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.family == "coins":
        text = gen_coins(args.size, args.seed)
    elif args.family == "smokers":
        text = gen_smokers(args.size, args.seed, args.density)
    else:
        text = gen_random_graph(args.size, args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    # debugging aid: brute-force models and weight feasibility
    program = _load_program(args.file, args.format)
    table = program.table
    models = enumerate_models(program)
    for m in models:
        print(" ".join(sorted(table.name(a) for a in m)))
    print(f"MODELS {len(models)}")
    if program.weights:
        feas = exact_feasibility(program)
        print(f"FEASIBLE {'yes' if feas.feasible else 'no'}")
        print(f"RESIDUAL {feas.residual:.3e}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return EXIT_OK if run_selftest(verbose=True) else EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gradsamp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(
        dest="command",
        metavar="{sample,solve,query,encode,gen,selftest}",
        required=True,
    )

    def add_common(p):
        p.add_argument("file", help="input program (.cnf or .lp)")
        p.add_argument("--format", choices=("cnf", "lp"), default=None,
                       help="input format (default: auto-detect)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1,
                       help="portfolio width for the first model")

    p = sub.add_parser("sample", help="sample models until the cost converges")
    add_common(p)
    p.add_argument("--psi", type=float, default=0.01, help="accuracy threshold")
    p.add_argument("--n", type=int, default=0, help="minimum sample size")
    p.add_argument("--noise", type=float, default=0.001)
    p.add_argument("--max-trials", type=int, default=10**6)
    p.add_argument("--stagnation", type=_parse_stagnation, default=None,
                   metavar="WINDOW:EPS", help="stop when the cost stops improving")
    p.add_argument("--mse", action="store_true",
                   help="closed-form gradients for weight-derived costs")
    p.add_argument("--out", default=None, help="write the sample to a file")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("solve", help="find one model or report UNSAT")
    add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("query", help="marginals or MAP from a saved sample")
    p.add_argument("sample", help="sample file written by `sample --out`")
    p.add_argument("--atoms", nargs="*", default=None)
    p.add_argument("--map", nargs="*", default=None,
                   help="print the MAP model projected to these atoms")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("encode", help="emit a reified encoding")
    p.add_argument("file")
    p.add_argument("--format", choices=("cnf", "lp"), default=None)
    p.add_argument("--variant", choices=("min", "eq"), required=True)
    p.add_argument("--nmodels", type=int, required=True)
    p.add_argument("--tol", type=int, default=3)
    p.add_argument("--multiplier", type=int, default=100)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("gen", help="generate a benchmark instance")
    p.add_argument("family", choices=("coins", "smokers", "graph"))
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=0.3,
                   help="friendship density (smokers only)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("selftest", help="run the built-in smoke checks")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("oracle")  # hidden from the metavar above
    p.add_argument("file")
    p.add_argument("--format", choices=("cnf", "lp"), default=None)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, EmptySampleError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
