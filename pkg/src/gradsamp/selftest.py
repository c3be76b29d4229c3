"""Built-in smoke checks for the `selftest` subcommand."""

from __future__ import annotations

import random

from .compile import compile_program
from .costfn import CostSpec, check_gradient, parse_cost_expr
from .infer import synthesize_mse
from .oracle import enumerate_models
from .parsing import parse_ground_asp, parse_program
from .sampler import CONVERGED, SamplerConfig, enumerate_engine_models, run_sampling

TWO_ATOM_EXAMPLE = "0.2 :: a.\n0.6 :: b.\n:- a, b.\n"


def _random_cnf(rng: random.Random) -> str:
    num_vars = rng.randint(3, 8)
    num_clauses = rng.randint(num_vars, 3 * num_vars)
    lines = [f"p cnf {num_vars} {num_clauses}"]
    for _ in range(num_clauses):
        width = rng.randint(1, 3)
        atoms = rng.sample(range(1, num_vars + 1), min(width, num_vars))
        lits = [a if rng.random() < 0.5 else -a for a in atoms]
        lines.append(" ".join(map(str, lits)) + " 0")
    return "\n".join(lines) + "\n"


def run_selftest(verbose: bool = False) -> bool:
    checks: list[tuple[str, bool]] = []

    def check(name: str, ok: bool) -> None:
        checks.append((name, ok))
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'} {name}")

    # gradients of the two running cost shapes
    program = parse_ground_asp(TWO_ATOM_EXAMPLE)
    spec = CostSpec(synthesize_mse(program.weights, program.param_atoms),
                    tuple(program.param_atoms))
    try:
        check_gradient(spec, points=30)
        check("mse gradient vs finite differences", True)
    except AssertionError:
        check("mse gradient vs finite differences", False)

    cond_program = parse_ground_asp("{p}.\n{q}.\naux :- p, q.\n#cost (0.4 - f(aux)/f(q))^2.\n")
    cond_spec = CostSpec(cond_program.cost, tuple(cond_program.param_atoms))
    try:
        check_gradient(cond_spec, points=30, lo=0.1)
        check("conditional gradient vs finite differences", True)
    except AssertionError:
        check("conditional gradient vs finite differences", False)

    # two-atom convergence
    compiled = compile_program(parse_ground_asp(TWO_ATOM_EXAMPLE))
    result = run_sampling(compiled, spec_for(parse_ground_asp(TWO_ATOM_EXAMPLE)),
                          SamplerConfig(psi=0.001, seed=1, max_trials=50_000))
    check("two-atom example converges", result.reason == CONVERGED)

    # engine vs oracle on random CNFs
    rng = random.Random(7)
    ok = True
    for _ in range(15):
        program = parse_program(_random_cnf(rng))
        expected = set(enumerate_models(program))
        got = set(enumerate_engine_models(compile_program(program)))
        if expected != got:
            ok = False
            break
    check("engine matches brute force on random CNFs", ok)

    # stable-model enumeration incl. loop handling
    text = "p :- q.\nq :- p.\np :- not r.\nr :- not p.\n"
    program = parse_ground_asp(text)
    expected = set(enumerate_models(program))
    got = set(enumerate_engine_models(compile_program(program)))
    check("non-tight enumeration matches brute force", expected == got)

    return all(ok for _, ok in checks)


def spec_for(program) -> CostSpec:
    from .cli import build_cost_spec

    spec = build_cost_spec(program)
    assert spec is not None
    return spec
