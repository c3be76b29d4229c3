"""Gradient-guided sampling of SAT models and answer sets.

The sampler draws a multiset of models whose atom frequencies minimize a
user-supplied differentiable cost, which turns a plain SAT/ASP solver into
a tool for distribution-aware sampling and probabilistic inference.
"""

from .branching import ParamRanking, RankingHolder, rebuild_ranking
from .compile import CompiledInstance, compile_program
from .costfn import CostSingularityError, CostSpec, check_gradient, parse_cost_expr
from .engine import Engine, SolverOptions
from .infer import conditional_cost, map_model, marginal, synthesize_mse
from .model import EmptySampleError, SampleAccumulator
from .oracle import enumerate_models, exact_feasibility, product_marginal
from .parsing import (
    ParseError,
    Program,
    parse_cnf_with_cost,
    parse_ground_asp,
    parse_program,
)
from .sampler import (
    SampleResult,
    SamplerConfig,
    enumerate_engine_models,
    run_portfolio,
    run_sampling,
)
from .stability import extract_model, is_stable, loop_nogoods

__version__ = "0.1.0"

__all__ = [
    "CompiledInstance",
    "CostSingularityError",
    "CostSpec",
    "EmptySampleError",
    "Engine",
    "ParamRanking",
    "ParseError",
    "Program",
    "RankingHolder",
    "SampleAccumulator",
    "SampleResult",
    "SamplerConfig",
    "SolverOptions",
    "check_gradient",
    "compile_program",
    "conditional_cost",
    "enumerate_engine_models",
    "enumerate_models",
    "exact_feasibility",
    "extract_model",
    "is_stable",
    "loop_nogoods",
    "map_model",
    "marginal",
    "parse_cnf_with_cost",
    "parse_cost_expr",
    "parse_ground_asp",
    "parse_program",
    "product_marginal",
    "rebuild_ranking",
    "run_portfolio",
    "run_sampling",
    "synthesize_mse",
]
