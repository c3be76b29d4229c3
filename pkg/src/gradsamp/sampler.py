"""Outer sampling loop: solve, verify stability, accumulate, test termination.

Sampling repeats single-model searches against one persistent engine (so
learned and loop nogoods carry over), refreshing the parameter-literal
ranking after every accepted model. It stops when the cost reaches the
accuracy threshold with enough models, when the cost stagnates, when the
trial budget runs out, or on unsatisfiability.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field, replace
from queue import Queue
from typing import Optional

from .branching import RankingHolder, make_diff_decider, rebuild_ranking
from .compile import CompiledInstance
from .costfn import CostSpec
from .engine import Engine, SearchCancelled, SolverOptions
from .model import ORIGINAL, WEIGHT_AUX, SampleAccumulator
from .stability import is_stable, loop_nogoods

CONVERGED = "converged"
STAGNATED = "stagnated"
TRIALS_EXHAUSTED = "trials_exhausted"
UNSAT = "unsat"


@dataclass
class SamplerConfig:
    psi: float = 0.01  # accuracy threshold on the cost
    min_models: int = 0  # extra models required beyond reaching psi
    noise: float = 0.001  # probability of flipping a parameter decision
    max_trials: int = 10**6  # inner solves before giving up
    stagnation_window: int = 0  # 0 disables the stagnation check
    stagnation_eps: float = 0.0
    seed: int = 0
    portfolio_width: int = 1
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self) -> None:
        if self.psi < 0:
            raise ValueError("psi must be non-negative")
        if not 0.0 <= self.noise < 1.0:
            raise ValueError("noise must be in [0, 1)")
        if self.max_trials < 1:
            raise ValueError("max_trials must be positive")


@dataclass
class SampleResult:
    accumulator: SampleAccumulator
    final_cost: Optional[float]
    reason: str
    trials: int
    costs: list[float] = field(default_factory=list)  # cost after each model
    per_model_seconds: list[float] = field(default_factory=list)
    winner: Optional[int] = None  # portfolio lane that produced the first model

    @property
    def models_generated(self) -> int:
        return self.accumulator.size


def next_stable_model(
    engine: Engine,
    compiled: CompiledInstance,
    max_solves: Optional[int] = None,
    stop: Optional[threading.Event] = None,
) -> tuple[Optional[frozenset[int]], int]:
    """Run inner searches until a (stable) model appears.

    Returns (atoms, solves_used); atoms is None on UNSAT, and a budget
    overrun returns (None, used) with used == max_solves having produced
    nothing. Non-stable candidates trigger loop nogoods and a retry.
    """
    used = 0
    while max_solves is None or used < max_solves:
        used += 1
        if not engine.solve_one(stop=stop):
            return None, used
        if compiled.mode == "sat" or compiled.tight:
            return engine.sample_atoms(), used
        candidate = engine.sample_atoms()
        verdict = is_stable(compiled, candidate)
        if verdict.stable:
            return candidate, used
        new_nogoods = loop_nogoods(compiled, verdict.unfounded)
        progress = False
        for ng in new_nogoods:
            engine.add_root_nogood(ng, "loop")
            progress = progress or engine.violates(ng)
        if not progress:
            raise AssertionError(
                "loop nogoods failed to exclude the unstable candidate"
            )
    return None, used


def _sample_projection(compiled: CompiledInstance, atoms: frozenset[int]) -> frozenset[int]:
    """Atoms recorded in the sample: originals plus weight-carrying auxiliaries.

    Choice auxiliaries are encoding artifacts and dropped; weight
    auxiliaries are parameter atoms whose frequencies the cost reads, so
    they stay in the stored models (output paths hide them separately).
    """
    table = compiled.table
    keep = (ORIGINAL, WEIGHT_AUX)
    return frozenset(a for a in atoms if table.kind(a) in keep)


def _check_termination(
    cost: float, acc_size: int, costs: list[float], config: SamplerConfig
) -> Optional[str]:
    if cost <= config.psi and acc_size >= config.min_models:
        return CONVERGED
    w = config.stagnation_window
    if w and len(costs) >= 2 * w:
        previous = min(costs[-2 * w : -w])
        current = min(costs[-w:])
        if previous - current < config.stagnation_eps:
            return STAGNATED
    return None


def run_sampling(
    compiled: CompiledInstance,
    cost_spec: Optional[CostSpec],
    config: Optional[SamplerConfig] = None,
) -> SampleResult:
    config = config or SamplerConfig()
    engine = Engine(compiled, options=config.solver, seed=config.seed)
    return _sample_with_engine(engine, compiled, cost_spec, config)


def _sample_with_engine(
    engine: Engine,
    compiled: CompiledInstance,
    cost_spec: Optional[CostSpec],
    config: SamplerConfig,
    first_model: Optional[frozenset[int]] = None,
    trials_spent: int = 0,
    winner: Optional[int] = None,
) -> SampleResult:
    acc = SampleAccumulator(compiled.param_atoms)
    result = SampleResult(acc, None, UNSAT, trials_spent, winner=winner)
    holder = RankingHolder(noise=config.noise)
    if cost_spec is not None:
        engine.decide_hook = make_diff_decider(holder)

    if cost_spec is None:
        # plain solver behavior: a single model, no cost bookkeeping
        if first_model is None:
            started = time.perf_counter()
            atoms, used = next_stable_model(engine, compiled, config.max_trials)
            result.trials += used
            result.per_model_seconds.append(time.perf_counter() - started)
            if atoms is None:
                result.reason = UNSAT if used < config.max_trials else TRIALS_EXHAUSTED
                return result
            first_model = atoms
        acc.add_model(_sample_projection(compiled, first_model))
        result.reason = CONVERGED
        return result

    pending = first_model
    while True:
        if pending is None:
            holder.ranking = rebuild_ranking(cost_spec, acc)
            budget = config.max_trials - result.trials
            if budget <= 0:
                result.reason = TRIALS_EXHAUSTED
                break
            started = time.perf_counter()
            atoms, used = next_stable_model(engine, compiled, budget)
            result.trials += used
            result.per_model_seconds.append(time.perf_counter() - started)
            if atoms is None:
                if result.trials >= config.max_trials:
                    result.reason = TRIALS_EXHAUSTED
                else:
                    result.reason = UNSAT
                break
        else:
            atoms, pending = pending, None
        acc.add_model(_sample_projection(compiled, atoms))
        cost = cost_spec.evaluate(acc.beta())
        result.costs.append(cost)
        result.final_cost = cost
        reason = _check_termination(cost, acc.size, result.costs, config)
        if reason:
            result.reason = reason
            break
        if result.trials >= config.max_trials:
            result.reason = TRIALS_EXHAUSTED
            break
    return result


# --- portfolio mode -----------------------------------------------------------


def _racer_options(base: SolverOptions, lane: int) -> SolverOptions:
    if lane == 0:
        return base
    unit = base.restart_unit or 64
    return replace(
        base,
        phase_default=not base.phase_default if lane % 2 else base.phase_default,
        restart_unit=unit << (lane // 2 % 3),
    )


def run_portfolio(
    compiled: CompiledInstance,
    cost_spec: Optional[CostSpec],
    config: Optional[SamplerConfig] = None,
) -> SampleResult:
    """Race differently configured engines for the first model.

    The first engine to finish wins; its configuration (and accumulated
    state) serves all subsequent models, matching run_sampling semantics.
    """
    config = config or SamplerConfig()
    width = config.portfolio_width
    if width <= 1:
        return run_sampling(compiled, cost_spec, config)

    stop = threading.Event()
    results: Queue = Queue()
    engines: list[Engine] = []
    holder = RankingHolder(noise=config.noise)
    if cost_spec is not None:
        # first-model ranking: the empty-sample default
        holder.ranking = rebuild_ranking(cost_spec, SampleAccumulator(compiled.param_atoms))

    def race(lane: int) -> None:
        engine = engines[lane]
        try:
            atoms, used = next_stable_model(engine, compiled, config.max_trials, stop=stop)
            results.put((lane, atoms, used))
        except SearchCancelled:
            pass
        except BaseException as exc:  # surface engine bugs instead of hanging
            results.put((lane, exc, 0))

    threads = []
    for lane in range(width):
        engine = Engine(compiled, options=_racer_options(config.solver, lane), seed=config.seed + lane)
        if cost_spec is not None:
            engine.decide_hook = make_diff_decider(holder)
        engines.append(engine)
    started = time.perf_counter()
    for lane in range(width):
        t = threading.Thread(target=race, args=(lane,), daemon=True)
        threads.append(t)
        t.start()
    lane, atoms, used = results.get()
    stop.set()
    for t in threads:
        t.join()
    if isinstance(atoms, BaseException):
        raise atoms
    elapsed = time.perf_counter() - started

    winner_engine = engines[lane]
    if atoms is None:
        acc = SampleAccumulator(compiled.param_atoms)
        reason = UNSAT if used < config.max_trials else TRIALS_EXHAUSTED
        return SampleResult(acc, None, reason, used, winner=lane)
    result = _sample_with_engine(
        winner_engine,
        compiled,
        cost_spec,
        config,
        first_model=atoms,
        trials_spent=used,
        winner=lane,
    )
    result.per_model_seconds.insert(0, elapsed)
    return result


# --- enumeration mode ---------------------------------------------------------


def enumerate_engine_models(
    compiled: CompiledInstance,
    limit: Optional[int] = None,
    seed: int = 0,
    options: Optional[SolverOptions] = None,
) -> list[frozenset[int]]:
    """All models (stable models in ASP mode), via blocking nogoods.

    Each found model is excluded by a nogood over the original atoms'
    assignment; auxiliary atoms are functionally determined by them, so
    this enumerates user-distinct models exactly once.
    """
    engine = Engine(compiled, options=options or SolverOptions(), seed=seed)
    table = compiled.table
    originals = [a for a in range(1, compiled.num_atoms + 1) if table.kind(a) == ORIGINAL]
    found: list[frozenset[int]] = []
    while limit is None or len(found) < limit:
        atoms, _ = next_stable_model(engine, compiled)
        if atoms is None:
            break
        model = frozenset(a for a in atoms if table.kind(a) == ORIGINAL)
        found.append(model)
        blocking = tuple(sorted(a if a in model else -a for a in originals))
        if not blocking:
            break  # no original atoms: single empty model
        engine.add_root_nogood(blocking, "blocking")
    return found
