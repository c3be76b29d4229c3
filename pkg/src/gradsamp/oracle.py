"""Desk-scale brute-force oracles used by the test suite and selftest.

These implementations work straight from the definitions (truth tables,
reducts, least models) and share no code with the solving path, so they can
serve as independent ground truth for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .parsing import Program


class SizeGuardError(ValueError):
    """Instance too large for exhaustive enumeration."""


MAX_ENUM_ATOMS = 24
MAX_FEASIBILITY_MODELS = 4096


def enumerate_models(program: Program, max_atoms: int = MAX_ENUM_ATOMS) -> list[frozenset[int]]:
    """All satisfying assignments (SAT) or stable models (ASP).

    SAT models are scanned over the full truth table; ASP candidates are
    checked against the reduct/least-model definition, with choice atoms
    contributing themselves as facts when present in the candidate.
    """
    n = program.num_atoms
    if n > max_atoms:
        raise SizeGuardError(f"{n} atoms exceed the enumeration guard ({max_atoms})")
    if program.mode == "sat":
        return _enumerate_sat(program)
    if program.weighted_rules:
        raise ValueError("expand weighted rules before oracle enumeration")
    return _enumerate_stable(program)


def _enumerate_sat(program: Program) -> list[frozenset[int]]:
    n = program.num_atoms
    assignments = np.arange(1 << n, dtype=np.int64)
    sat = np.ones(1 << n, dtype=bool)
    for clause in program.clauses:
        pos_mask = 0
        neg_mask = 0
        for lit in clause:
            if lit > 0:
                pos_mask |= 1 << (lit - 1)
            else:
                neg_mask |= 1 << (-lit - 1)
        sat &= ((assignments & pos_mask) != 0) | ((~assignments & neg_mask) != 0)
    models = []
    for m in np.nonzero(sat)[0]:
        models.append(frozenset(a for a in range(1, n + 1) if m >> (a - 1) & 1))
    return models


def _least_model(definite: list[tuple[int, tuple[int, ...]]], facts: set[int]) -> set[int]:
    derived = set(facts)
    changed = True
    while changed:
        changed = False
        for head, pos in definite:
            if head not in derived and all(b in derived for b in pos):
                derived.add(head)
                changed = True
    return derived


def is_stable_by_definition(program: Program, candidate: frozenset[int]) -> bool:
    """Check a candidate against the stable-model definition directly."""
    for rule in program.rules:
        if rule.head == 0:
            if all(b in candidate for b in rule.pos) and not any(
                c in candidate for c in rule.neg
            ):
                return False
    reduct = [
        (r.head, r.pos)
        for r in program.rules
        if r.head != 0 and not any(c in candidate for c in r.neg)
    ]
    facts = {a for a in program.choice_atoms if a in candidate}
    least = _least_model(reduct, facts)
    return least == set(candidate)


def _enumerate_stable(program: Program) -> list[frozenset[int]]:
    n = program.num_atoms
    atoms = list(range(1, n + 1))
    models = []
    for bits in range(1 << n):
        candidate = frozenset(atoms[i] for i in range(n) if bits >> i & 1)
        if is_stable_by_definition(program, candidate):
            models.append(candidate)
    return models


# --- exact feasibility of weight assignments ---------------------------------


@dataclass
class FeasibilityResult:
    feasible: bool
    residual: float  # squared norm of A pi - target at the optimum found
    distribution: np.ndarray  # probability per model, in `models` order
    models: list[frozenset[int]]
    params: tuple[int, ...]


def _project_simplex(y: np.ndarray) -> np.ndarray:
    u = np.sort(y)[::-1]
    cumulative = (np.cumsum(u) - 1.0) / np.arange(1, y.shape[0] + 1)
    k = np.nonzero(u > cumulative)[0][-1]
    return np.clip(y - cumulative[k], 0.0, None)


def exact_feasibility(
    program: Program,
    weights: dict[int, float] | None = None,
    max_iters: int = 100_000,
    tol: float = 1e-10,
) -> FeasibilityResult:
    """Least-squares fit of a distribution over all models to target weights.

    Solves min ||A pi - w||^2 over the probability simplex by projected
    gradient descent, where A[i, j] = 1 iff parameter atom i holds in model
    j. A (near-)zero residual certifies that the requested marginals are
    realizable by some distribution over the models.
    """

    weights = dict(weights if weights is not None else program.weights)
    if not weights:
        raise ValueError("no weights to check")
    params = tuple(p for p in program.param_atoms if p in weights) or tuple(weights)
    models = enumerate_models(program)
    if len(models) > MAX_FEASIBILITY_MODELS:
        raise SizeGuardError(f"{len(models)} models exceed the feasibility guard")
    target = np.array([weights[p] for p in params])
    if not models:
        return FeasibilityResult(False, float(target @ target), np.zeros(0), [], params)

    a_matrix = np.array(
        [[1.0 if p in m else 0.0 for m in models] for p in params]
    )
    num_models = len(models)
    pi = np.full(num_models, 1.0 / num_models)
    step = 1.0 / max(float(np.linalg.norm(a_matrix, "fro") ** 2), 1e-12)
    residual = float(np.sum((a_matrix @ pi - target) ** 2))
    stall = 0
    for _ in range(max_iters):
        grad = 2.0 * a_matrix.T @ (a_matrix @ pi - target)
        new_pi = _project_simplex(pi - step * grad)
        new_residual = float(np.sum((a_matrix @ new_pi - target) ** 2))
        if residual - new_residual < 1e-16:
            stall += 1
        else:
            stall = 0
        pi, residual = new_pi, new_residual
        if residual <= tol or stall > 200:
            break
    return FeasibilityResult(residual <= 1e-7, residual, pi, models, params)


def product_marginal(program: Program, atom: int) -> float:
    """Marginal of `atom` under independent parameter weights.

    Applicable when every model corresponds to exactly one subset of the
    weighted atoms, which holds for the generated benchmark families; the
    product weights then sum to one over the model set. Raises ValueError
    when the program is not product-decomposable in this sense.
    """
    weights = program.weights
    if not weights:
        raise ValueError("program declares no weights")
    models = enumerate_models(program)
    total = 0.0
    marginal = 0.0
    for m in models:
        w = 1.0
        for p, wp in weights.items():
            w *= wp if p in m else 1.0 - wp
        total += w
        if atom in m:
            marginal += w
    if abs(total - 1.0) > 1e-9:
        raise ValueError(
            f"model weights sum to {total:.6f}; program is not product-decomposable"
        )
    return marginal
