"""Probabilistic-inference front end over a finished sample.

Marginals are plain atom frequencies in the sampled model multiset; MAP is
the most frequent model projected to the query. The mean-squared-error
synthesizer turns target weights into the cost the sampler minimizes, and
the conditional-probability builder installs the three auxiliary rules
that make a ratio of frequencies track Pr(p|q).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .costfn import Add, Const, CostExpr, Div, Freq, Pow, Sub
from .model import ORIGINAL, EmptySampleError, SampleAccumulator
from .parsing import Program, Rule


def synthesize_mse(weights: dict[int, float], order: Sequence[int] | None = None) -> CostExpr:
    """Normalized squared distance between frequencies and target weights."""
    if not weights:
        raise ValueError("no weights given")
    params = [p for p in (order or sorted(weights)) if p in weights]
    terms: list[CostExpr] = []
    for p in params:
        w = weights[p]
        if not 0.0 <= w <= 1.0:
            raise ValueError(f"weight {w} outside [0,1]")
        terms.append(Pow(Sub(Const(w), Freq(p)), 2))
    total = terms[0]
    for t in terms[1:]:
        total = Add(total, t)
    if len(terms) == 1:
        return total
    return Div(total, Const(float(len(terms))))


def marginal(acc: SampleAccumulator, atom: int) -> Fraction:
    """Frequency of `atom` in the sample, as an exact rational."""
    if acc.size == 0:
        raise EmptySampleError("cannot query an empty sample")
    count = sum(1 for m in acc.models if atom in m)
    return Fraction(count, acc.size)


def map_model(acc: SampleAccumulator, query_atoms: Iterable[int]) -> frozenset[int]:
    """Most frequent sampled model projected to the query atoms.

    Ties go to the model that entered the sample first.
    """
    if acc.size == 0:
        raise EmptySampleError("cannot query an empty sample")
    counts: dict[frozenset[int], int] = {}
    first_seen: dict[frozenset[int], int] = {}
    for i, m in enumerate(acc.models):
        counts[m] = counts.get(m, 0) + 1
        first_seen.setdefault(m, i)
    best = max(counts, key=lambda m: (counts[m], -first_seen[m]))
    return frozenset(best) & frozenset(query_atoms)


def conditional_cost(program: Program, p: int, q: int, target: float) -> CostExpr:
    """Install rules making f(aux)/f(q) track Pr(p|q); return the cost term.

    Requires `q` to be declared uncertain (a choice atom or weighted atom):
    the ratio is meaningless if the condition can never vary. The fresh
    auxiliary atom and `q` both become parameter atoms.
    """
    if not 0.0 <= target <= 1.0:
        raise ValueError("conditional target must be in [0,1]")
    table = program.table
    for atom in (p, q):
        if not 1 <= atom <= table.num_atoms:
            raise ValueError(f"unknown atom index {atom}")
    if q not in program.choice_atoms and q not in program.weights:
        raise ValueError(
            f"condition atom {table.name(q)!r} must be declared uncertain "
            "(a choice or weighted atom)"
        )
    aux = table.add(f"__cond_{table.name(p)}_{table.name(q)}", ORIGINAL)
    program.rules.append(Rule(aux, (p, q), ()))
    program.rules.append(Rule(p, (aux,), ()))
    program.rules.append(Rule(q, (aux,), ()))
    program.add_param(aux)
    program.add_param(q)
    term = Pow(Sub(Const(target), Div(Freq(aux), Freq(q))), 2)
    program.cost = term if program.cost is None else Add(program.cost, term)
    return term
