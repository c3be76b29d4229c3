"""Gradient-guided selection of parameter decision literals.

Between models, the parameter literals are ranked by the partial
derivatives of the cost at the current sample frequencies: a positive
literal scores the partial itself, a negative literal its negation, and
branching picks the unassigned literal with the smallest score (steepest
descent). The ranking is a frozen snapshot; it is not recomputed during a
single model search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .costfn import CostSingularityError, CostSpec
from .model import SampleAccumulator


@dataclass(frozen=True)
class ParamRanking:
    entries: tuple[tuple[float, int], ...]  # (score, literal), ascending
    epoch: int  # sample size the ranking was computed at


EMPTY_RANKING = ParamRanking(entries=(), epoch=-1)


def rebuild_ranking(spec: CostSpec, acc: SampleAccumulator) -> ParamRanking:
    """Rank both polarities of every parameter atom at the current sample.

    An empty sample defaults all frequencies to zero. If the gradient is
    singular there (e.g. a conditional-probability cost before its
    condition ever held), the ranking falls back to all-zero scores, which
    leaves the deterministic tie-break order: lowest atom first, positive
    polarity first.
    """
    beta = acc.beta(default=0.0)
    try:
        grad = spec.gradient(beta)
    except CostSingularityError:
        grad = {p: 0.0 for p in spec.params}
    entries = []
    for p in spec.params:
        g = grad[p]
        entries.append((g, p))
        entries.append((-g, -p))
    entries.sort(key=lambda e: (e[0], abs(e[1]), 0 if e[1] > 0 else 1))
    return ParamRanking(entries=tuple(entries), epoch=acc.size)


def choose_decision(engine, ranking: ParamRanking, noise: float) -> Optional[tuple[int, float]]:
    """Best unassigned parameter literal, or None when all are assigned."""
    value = engine.value
    for _, lit in ranking.entries:
        if value[abs(lit)] is None:
            return lit, noise
    return None


@dataclass
class RankingHolder:
    """Mutable slot the sampler refreshes after every model."""

    noise: float = 0.001
    ranking: ParamRanking = field(default=EMPTY_RANKING)


def make_diff_decider(holder: RankingHolder):
    """Decision hook: parameter literals first, activity fallback otherwise."""

    def decide(engine) -> tuple[int, float]:
        picked = choose_decision(engine, holder.ranking, holder.noise)
        if picked is not None:
            return picked
        return engine.decide_fallback()

    return decide
