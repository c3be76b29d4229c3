"""Stable-model verification and lazy loop nogoods for non-tight programs.

A total assignment that satisfies the completion nogoods is only a model
candidate: atoms may support each other in positive cycles. The check
computes the reduct's least model by counter-based forward chaining and
compares; the unfounded remainder is split into strongly connected
components of the positive dependency graph restricted to it, and each
cyclic component yields one nogood per member atom ruling out the
circular support. The current candidate violates at least one of them, so
the re-run search cannot produce it again.
"""

from __future__ import annotations

from dataclasses import dataclass

from .compile import CompiledInstance, tarjan_sccs
from .model import ORIGINAL, make_nogood


@dataclass
class ReductResult:
    stable: bool
    least_model: frozenset[int]
    unfounded: frozenset[int]


def extract_model(engine) -> frozenset[int]:
    """User-visible model: positive original atoms only."""
    return engine.true_atoms((ORIGINAL,))


def is_stable(compiled: CompiledInstance, candidate: frozenset[int]) -> ReductResult:
    """Compare `candidate` with the least model of its reduct.

    `candidate` must contain the true non-body atoms of a completed,
    conflict-free assignment (auxiliary choice and weight atoms included;
    they are ordinary atoms of the expanded program).
    """
    # reduct: keep rules whose negative body avoids the candidate
    watchers: dict[int, list[int]] = {}
    pending: list[int] = []  # unmet positive-premise counts, by reduct index
    heads: list[int] = []
    queue: list[int] = []
    derived: set[int] = set()
    for rule in compiled.rules:
        if rule.head == 0 or any(c in candidate for c in rule.neg):
            continue
        idx = len(heads)
        heads.append(rule.head)
        pending.append(len(rule.pos))
        if not rule.pos:
            queue.append(idx)
        for b in rule.pos:
            watchers.setdefault(b, []).append(idx)
    while queue:
        idx = queue.pop()
        head = heads[idx]
        if head in derived:
            continue
        if pending[idx] > 0:
            continue
        derived.add(head)
        for widx in watchers.get(head, ()):
            pending[widx] -= 1
            if pending[widx] == 0:
                queue.append(widx)
    least = frozenset(derived)
    unfounded = frozenset(candidate - least)
    return ReductResult(stable=not unfounded and least == candidate, least_model=least, unfounded=unfounded)


def loop_nogoods(compiled: CompiledInstance, unfounded: frozenset[int]) -> list[tuple[int, ...]]:
    """Nogoods excluding circular support inside the unfounded set.

    For each cyclic component L: an atom of L may only be true if some rule
    for it has a positive body reaching outside L (an external support
    body); the emitted nogood forbids the atom together with all external
    support bodies being false.
    """
    if not unfounded:
        return []
    edges: dict[int, list[int]] = {}
    for a in unfounded:
        targets = [b for b in compiled.pos_edges.get(a, ()) if b in unfounded]
        if targets:
            edges[a] = targets
    sccs = tarjan_sccs(sorted(unfounded), edges)
    out: list[tuple[int, ...]] = []
    for comp in sccs:
        comp_set = set(comp)
        cyclic = len(comp) > 1 or comp[0] in edges.get(comp[0], ())
        if not cyclic:
            continue
        external: list[int] = []
        vacuous = False
        for a in comp:
            for ridx in compiled.head_rules.get(a, ()):
                rule = compiled.rules[ridx]
                if comp_set.isdisjoint(rule.pos):
                    if rule.body_lit == 0:
                        vacuous = True  # a fact supports the loop: nothing to forbid
                        break
                    if rule.body_lit not in external:
                        external.append(rule.body_lit)
            if vacuous:
                break
        if vacuous:
            continue
        forbid = tuple(-bl for bl in external)
        for a in comp:
            ng = make_nogood((a,) + forbid)
            if ng is not None:
                out.append(ng)
    return out
