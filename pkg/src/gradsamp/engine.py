"""Conflict-driven nogood learning over a watched-literal store.

A nogood is violated when all of its literals are satisfied, so propagation
watches two not-yet-satisfied literals per nogood: when one watch becomes
satisfied and no replacement exists, the other watch is either falsified
(nogood dormant), unassigned (its complement is unit-resulting), or
satisfied (conflict). Learned and loop nogoods persist across calls to
solve_one, which is what makes repeated model sampling cheap.

The branching decision is pluggable through `decide_hook`; the built-in
fallback picks the unassigned atom with the highest conflict-driven
activity and reuses its saved phase.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from typing import Callable, Optional

from .compile import CompiledInstance
from .model import PROGRAM_KINDS


class ConflictBudgetExceeded(RuntimeError):
    """The configured per-search conflict budget ran out."""


class SearchCancelled(RuntimeError):
    """A portfolio race was decided by another engine."""


@dataclass
class SolverOptions:
    restart_unit: int = 64  # Luby unit in conflicts; 0 disables restarts
    max_learned: int = 4000  # learned nogoods kept before deletion; 0 disables
    learned_growth: float = 1.5
    phase_default: bool = False
    activity_decay: float = 0.95
    max_conflicts: Optional[int] = None  # per solve_one; None = unlimited


def luby(i: int) -> int:
    """Luby restart sequence 1,1,2,1,1,2,4,... (0-based index)."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) // 2
        seq -= 1
        i = i % size
    return 1 << seq


class NogoodStore:
    def __init__(self, num_atoms: int, initial: list[tuple[int, ...]]):
        self.num_atoms = num_atoms
        self.nogoods: list[tuple[int, ...]] = []
        self.origin: list[str] = []
        self.activity: list[float] = []
        self.dead: list[bool] = []
        self.watch_pair: list[list[int]] = []
        # watch lists indexed by literal: index = lit + num_atoms
        self.watches: list[list[int]] = [[] for _ in range(2 * num_atoms + 1)]
        self.units: list[tuple[int, int]] = []  # (literal, nogood index)
        self.num_learned_alive = 0
        for ng in initial:
            self.add(ng, "initial")

    def _widx(self, lit: int) -> int:
        return lit + self.num_atoms

    def add(self, ng: tuple[int, ...], origin: str, watch_hint=None) -> int:
        idx = len(self.nogoods)
        self.nogoods.append(ng)
        self.origin.append(origin)
        self.activity.append(0.0)
        self.dead.append(False)
        if len(ng) == 1:
            self.units.append((ng[0], idx))
            self.watch_pair.append([0, 0])
        else:
            w1, w2 = watch_hint if watch_hint else (ng[0], ng[1])
            self.watch_pair.append([w1, w2])
            self.watches[self._widx(w1)].append(idx)
            self.watches[self._widx(w2)].append(idx)
        if origin == "learned":
            self.num_learned_alive += 1
        return idx

    def remove(self, idx: int) -> None:
        if self.dead[idx]:
            return
        self.dead[idx] = True
        for w in self.watch_pair[idx]:
            if w != 0:
                lst = self.watches[self._widx(w)]
                if idx in lst:
                    lst.remove(idx)
        if self.origin[idx] == "learned":
            self.num_learned_alive -= 1


class Engine:
    def __init__(
        self,
        compiled: CompiledInstance,
        options: Optional[SolverOptions] = None,
        seed: int = 0,
        debug_checks: bool = False,
    ):
        self.compiled = compiled
        self.options = options or SolverOptions()
        n = compiled.num_atoms
        self.num_atoms = n
        self.store = NogoodStore(n, compiled.nogoods)
        self.value: list[Optional[bool]] = [None] * (n + 1)
        self.level: list[int] = [0] * (n + 1)
        self.reason: list[int] = [-1] * (n + 1)  # nogood index, -1 = decision
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.saved = [self.options.phase_default] * (n + 1)
        self.activity = [0.0] * (n + 1)
        self.act_inc = 1.0
        self.rng = random.Random(seed)
        self.decide_hook: Callable[[Engine], tuple[int, float]] = Engine.decide_fallback
        self.debug_checks = debug_checks
        self.learned_cap = self.options.max_learned
        self.stats = {"conflicts": 0, "decisions": 0, "propagations": 0, "restarts": 0}

    # --- assignment primitives ---

    def satisfied(self, lit: int) -> bool:
        return self.value[abs(lit)] is (lit > 0)

    def falsified(self, lit: int) -> bool:
        v = self.value[abs(lit)]
        return v is not None and v is not (lit > 0)

    @property
    def current_level(self) -> int:
        return len(self.trail_lim)

    def _assign(self, lit: int, reason_idx: int) -> None:
        atom = abs(lit)
        self.value[atom] = lit > 0
        self.level[atom] = self.current_level
        self.reason[atom] = reason_idx
        self.trail.append(lit)

    def _backjump(self, target_level: int) -> None:
        keep = self.trail_lim[target_level] if target_level < self.current_level else len(self.trail)
        while len(self.trail) > keep:
            lit = self.trail.pop()
            atom = abs(lit)
            self.saved[atom] = self.value[atom]
            self.value[atom] = None
            self.reason[atom] = -1
        del self.trail_lim[target_level:]
        self.qhead = len(self.trail)

    def _reset(self) -> None:
        self._backjump(0)
        while self.trail:
            lit = self.trail.pop()
            atom = abs(lit)
            self.saved[atom] = self.value[atom]
            self.value[atom] = None
            self.reason[atom] = -1
        self.qhead = 0

    # --- propagation ---

    def _init_units(self) -> bool:
        for lit, idx in self.store.units:
            if self.satisfied(lit):
                return False  # two contradictory unit nogoods
            if not self.falsified(lit):
                self._assign(-lit, idx)
        return True

    def _propagate(self) -> Optional[int]:
        """Unit propagation to fixpoint; returns a violated nogood's index."""
        store = self.store
        nogoods = store.nogoods
        watch_pair = store.watch_pair
        n = self.num_atoms
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            self.stats["propagations"] += 1
            watchers = store.watches[lit + n]
            i = 0
            while i < len(watchers):
                ng_idx = watchers[i]
                pair = watch_pair[ng_idx]
                other = pair[1] if pair[0] == lit else pair[0]
                if self.falsified(other):
                    i += 1  # nogood cannot be violated under this assignment
                    continue
                moved = False
                for cand in nogoods[ng_idx]:
                    if cand != pair[0] and cand != pair[1] and not self.satisfied(cand):
                        # move this watch from `lit` to `cand`
                        pair[0 if pair[0] == lit else 1] = cand
                        watchers[i] = watchers[-1]
                        watchers.pop()
                        store.watches[cand + n].append(ng_idx)
                        moved = True
                        break
                if moved:
                    continue
                if self.satisfied(other):
                    return ng_idx  # every literal satisfied: violated
                self._assign(-other, ng_idx)
                i += 1
        return None

    # --- conflict analysis (first UIP) ---

    def _analyze(self, conflict_idx: int) -> tuple[tuple[int, ...], int, int]:
        """Resolve to the first UIP.

        Returns (learned nogood, backjump level, uip literal). The learned
        nogood consists of currently satisfied literals with exactly one,
        the UIP, at the conflict level; its complement is asserted after
        backjumping.
        """
        store = self.store
        seen = [False] * (self.num_atoms + 1)
        learned_rest: list[int] = []
        counter = 0
        conflict_level = self.current_level
        lits = store.nogoods[conflict_idx]
        store.activity[conflict_idx] += self.act_inc
        ti = len(self.trail) - 1
        uip = 0
        while True:
            for q in lits:
                a = abs(q)
                if seen[a] or self.level[a] == 0:
                    continue
                seen[a] = True
                self.activity[a] += self.act_inc
                if self.level[a] == conflict_level:
                    counter += 1
                else:
                    learned_rest.append(q)
            while not seen[abs(self.trail[ti])]:
                ti -= 1
            uip = self.trail[ti]
            a = abs(uip)
            ti -= 1
            seen[a] = False
            counter -= 1
            if counter == 0:
                break
            reason_idx = self.reason[a]
            store.activity[reason_idx] += self.act_inc
            lits = tuple(q for q in store.nogoods[reason_idx] if abs(q) != a)
        backjump_level = max((self.level[abs(q)] for q in learned_rest), default=0)
        learned = tuple(sorted(learned_rest + [uip]))
        if self.debug_checks:
            assert all(self.satisfied(q) for q in learned)
            at_conflict = [q for q in learned if self.level[abs(q)] == conflict_level]
            assert at_conflict == [uip], "learned nogood is not asserting"
        self._rescale_activities()
        return learned, backjump_level, uip

    def _rescale_activities(self) -> None:
        self.act_inc /= self.options.activity_decay
        if self.act_inc > 1e100:
            for a in range(1, self.num_atoms + 1):
                self.activity[a] *= 1e-100
            self.act_inc *= 1e-100

    def _watch_hint(self, learned: tuple[int, ...], uip: int):
        if len(learned) < 2:
            return None
        best = None
        for q in learned:
            if q == uip:
                continue
            if best is None or self.level[abs(q)] > self.level[abs(best)]:
                best = q
        return (uip, best)

    def _reduce_learned(self) -> None:
        store = self.store
        locked = {self.reason[abs(lit)] for lit in self.trail}
        candidates = [
            i
            for i in range(len(store.nogoods))
            if store.origin[i] == "learned"
            and not store.dead[i]
            and i not in locked
            and len(store.nogoods[i]) > 2
        ]
        candidates.sort(key=lambda i: store.activity[i])
        for i in candidates[: len(candidates) // 2]:
            store.remove(i)
        self.learned_cap = int(self.learned_cap * self.options.learned_growth)

    # --- decisions ---

    def decide_fallback(self) -> tuple[int, float]:
        best_atom = 0
        best_act = -1.0
        for a in range(1, self.num_atoms + 1):
            if self.value[a] is None and self.activity[a] > best_act:
                best_atom = a
                best_act = self.activity[a]
        lit = best_atom if self.saved[best_atom] else -best_atom
        return lit, 0.0

    # --- top-level search ---

    def solve_one(self, stop: Optional[threading.Event] = None) -> bool:
        """Search for one total non-conflicting assignment.

        Returns True and leaves the assignment in place on success, False
        when the instance is unsatisfiable under the current store.
        """
        opts = self.options
        self._reset()
        if not self._init_units():
            return False
        if self._propagate() is not None:
            return False
        conflicts = 0
        restart_idx = 0
        restart_budget = luby(0) * opts.restart_unit if opts.restart_unit else 0
        while True:
            if stop is not None and stop.is_set():
                raise SearchCancelled()
            if len(self.trail) == self.num_atoms:
                if self.debug_checks:
                    self._check_no_violation()
                return True
            lit, flip_pr = self.decide_hook(self)
            if flip_pr > 0.0 and self.rng.random() < flip_pr:
                lit = -lit
            self.stats["decisions"] += 1
            self.trail_lim.append(len(self.trail))
            self._assign(lit, -1)
            while True:
                conflict = self._propagate()
                if conflict is None:
                    break
                conflicts += 1
                self.stats["conflicts"] += 1
                if opts.max_conflicts is not None and conflicts > opts.max_conflicts:
                    raise ConflictBudgetExceeded(
                        f"conflict budget of {opts.max_conflicts} exhausted"
                    )
                if self.current_level == 0:
                    return False
                learned, bj_level, uip = self._analyze(conflict)
                self._backjump(bj_level)
                idx = self.store.add(learned, "learned", self._watch_hint(learned, uip))
                self._assign(-uip, idx)
                if self.learned_cap and self.store.num_learned_alive > self.learned_cap:
                    self._reduce_learned()
            if restart_budget and conflicts >= restart_budget:
                restart_idx += 1
                self.stats["restarts"] += 1
                restart_budget = conflicts + luby(restart_idx) * opts.restart_unit
                self._backjump(0)

    # --- model access ---

    def true_atoms(self, kinds: Optional[tuple[str, ...]] = None) -> frozenset[int]:
        table = self.compiled.table
        return frozenset(
            a
            for a in range(1, self.num_atoms + 1)
            if self.value[a] and (kinds is None or table.kind(a) in kinds)
        )

    def sample_atoms(self) -> frozenset[int]:
        """True atoms relevant to stability checking and frequency counting."""
        return self.true_atoms(PROGRAM_KINDS)

    def add_root_nogood(self, ng: tuple[int, ...], origin: str) -> int:
        """Install a nogood between searches (loop or blocking nogoods)."""
        return self.store.add(ng, origin)

    def violates(self, ng: tuple[int, ...]) -> bool:
        return all(self.satisfied(q) for q in ng)

    def _check_no_violation(self) -> None:
        for i, ng in enumerate(self.store.nogoods):
            if not self.store.dead[i] and all(self.satisfied(q) for q in ng):
                raise AssertionError(f"complete assignment violates nogood {ng}")
