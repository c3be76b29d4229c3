"""Shared domain types: atoms, literals, nogoods, models, sample accumulator.

Literals are signed integers in DIMACS style: +i means "atom i is true",
-i means "atom i is false". A nogood is a tuple of literals that must not
all hold at the same time; it is kept sorted so that equal nogoods compare
equal and iteration order never depends on hashing.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

# Atom kinds. Only "original" atoms are user-visible; the others are
# introduced by the rule-to-nogood translation and stripped from output.
ORIGINAL = "original"
BODY_AUX = "body"
CHOICE_AUX = "choice"
WEIGHT_AUX = "weight"

# Kinds whose truth values take part in stable-model checking and sampling
# (everything except completion body atoms).
PROGRAM_KINDS = (ORIGINAL, CHOICE_AUX, WEIGHT_AUX)


def complement(lit: int) -> int:
    return -lit


def atom_of(lit: int) -> int:
    return abs(lit)


def is_positive(lit: int) -> bool:
    return lit > 0


def make_nogood(lits: Iterable[int]) -> Optional[tuple[int, ...]]:
    """Canonicalize a nogood: dedupe, sort, drop tautologies.

    Returns None when the literal set contains a literal and its
    complement (such a nogood can never be violated).
    """
    out = sorted(set(lits))
    seen = set(out)
    for lit in out:
        if -lit in seen:
            return None
    return tuple(out)


class EmptySampleError(ValueError):
    """Raised when a frequency is requested from an empty sample."""


class AtomTable:
    """Dense 1-based registry of atoms with names and kinds."""

    def __init__(self) -> None:
        self._names: list[str] = [""]  # index 0 unused
        self._kinds: list[str] = [""]
        self._index: dict[str, int] = {}
        self._fresh_counter = 0

    def __len__(self) -> int:
        return len(self._names) - 1

    @property
    def num_atoms(self) -> int:
        return len(self._names) - 1

    def add(self, name: str, kind: str = ORIGINAL) -> int:
        if name in self._index:
            raise ValueError(f"atom {name!r} already declared")
        self._names.append(name)
        self._kinds.append(kind)
        idx = len(self._names) - 1
        self._index[name] = idx
        return idx

    def ensure(self, name: str) -> int:
        """Return the index of `name`, creating an original atom if new."""
        idx = self._index.get(name)
        if idx is None:
            idx = self.add(name, ORIGINAL)
        return idx

    def fresh(self, prefix: str, kind: str) -> int:
        self._fresh_counter += 1
        return self.add(f"__{prefix}{self._fresh_counter}", kind)

    def lookup(self, name: str) -> Optional[int]:
        return self._index.get(name)

    def name(self, idx: int) -> str:
        return self._names[idx]

    def kind(self, idx: int) -> str:
        return self._kinds[idx]

    def atoms(self, kinds: Optional[Sequence[str]] = None) -> Iterator[int]:
        for idx in range(1, len(self._names)):
            if kinds is None or self._kinds[idx] in kinds:
                yield idx


Model = frozenset  # set of true atom indices


class SampleAccumulator:
    """Multiset of sampled models with exact parameter-frequency counts.

    Counts are maintained incrementally as integers; frequencies are exact
    rationals and only turn into floats at cost-evaluation time, so long
    sampling runs accumulate no drift.
    """

    def __init__(self, param_atoms: Sequence[int]) -> None:
        self.param_atoms = tuple(param_atoms)
        self.models: list[frozenset[int]] = []
        self.counts: dict[int, int] = {p: 0 for p in self.param_atoms}

    @property
    def size(self) -> int:
        return len(self.models)

    def add_model(self, model: frozenset[int]) -> None:
        self.models.append(model)
        for p in self.param_atoms:
            if p in model:
                self.counts[p] += 1

    def frequency(self, param: int) -> Fraction:
        if param not in self.counts:
            raise KeyError(f"atom {param} is not a parameter atom")
        if not self.models:
            raise EmptySampleError("frequency of an empty sample is undefined")
        return Fraction(self.counts[param], len(self.models))

    def beta(self, default: float = 0.0) -> dict[int, float]:
        """Frequency vector as floats; `default` applies to an empty sample."""
        n = len(self.models)
        if n == 0:
            return {p: default for p in self.param_atoms}
        return {p: self.counts[p] / n for p in self.param_atoms}

    def recount(self) -> dict[int, int]:
        """Recompute counts from the stored model list (test support)."""
        fresh = {p: 0 for p in self.param_atoms}
        for m in self.models:
            for p in self.param_atoms:
                if p in m:
                    fresh[p] += 1
        return fresh
