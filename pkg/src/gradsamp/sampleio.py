"""Reading and writing persisted samples.

A sample file carries a header naming the parameter atoms, the seed and the
accuracy threshold, one model per line as space-separated atom names (an
empty line is an empty model), and a machine-readable trailer:

    # theta a b
    # seed 7
    # psi 0.001
    b
    a

    COST 0.0
    N 3
    REASON converged
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, TextIO

_TRAILER_KEYS = ("COST", "N", "REASON")


@dataclass
class SampleFile:
    theta: list[str]
    seed: int
    psi: float
    models: list[frozenset[str]]
    cost: Optional[float]
    reason: str


def write_sample(
    fp: TextIO,
    models: list[frozenset[str]],
    theta: list[str],
    seed: int,
    psi: float,
    cost: Optional[float],
    reason: str,
) -> None:
    fp.write(f"# theta {' '.join(theta)}\n")
    fp.write(f"# seed {seed}\n")
    fp.write(f"# psi {psi!r}\n")
    for model in models:
        fp.write(" ".join(sorted(model)) + "\n")
    fp.write(f"COST {'-' if cost is None else repr(cost)}\n")
    fp.write(f"N {len(models)}\n")
    fp.write(f"REASON {reason}\n")


def read_sample(fp: TextIO) -> SampleFile:
    theta: list[str] = []
    seed = 0
    psi = 0.0
    models: list[frozenset[str]] = []
    cost: Optional[float] = None
    reason = ""
    n_declared: Optional[int] = None
    for raw in fp.read().splitlines():
        if raw.startswith("# theta"):
            theta = raw[len("# theta") :].split()
            continue
        if raw.startswith("# seed"):
            seed = int(raw.split()[-1])
            continue
        if raw.startswith("# psi"):
            psi = float(raw.split()[-1])
            continue
        if raw.startswith("#"):
            continue
        key = raw.split(" ", 1)[0]
        if key in _TRAILER_KEYS:
            value = raw[len(key) :].strip()
            if key == "COST":
                cost = None if value == "-" else float(value)
            elif key == "N":
                n_declared = int(value)
            else:
                reason = value
            continue
        models.append(frozenset(raw.split()))
    if n_declared is not None and n_declared != len(models):
        raise ValueError(
            f"sample file declares {n_declared} models but contains {len(models)}"
        )
    return SampleFile(theta, seed, psi, models, cost, reason)
