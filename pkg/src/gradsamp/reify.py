"""Reified encodings of a weighted instance for external ASP optimizers.

Both emitters unroll the instance over `nmodels` reified model indices:
every undetermined predicate gains a model number as an extra argument, so
one answer set of the emitted program stands for a whole model multiset.
Variant "minimize" scores the squared deviation of per-atom counts from
their targets with #minimize statements; variant "equation" brackets the
counts with cardinality bounds instead. A small decoder recovers per-atom
frequencies from a reified answer set.

Only weighted facts are supported; weights must be expressible as k/10^d
with 10^d no larger than nmodels.
"""

from __future__ import annotations

import re
from typing import Iterable

from .model import ORIGINAL
from .parsing import Program, Rule


class ReifyPrecisionError(ValueError):
    """Weight precision exceeds what nmodels reified models can express."""


def _weight_parts(weight: float, nmodels: int) -> tuple[int, int]:
    """Express `weight` as numerator/denominator with a power-of-ten base."""
    text = repr(float(weight))
    m = re.fullmatch(r"(\d+)(?:\.(\d*))?", text)
    if not m:
        raise ReifyPrecisionError(f"cannot express weight {weight!r} as k/10^d")
    whole, frac = m.group(1), (m.group(2) or "").rstrip("0")
    denom = 10 ** len(frac)
    numer = int(whole) * denom + int(frac or 0)
    if denom > nmodels:
        raise ReifyPrecisionError(
            f"weight {weight} needs denominator {denom} > nmodels {nmodels}"
        )
    return numer, denom


def _split_name(name: str) -> tuple[str, list[str]]:
    m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\((.*)\))?", name)
    if not m:
        raise ValueError(f"cannot reify atom name {name!r}")
    args = [a for a in (m.group(2) or "").split(",") if a]
    return m.group(1), args


def _reified(name: str, var: str = "M") -> str:
    pred, args = _split_name(name)
    return f"{pred}({','.join(args + [var])})" if args else f"{pred}({var})"


def _flat(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]+", "_", name).strip("_")


def _body_text(program: Program, rule: Rule) -> str:
    parts = [_reified(program.table.name(b)) for b in rule.pos]
    parts += [f"not {_reified(program.table.name(c))}" for c in rule.neg]
    return ", ".join(parts)


def _check_reifiable(program: Program) -> None:
    if program.mode != "asp":
        raise ValueError("reification expects a ground ASP program")
    if program.weighted_rules:
        raise ValueError("reification supports weighted facts only")
    if not program.weights:
        raise ValueError("nothing to reify: the program declares no weights")


def _rule_lines(program: Program) -> tuple[list[str], list[str]]:
    rules, constraints = [], []
    for rule in program.rules:
        if rule.head == 0:
            constraints.append(_body_text(program, rule))
        else:
            head = _reified(program.table.name(rule.head))
            body = _body_text(program, rule)
            body = f"{body}, model(M)" if body else "model(M)"
            rules.append(f"{head} :- {body}.")
    return rules, constraints


def _show_lines(program: Program) -> list[str]:
    lines = []
    seen = set()
    for p in program.param_atoms:
        pred, args = _split_name(program.table.name(p))
        sig = (pred, len(args) + 1)
        if sig not in seen:
            seen.add(sig)
            lines.append(f"#show {pred}/{len(args) + 1}.")
    return lines


def encode_minimize(program: Program, nmodels: int) -> str:
    """Objective-based encoding: two #minimize terms per weighted atom set."""
    _check_reifiable(program)
    table = program.table
    params = [p for p in program.param_atoms if p in program.weights]
    rules, constraints = _rule_lines(program)

    lines = [
        f"#const nmodels = {nmodels}.",
        "model(1..nmodels).",
        "mcount(0..nmodels).",
    ]
    for p in params:
        lines.append(f"{{{_reified(table.name(p))}}} :- model(M).")
    lines.extend(rules)
    for body in constraints:
        lines.append(f":- {body}, model(M).")
    lines.append("")
    weight_lines = []
    freq_lines = []
    diff_lines = []
    minimize_lines = []
    for p in params:
        name = table.name(p)
        flat = _flat(name)
        numer, denom = _weight_parts(program.weights[p], nmodels)
        weight_lines.append(f"w{flat}(nmodels * {numer} / {denom}).")
        freq_lines.append(
            f"f{flat}(F) :- F {{ {_reified(name)}: model(M) }} F, mcount(F)."
        )
        diff_lines.append(f"diff{flat}(D) :- D = (W - F)**2, w{flat}(W), f{flat}(F).")
        var = "D" + flat.upper()
        minimize_lines.append(f"#minimize {{ {var} : diff{flat}({var}) }}.")
    lines.extend(weight_lines)
    lines.extend(freq_lines)
    lines.append("")
    lines.extend(diff_lines)
    lines.extend(minimize_lines)
    lines.append("")
    lines.extend(_show_lines(program))
    return "\n".join(lines) + "\n"


def encode_equation(program: Program, nmodels: int, tol: int, multiplier: int = 100) -> str:
    """Cardinality-bound encoding: counts constrained to target +- tol."""
    _check_reifiable(program)
    table = program.table
    params = [p for p in program.param_atoms if p in program.weights]
    rules, constraints = _rule_lines(program)

    lines = [
        f"#const tol = {tol}.",
        f"#const multiplier = {multiplier}.",
        f"#const nmodels = {nmodels}.",
        "model(1..nmodels).",
        "",
    ]
    for p in params:
        name = table.name(p)
        flat = _flat(name)
        numer, denom = _weight_parts(program.weights[p], nmodels)
        lines.append(
            f"w{flat}(nmodels * {numer} * multiplier / ({denom} * multiplier))."
        )
        lines.append(
            f"W-tol < {{ {_reified(name)}: model(M) }} < W+tol :- w{flat}(W)."
        )
    lines.append("")
    for i, p in enumerate(params, start=1):
        lines.append(f"1{{__aux_{i}(M);{_reified(table.name(p))}}}1 :- model(M).")
    if rules:
        lines.append("")
        lines.extend(rules)
    if constraints:
        lines.append("")
        for body in constraints:
            lines.append(f":- {body}.")
    lines.append("")
    lines.extend(_show_lines(program))
    return "\n".join(lines) + "\n"


def decode_frequencies(atoms: Iterable[str], nmodels: int) -> dict[str, float]:
    """Per-atom frequencies from reified answer-set atoms.

    Each input atom must carry the model index as its last argument;
    ``a(37)`` counts toward ``a``, ``edge(1,2,5)`` toward ``edge(1,2)``.
    """
    counts: dict[str, int] = {}
    for raw in atoms:
        name = re.sub(r"\s+", "", raw)
        pred, args = _split_name(name)
        if not args:
            raise ValueError(f"{raw!r} carries no model index")
        base_args = args[:-1]
        base = f"{pred}({','.join(base_args)})" if base_args else pred
        counts[base] = counts.get(base, 0) + 1
    return {base: c / nmodels for base, c in counts.items()}
