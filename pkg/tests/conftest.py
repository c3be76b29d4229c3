import random

import pytest

from gradsamp.model import AtomTable
from gradsamp.parsing import Program, Rule

TWO_ATOM_EXAMPLE = "0.2 :: a.\n0.6 :: b.\n:- a, b.\n"
FOUR_RULE_NONTIGHT = "p :- q.\nq :- p.\np :- not r.\nr :- not p.\n"


def random_cnf_text(rng: random.Random, max_vars: int = 12, max_clauses: int = 40) -> str:
    """Random 3-CNF biased toward small model counts."""
    num_vars = rng.randint(5, max_vars)
    num_clauses = rng.randint(max(6, 2 * num_vars), max_clauses)
    lines = [f"p cnf {num_vars} {num_clauses}"]
    for _ in range(num_clauses):
        atoms = rng.sample(range(1, num_vars + 1), min(3, num_vars))
        lits = [a if rng.random() < 0.5 else -a for a in atoms]
        lines.append(" ".join(map(str, lits)) + " 0")
    return "\n".join(lines) + "\n"


def random_asp_program(rng: random.Random, max_atoms: int = 10, max_rules: int = 12) -> Program:
    """Random ground normal program with choices, constraints, and cycles."""
    n_atoms = rng.randint(3, max_atoms)
    table = AtomTable()
    atoms = [table.add(f"a{i}") for i in range(1, n_atoms + 1)]
    program = Program(mode="asp", table=table)
    for _ in range(rng.randint(1, max_rules - 2)):
        head = rng.choice(atoms) if rng.random() > 0.15 else 0
        pool = [a for a in atoms if a != head]
        rng.shuffle(pool)
        npos = rng.randint(0, 2)
        nneg = rng.randint(0, 2)
        pos = tuple(pool[:npos])
        neg = tuple(pool[npos : npos + nneg])
        if head == 0 and not pos and not neg:
            continue
        program.rules.append(Rule(head, pos, neg))
    for a in atoms:
        if rng.random() < 0.25:
            program.choice_atoms.append(a)
    if rng.random() < 0.5:  # seed a positive cycle half the time
        x, y = rng.sample(atoms, 2)
        program.rules.append(Rule(x, (y,), ()))
        program.rules.append(Rule(y, (x,), ()))
    return program


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
