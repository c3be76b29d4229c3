"""Translate a parsed program into the solver's initial nogood set.

ASP programs pass through three steps: choice atoms are expanded into
complementary rule pairs over fresh auxiliary atoms, weighted rules get the
auxiliary-atom shortcut (the auxiliary joins the parameter atoms with the
rule's weight), and the resulting ground normal rules are compiled to
nogoods via Clark's completion. SAT clauses translate directly: a clause
becomes the nogood of its complemented literals.

Rule bodies with two or more literals receive a body atom shared across
identical bodies; one-literal bodies reuse the literal itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import (
    BODY_AUX,
    CHOICE_AUX,
    WEIGHT_AUX,
    AtomTable,
    make_nogood,
)
from .parsing import Program, Rule


@dataclass(frozen=True)
class CompiledRule:
    head: int
    pos: tuple[int, ...]
    neg: tuple[int, ...]
    body_lit: int  # signed literal standing for the body; 0 for empty bodies


@dataclass
class CompiledInstance:
    mode: str
    table: AtomTable
    num_atoms: int
    nogoods: list[tuple[int, ...]]
    rules: list[CompiledRule]
    head_rules: dict[int, list[int]]  # atom -> indices into rules
    pos_edges: dict[int, list[int]]  # head -> positive body atoms
    tight: bool
    sccs: list[tuple[int, ...]]
    scc_of: dict[int, int]
    param_atoms: tuple[int, ...]
    weights: dict[int, float] = field(default_factory=dict)
    query_atoms: tuple[int, ...] = ()
    choice_atoms: frozenset[int] = frozenset()


def expand_choice(atom: int, table: AtomTable) -> tuple[Rule, Rule]:
    """Make `atom` nondeterministic via a fresh complementary atom."""
    aux = table.fresh("choice", CHOICE_AUX)
    return Rule(atom, (), (aux,)), Rule(aux, (), (atom,))


def expand_weighted_rule(
    weight: float, rule: Rule, table: AtomTable
) -> tuple[Rule, Rule, int]:
    """Attach `weight` to a rule through a fresh shortcut atom.

    The shortcut atom becomes a parameter atom carrying the weight; the
    returned rule pair makes it hold exactly when the body fires but the
    head was not chosen.
    """
    aux = table.fresh("w", WEIGHT_AUX)
    guarded = Rule(rule.head, rule.pos, rule.neg + (aux,))
    shortcut = Rule(aux, rule.pos, rule.neg + (rule.head,))
    return guarded, shortcut, aux


def _body_key(rule: Rule) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return (tuple(sorted(set(rule.pos))), tuple(sorted(set(rule.neg))))


def completion_nogoods(
    rules: list[CompiledRule],
    table: AtomTable,
    body_atoms: dict[tuple, int],
    closed_world: bool = True,
) -> list[tuple[int, ...]]:
    """Clark's completion over expanded rules, as nogoods.

    For a body atom B standing for {b1..bm, not c1..ck} this yields the
    definition nogood {F B, T b1.., F c1..} plus one two-literal nogood per
    body literal; for an atom h with rule bodies B1..Bj it yields the
    support nogood {T h, F B1, ..} and a forcing nogood {F h, T Bi} per
    rule. With `closed_world`, atoms that head no rule are forced false by
    a unit nogood.
    """
    out: dict[tuple[int, ...], None] = {}  # insertion-ordered dedupe

    def emit(lits) -> None:
        ng = make_nogood(lits)
        if ng is not None:
            out.setdefault(ng, None)

    # body definitions
    for key, aux in body_atoms.items():
        pos, neg = key
        emit([-aux] + [a for a in pos] + [-c for c in neg])
        for a in pos:
            emit([aux, -a])
        for c in neg:
            emit([aux, c])

    heads: dict[int, list[CompiledRule]] = {}
    for rule in rules:
        if rule.head:
            heads.setdefault(rule.head, []).append(rule)

    for atom in table.atoms():
        if table.kind(atom) == BODY_AUX:
            continue
        own = heads.get(atom)
        if not own:
            if closed_world:
                emit([atom])
            continue
        if any(r.body_lit == 0 for r in own):
            emit([-atom])  # fact: forced true, support trivially present
        else:
            emit([atom] + [-r.body_lit for r in own])
        for r in own:
            if r.body_lit != 0:
                emit([-atom, r.body_lit])

    # integrity constraints
    for rule in rules:
        if rule.head == 0:
            emit([a for a in rule.pos] + [-c for c in rule.neg])

    return list(out.keys())


def tarjan_sccs(nodes: list[int], edges: dict[int, list[int]]) -> list[tuple[int, ...]]:
    """Iterative Tarjan; returns SCCs as sorted tuples."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    sccs: list[tuple[int, ...]] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(edges.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(edges.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(tuple(sorted(comp)))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return sccs


def analyze_tightness(
    rules: list[CompiledRule], num_atoms: int
) -> tuple[dict[int, list[int]], bool, list[tuple[int, ...]]]:
    """Positive dependency graph, tightness flag, and its SCCs."""
    edges: dict[int, list[int]] = {}
    for rule in rules:
        if rule.head:
            tgt = edges.setdefault(rule.head, [])
            for b in rule.pos:
                if b not in tgt:
                    tgt.append(b)
    nodes = list(range(1, num_atoms + 1))
    sccs = tarjan_sccs(nodes, edges)
    tight = True
    for comp in sccs:
        if len(comp) > 1:
            tight = False
            break
        a = comp[0]
        if a in edges.get(a, ()):  # self-loop
            tight = False
            break
    return edges, tight, sccs


def compile_program(program: Program) -> CompiledInstance:
    table = program.table
    if program.mode == "sat":
        nogoods: dict[tuple[int, ...], None] = {}
        for clause in program.clauses:
            ng = make_nogood([-l for l in clause])
            if ng is not None:
                nogoods.setdefault(ng, None)
        n = table.num_atoms
        return CompiledInstance(
            mode="sat",
            table=table,
            num_atoms=n,
            nogoods=list(nogoods.keys()),
            rules=[],
            head_rules={},
            pos_edges={},
            tight=True,
            sccs=[(a,) for a in range(1, n + 1)],
            scc_of={a: i for i, a in enumerate(range(1, n + 1))},
            param_atoms=tuple(program.param_atoms),
            weights=dict(program.weights),
            query_atoms=tuple(program.query_atoms),
        )

    rules: list[Rule] = list(program.rules)
    params: list[int] = list(program.param_atoms)
    weights: dict[int, float] = dict(program.weights)

    for atom in program.choice_atoms:
        rules.extend(expand_choice(atom, table))
    for weight, wrule in program.weighted_rules:
        guarded, shortcut, aux = expand_weighted_rule(weight, wrule, table)
        rules.extend((guarded, shortcut))
        weights[aux] = weight
        params.append(aux)

    # shared body atoms for bodies of two or more literals
    body_atoms: dict[tuple, int] = {}
    compiled: list[CompiledRule] = []
    for rule in rules:
        pos = tuple(sorted(set(rule.pos)))
        neg = tuple(sorted(set(rule.neg)))
        size = len(pos) + len(neg)
        if size == 0:
            body_lit = 0
        elif size == 1:
            body_lit = pos[0] if pos else -neg[0]
        else:
            key = (pos, neg)
            aux = body_atoms.get(key)
            if aux is None:
                aux = table.fresh("body", BODY_AUX)
                body_atoms[key] = aux
            body_lit = aux
        compiled.append(CompiledRule(rule.head, pos, neg, body_lit))

    num_atoms = table.num_atoms
    nogoods = completion_nogoods(compiled, table, body_atoms)
    pos_edges, tight, sccs = analyze_tightness(compiled, num_atoms)
    scc_of = {a: i for i, comp in enumerate(sccs) for a in comp}
    head_rules: dict[int, list[int]] = {}
    for i, rule in enumerate(compiled):
        if rule.head:
            head_rules.setdefault(rule.head, []).append(i)

    return CompiledInstance(
        mode="asp",
        table=table,
        num_atoms=num_atoms,
        nogoods=nogoods,
        rules=compiled,
        head_rules=head_rules,
        pos_edges=pos_edges,
        tight=tight,
        sccs=sccs,
        scc_of=scc_of,
        param_atoms=tuple(params),
        weights=weights,
        query_atoms=tuple(program.query_atoms),
        choice_atoms=frozenset(program.choice_atoms),
    )
