"""Seeded generators for the three benchmark families.

All three emit the ground-ASP text format: probabilities live on weighted
facts, non-ground schemata are expanded by the generator itself, and query
directives name the atoms whose marginals the experiment reads off. The
same seed always yields the same text.
"""

from __future__ import annotations

import random


def gen_coins(num_coins: int, seed: int = 0) -> str:
    """Coin-tossing game: one biased coin, a winning pair, a dependency.

    Coin 1 lands heads with probability 0.6, the rest are fair. The game is
    won when a fixed random pair of coins are both heads. From three coins
    up, one random coin magically follows another. Tails is the complement
    of heads per coin, so every coin has exactly one outcome.
    """
    if num_coins < 2:
        raise ValueError("need at least 2 coins")
    rng = random.Random(seed)
    lines = [f"% coin game: {num_coins} coins, seed {seed}"]
    for c in range(1, num_coins + 1):
        bias = 0.6 if c == 1 else 0.5
        lines.append(f"{bias} :: coin_out({c},heads).")
    for c in range(1, num_coins + 1):
        lines.append(f"coin_out({c},tails) :- not coin_out({c},heads).")
    win_pair = sorted(rng.sample(range(1, num_coins + 1), 2))
    lines.append(
        "win :- " + ", ".join(f"coin_out({c},heads)" for c in win_pair) + "."
    )
    if num_coins >= 3:
        follower, leader = rng.sample(range(1, num_coins + 1), 2)
        lines.append(f"coin_out({follower},heads) :- coin_out({leader},heads).")
    lines.append("#query win.")
    lines.append("#query coin_out(1,heads).")
    lines.append("#query coin_out(2,heads).")
    return "\n".join(lines) + "\n"


def gen_smokers(num_persons: int, seed: int = 0, density: float = 0.3) -> str:
    """Friends-and-smokers: stress, peer influence, asthma risk.

    Friendships are mutual and drawn per unordered pair with probability
    `density`; mutual influence makes the smokes relation recursive, so any
    friendship at all produces a non-tight program.
    """
    if num_persons < 2:
        raise ValueError("need at least 2 persons")
    rng = random.Random(seed)
    persons = range(1, num_persons + 1)
    friendships = []
    for x in persons:
        for y in persons:
            if x < y and rng.random() < density:
                friendships.append((x, y))
    lines = [f"% friends and smokers: {num_persons} persons, seed {seed}"]
    for x, y in friendships:
        lines.append(f"friend({x},{y}).")
        lines.append(f"friend({y},{x}).")
    for x in persons:
        lines.append(f"0.3 :: stress({x}).")
    for x, y in friendships:
        lines.append(f"0.2 :: influences({x},{y}).")
        lines.append(f"0.2 :: influences({y},{x}).")
    for x in persons:
        lines.append(f"0.4 :: h({x}).")
    for x in persons:
        lines.append(f"smokes({x}) :- stress({x}).")
    for x, y in friendships:
        lines.append(f"smokes({x}) :- friend({x},{y}), influences({y},{x}), smokes({y}).")
        lines.append(f"smokes({y}) :- friend({y},{x}), influences({x},{y}), smokes({x}).")
    for x in persons:
        lines.append(f"asthma({x}) :- smokes({x}), h({x}).")
    for x in persons:
        lines.append(f"#query asthma({x}).")
    return "\n".join(lines) + "\n"


def gen_random_graph(num_vertices: int, seed: int = 0) -> str:
    """Random digraph reachability with a weighted fact per edge.

    Every ordered pair of distinct vertices gets an edge whose probability
    is drawn uniformly from (0, 0.3]; paths close transitively, which makes
    the ground program recursive through the path atoms.
    """
    if num_vertices < 2:
        raise ValueError("need at least 2 vertices")
    rng = random.Random(seed)
    vertices = range(1, num_vertices + 1)
    pairs = [(x, y) for x in vertices for y in vertices if x != y]
    lines = [f"% random graph: {num_vertices} vertices, seed {seed}"]
    for x, y in pairs:
        weight = max(round(0.3 * (1.0 - rng.random()), 6), 1e-6)
        lines.append(f"{weight:.6f} :: edge({x},{y}).")
    for x, y in pairs:
        lines.append(f"path({x},{y}) :- edge({x},{y}).")
    for z in vertices:
        for y, x in pairs:  # edge(y,x) extends a path ending in y
            if y != z:
                lines.append(f"path({z},{x}) :- edge({y},{x}), path({z},{y}).")
    for i in vertices:
        lines.append(f"#query path(1,{i}).")
    return "\n".join(lines) + "\n"
