"""Seeded random instances and allocations for oracles and test suites."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .instance import Instance


def random_instance(
    rng: random.Random,
    n_range: Sequence[int] = (3, 8),
    max_extra_edges: int = 6,
    b_range: Sequence[int] = (1, 3),
    max_weight: int = 9,
    bipartite: bool = False,
    allow_zero_capacity: bool = False,
) -> Instance:
    """A sparse random instance: a random spanning-ish base plus extra edges.

    Weights are small integers (occasionally zero), capacities are drawn
    from b_range, optionally forcing a bipartition.
    """
    n = rng.randint(*n_range)
    players = [f"v{k}" for k in range(1, n + 1)]
    side = {p: rng.randint(0, 1) for p in players} if bipartite else None

    def admissible(u: str, v: str) -> bool:
        return u != v and (side is None or side[u] != side[v])

    pairs = [
        (players[a], players[b])
        for a in range(n)
        for b in range(a + 1, n)
        if admissible(players[a], players[b])
    ]
    rng.shuffle(pairs)
    target = min(len(pairs), max(0, n - 2) + rng.randint(0, max_extra_edges))
    chosen = sorted(pairs[:target], key=lambda e: (players.index(e[0]), players.index(e[1])))
    edges = [(u, v, rng.randint(0, max_weight)) for (u, v) in chosen]
    lo, hi = b_range
    lo_eff = 0 if allow_zero_capacity and rng.random() < 0.2 else lo
    capacity = {p: rng.randint(lo_eff, hi) for p in players}
    return Instance(players, capacity, edges)


def random_allocation(rng: random.Random, inst: Instance, grand_value: Fraction) -> dict[str, Fraction]:
    """A random rational vector with x(N) = grand_value exactly."""
    denom = rng.choice((1, 2, 3, 4, 6))
    raw = {p: Fraction(rng.randint(-4, 12), denom) for p in inst.players}
    drift = grand_value - sum(raw.values(), Fraction(0))
    share = drift / inst.n
    return {p: raw[p] + share for p in inst.players}


def random_nonallocation(
    rng: random.Random, inst: Instance, grand_value: Fraction
) -> dict[str, Fraction]:
    """Like random_allocation but off by a nonzero amount."""
    x = random_allocation(rng, inst, grand_value)
    bump = Fraction(rng.choice((-3, -1, 1, 2, 5)), rng.choice((1, 2, 3)))
    victim = rng.choice(inst.players)
    x[victim] += bump
    return x
