import random
from fractions import Fraction as F

from stablefixtures.cycles import (
    min_path_cycle_system,
    negative_cycle,
    max_profit_cost_ratio,
)


def brute_negative_cycle(vertices, costs):
    """Enumerate all vertex subsets and Hamiltonian cycles on them."""
    import itertools

    edge = {frozenset(e): c for e, c in costs.items()}
    n = len(vertices)
    for size in range(3, n + 1):
        for subset in itertools.combinations(vertices, size):
            first, rest = subset[0], subset[1:]
            for perm in itertools.permutations(rest):
                order = (first,) + perm
                keys = [frozenset((order[k], order[(k + 1) % size])) for k in range(size)]
                if all(k in edge for k in keys) and sum(edge[k] for k in keys) < 0:
                    return True
    return False


def test_negative_cycle_triangle():
    costs = {("a", "b"): F(-1), ("b", "c"): F(-1), ("a", "c"): F(1)}
    cycle = negative_cycle(["a", "b", "c"], costs)
    assert cycle is not None
    assert sum(costs[e] for e in cycle) < 0


def test_negative_edge_alone_is_not_a_cycle():
    costs = {("a", "b"): F(-5)}
    assert negative_cycle(["a", "b"], costs) is None


def test_negative_cycle_needs_join():
    # The negative edges alone have odd-degree endpoints; only together with
    # connecting paths do they close into a (negative) cycle.
    costs = {
        ("a", "b"): F(-4),
        ("b", "c"): F(1),
        ("c", "d"): F(-4),
        ("d", "a"): F(1),
    }
    cycle = negative_cycle(["a", "b", "c", "d"], costs)
    assert cycle is not None
    assert sum(costs[e] for e in cycle) == -6


def test_negative_cycle_absent_despite_negative_edges():
    costs = {
        ("a", "b"): F(-1),
        ("b", "c"): F(2),
        ("c", "d"): F(-1),
        ("d", "a"): F(2),
    }
    assert negative_cycle(["a", "b", "c", "d"], costs) is None


def test_negative_cycle_agrees_with_enumeration():
    rng = random.Random(4242)
    for _ in range(150):
        n = rng.randint(3, 6)
        vertices = [f"n{k}" for k in range(n)]
        costs = {}
        for a in range(n):
            for b in range(a + 1, n):
                if rng.random() < 0.6:
                    costs[(vertices[a], vertices[b])] = F(rng.randint(-4, 5))
        found = negative_cycle(vertices, costs)
        expected = brute_negative_cycle(vertices, costs)
        assert (found is not None) == expected
        if found is not None:
            assert sum(costs[e] for e in found) < 0
            seen = [p for e in found for p in e]
            assert len(set(seen)) == len(found)  # simple cycle


def test_min_system_empty_graph():
    total, comps = min_path_cycle_system([], {}, {}, {})
    assert total == 0 and comps == []


def test_min_system_single_bad_edge():
    total, comps = min_path_cycle_system(
        ["a", "b"],
        {"a": 1, "b": 1},
        {("a", "b"): F(5)},
        {"a": F(1), "b": F(1)},
    )
    assert total == -3
    assert comps[0].kind == "path"
    assert comps[0].vertices == ("a", "b")


def test_min_system_inner_vertices_must_have_capacity_two():
    # A path through a capacity-1 middle vertex is inadmissible, so the
    # heavy middle edge cannot be reached and nothing is violated.
    total, comps = min_path_cycle_system(
        ["a", "m", "b"],
        {"a": 1, "m": 1, "b": 1},
        {("a", "m"): F(0), ("m", "b"): F(0)},
        {"a": F(0), "m": F(0), "b": F(0)},
    )
    assert total == 0


def test_min_system_finds_cycle():
    total, comps = min_path_cycle_system(
        ["a", "b", "c"],
        {"a": 2, "b": 2, "c": 2},
        {("a", "b"): F(2), ("b", "c"): F(2), ("a", "c"): F(2)},
        {"a": F(1), "b": F(1), "c": F(1)},
    )
    assert total == 3 - 6
    assert comps[0].kind == "cycle"
    assert comps[0].vertices == ("a", "b", "c")


def test_min_system_ignores_edge_doubling():
    total, _ = min_path_cycle_system(
        ["s", "u", "v", "t"],
        {"s": 2, "u": 2, "v": 2, "t": 2},
        {("s", "u"): F(0), ("u", "v"): F(2), ("u", "t"): F(0)},
        {"s": F(0), "u": F(3, 2), "v": F(1, 2), "t": F(0)},
    )
    assert total == 0  # the u-v edge alone costs +0 only via x(u)+x(v)-w = 0


def test_ratio_unbounded_zero_cost_cycle():
    ratio, cycle = max_profit_cost_ratio(
        ["a", "b", "c"],
        {("a", "b"): F(1), ("b", "c"): F(1), ("a", "c"): F(1)},
        {("a", "b"): F(0), ("b", "c"): F(0), ("a", "c"): F(0)},
    )
    assert ratio is None and cycle is not None


def test_ratio_basic():
    ratio, cycle = max_profit_cost_ratio(
        ["a", "b", "c", "d"],
        {
            ("a", "b"): F(3),
            ("b", "c"): F(3),
            ("a", "c"): F(3),
            ("c", "d"): F(10),
            ("b", "d"): F(1),
        },
        {
            ("a", "b"): F(1),
            ("b", "c"): F(1),
            ("a", "c"): F(1),
            ("c", "d"): F(10),
            ("b", "d"): F(10),
        },
    )
    # Triangle abc: 9/3 = 3; cycle bcd: 14/21; quad abdc...: smaller.
    assert ratio == 3
    assert set(cycle) == {("a", "b"), ("b", "c"), ("a", "c")}
