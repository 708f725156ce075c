from __future__ import annotations

import math
import random

import networkx as nx
import pytest

from linforest.errors import ContractError, InfeasibleError
from linforest.gen import circulant
from linforest.rfactor import Dinic, compute_gamma, find_r_factor, near_factor_matchings, slice_matchings


def nx_feasible(A, B, edges, r) -> bool:
    """Second, independent max-flow (networkx preflow-push)."""
    h = nx.DiGraph()
    for a in A:
        h.add_edge("s", ("a", a), capacity=r)
    for b in B:
        h.add_edge(("b", b), "t", capacity=r)
    aset = set(A)
    for u, v in edges:
        if u not in aset:
            u, v = v, u
        h.add_edge(("a", u), ("b", v), capacity=1)
    h.add_nodes_from(["s", "t"])
    return nx.maximum_flow_value(h, "s", "t") == r * len(A)


def degrees_exact(edges, verts, r):
    deg = {v: 0 for v in verts}
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return all(x == r for x in deg.values())


def test_dinic_small_network():
    net = Dinic(4)
    net.add_edge(0, 1, 3)
    net.add_edge(0, 2, 2)
    net.add_edge(1, 2, 1)
    net.add_edge(1, 3, 2)
    net.add_edge(2, 3, 3)
    assert net.max_flow(0, 3) == 5


def test_r_zero_is_empty():
    res = find_r_factor([0, 1], [2, 3], [(0, 2)], 0)
    assert res.feasible and res.edges == []


def test_k33_two_factor():
    A, B = [0, 1, 2], [3, 4, 5]
    res = find_r_factor(A, B, [(a, b) for a in A for b in B], 2)
    assert res.feasible and len(res.edges) == 6
    assert degrees_exact(res.edges, A + B, 2)


def test_infeasible_has_mirsky_witness():
    A, B = [0, 1], [2, 3]
    edges = [(0, 2), (1, 3)]
    res = find_r_factor(A, B, edges, 2)
    assert not res.feasible
    X, Y = set(res.X), set(res.Y)
    e_xy = sum(1 for u, v in edges if u in X and v in Y)
    assert e_xy < 2 * (len(X) + len(Y) - len(A))


def test_unbalanced_sides_rejected():
    with pytest.raises(ContractError):
        find_r_factor([0, 1], [2], [(0, 2)], 1)
    with pytest.raises(ContractError):
        find_r_factor([0], [1], [(0, 2)], 1)


@pytest.mark.parametrize("m", [1, 2, 5, 9])
def test_complete_bipartite_every_r(m):
    A, B = list(range(m)), list(range(m, 2 * m))
    edges = [(a, b) for a in A for b in B]
    for r in range(m + 1):
        res = find_r_factor(A, B, edges, r)
        assert res.feasible and degrees_exact(res.edges, A + B, r)


@pytest.mark.parametrize("seed", range(40))
def test_random_instances_agree_with_networkx(seed):
    rnd = random.Random(seed)
    m = rnd.randint(1, 12)
    A, B = list(range(m)), list(range(m, 2 * m))
    edges = [(a, b) for a in A for b in B if rnd.random() < rnd.uniform(0.2, 0.9)]
    r = rnd.randint(0, m)
    res = find_r_factor(A, B, edges, r)
    assert res.feasible == nx_feasible(A, B, edges, r)
    if res.feasible:
        assert degrees_exact(res.edges, A + B, r)
        assert set(res.edges) <= set(edges)
    else:
        X, Y = set(res.X), set(res.Y)
        e_xy = sum(1 for u, v in edges if u in X and v in Y)
        assert e_xy < r * (len(X) + len(Y) - m)


def test_near_factor_path_example():
    out = near_factor_matchings([0, 1], [2], [(0, 2), (1, 2)], 1)
    assert len(out) == 1 and len(out[0]) == 1


def test_near_factor_circulant_slice():
    g = circulant(24, [1, 3, 5, 7])
    A = list(range(0, 24, 2))[:7]
    B = list(range(1, 24, 2))[:6]
    edges = [(u, v) for u, v in g.edges() if (u in A and v in B) or (v in A and u in B)]
    out = near_factor_matchings(A, B, edges, 2)
    assert len(out) == 2
    used = [e for m in out for e in m]
    assert len(used) == len(set(used))
    for v in A + B:
        assert sum(1 for m in out if any(v in e for e in m)) >= 1


def test_near_factor_infeasible():
    with pytest.raises(InfeasibleError):
        near_factor_matchings([0, 1, 2], [3, 4], [(0, 3)], 3)


def test_slice_matchings_equal_and_off_by_one():
    A, B = [0, 1, 2], [3, 4, 5]
    full = [(a, b) for a in A for b in B]
    out = slice_matchings(A, B, full, 2)
    assert len(out) == 2 and all(len(m) == 3 for m in out)
    out = slice_matchings(B[:2], A, [(a, b) for a in A for b in B[:2]], 2)
    assert len(out) == 2
    with pytest.raises(ContractError):
        slice_matchings([0], [1, 2, 3], [], 1)


def test_compute_gamma_examples():
    p = compute_gamma(math.e, 1, 0.0)
    assert math.isclose(p.gamma, 104 * math.sqrt(math.e))
    assert p.r <= 0 and not p.feasible
    d, t, lam = 10**6, 10, 100.0
    p = compute_gamma(d, t, lam)
    assert math.isclose(p.gamma, 104 * max(lam, math.sqrt(d * math.log(d) / t)), rel_tol=1e-12)
    assert p.r == math.floor(d / t - p.gamma)
    d = 10**9
    lam = d ** (2 / 3)
    p = compute_gamma(d, 1000, lam)
    assert math.isclose(p.gamma, 104 * lam)


def test_compute_gamma_small_coeff_is_feasible():
    p = compute_gamma(64, 2, 1.0, coeff=0.5)
    assert p.feasible and p.r == math.floor(32 - p.gamma)
