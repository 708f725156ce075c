"""Exact linear arboricity of tiny graphs by backtracking."""
from __future__ import annotations

from .errors import ParameterError
from .graph import Edge, Graph, la_lower_bound


class _Forests:
    """k linear forests grown edge by edge, with undoable union-find per forest."""

    def __init__(self, n: int, k: int):
        self.deg = [[0] * n for _ in range(k)]
        self.parent = [list(range(n)) for _ in range(k)]

    def find(self, c: int, x: int) -> int:
        p = self.parent[c]
        while p[x] != x:
            x = p[x]
        return x

    def try_add(self, c: int, u: int, v: int) -> int | None:
        """Add uv to forest c if it stays linear; returns the undo token."""
        deg = self.deg[c]
        if deg[u] >= 2 or deg[v] >= 2:
            return None
        ru, rv = self.find(c, u), self.find(c, v)
        if ru == rv:
            return None
        # no union by rank: undo only needs the child root
        self.parent[c][rv] = ru
        deg[u] += 1
        deg[v] += 1
        return rv

    def remove(self, c: int, u: int, v: int, token: int) -> None:
        self.parent[c][token] = token
        self.deg[c][u] -= 1
        self.deg[c][v] -= 1


def _partition_into(g: Graph, order: list[Edge], k: int) -> list[int] | None:
    state = _Forests(g.n, k)
    assign = [-1] * len(order)

    def place(i: int, top: int) -> bool:
        if i == len(order):
            return True
        u, v = order[i]
        # forests are interchangeable: never open more than one new forest
        for c in range(min(k, top + 2)):
            token = state.try_add(c, u, v)
            if token is None:
                continue
            assign[i] = c
            if place(i + 1, max(top, c)):
                return True
            state.remove(c, u, v, token)
        return False

    return assign if place(0, -1) else None


def exact_la(g: Graph, edge_cap: int = 18) -> int:
    """Minimum number of linear forests covering E(g); refuses more than ``edge_cap`` edges."""
    if g.m > edge_cap:
        raise ParameterError(f"graph has {g.m} edges, oracle cap is {edge_cap}")
    if g.m == 0:
        return 0
    deg = g.degrees()
    order = sorted(g.edges(), key=lambda e: (-(deg[e[0]] + deg[e[1]]), e))
    k = la_lower_bound(g)
    while _partition_into(g, order, k) is None:
        k += 1
    return k


def exact_la_partition(g: Graph, edge_cap: int = 18) -> list[list[Edge]]:
    """An optimal partition witnessing ``exact_la``."""
    k = exact_la(g, edge_cap)
    if k == 0:
        return []
    deg = g.degrees()
    order = sorted(g.edges(), key=lambda e: (-(deg[e[0]] + deg[e[1]]), e))
    assign = _partition_into(g, order, k)
    forests: list[list[Edge]] = [[] for _ in range(k)]
    for e, c in zip(order, assign):
        forests[c].append(e)
    return [sorted(f) for f in forests]
