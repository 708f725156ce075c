"""r-factors of balanced bipartite graphs via max-flow, and the fake-vertex variant."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .color import peel_perfect_matchings
from .errors import ContractError, InfeasibleError, ParameterError
from .graph import Edge, canon


class Dinic:
    """Dinic max-flow on an explicit residual graph (integer capacities)."""

    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, c: int) -> int:
        """Add arc u->v; returns its index (the reverse arc is index ^ 1)."""
        idx = len(self.to)
        self.head[u].append(idx)
        self.to.append(v)
        self.cap.append(c)
        self.head[v].append(idx + 1)
        self.to.append(u)
        self.cap.append(0)
        return idx

    def _levels(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        to, cap = self.to, self.cap
        while q:
            x = q.popleft()
            for a in self.head[x]:
                y = to[a]
                if cap[a] > 0 and level[y] < 0:
                    level[y] = level[x] + 1
                    q.append(y)
        return level if level[t] >= 0 else None

    def max_flow(self, s: int, t: int) -> int:
        total = 0
        to, cap, head = self.to, self.cap, self.head
        while True:
            level = self._levels(s, t)
            if level is None:
                return total
            it = [0] * self.n
            while True:
                # iterative DFS for one blocking-flow augmenting path
                stack = [s]
                arcs: list[int] = []
                found = False
                while stack:
                    x = stack[-1]
                    if x == t:
                        found = True
                        break
                    advanced = False
                    while it[x] < len(head[x]):
                        a = head[x][it[x]]
                        y = to[a]
                        if cap[a] > 0 and level[y] == level[x] + 1:
                            stack.append(y)
                            arcs.append(a)
                            advanced = True
                            break
                        it[x] += 1
                    if not advanced:
                        stack.pop()
                        level[x] = -1
                        if arcs:
                            arcs.pop()
                            it[stack[-1]] += 1
                if not found:
                    break
                push = min(cap[a] for a in arcs)
                for a in arcs:
                    cap[a] -= push
                    cap[a ^ 1] += push
                total += push

    def reachable(self, s: int) -> list[bool]:
        seen = [False] * self.n
        seen[s] = True
        q = deque([s])
        while q:
            x = q.popleft()
            for a in self.head[x]:
                y = self.to[a]
                if self.cap[a] > 0 and not seen[y]:
                    seen[y] = True
                    q.append(y)
        return seen


@dataclass
class RFactorResult:
    feasible: bool
    edges: list[Edge]
    flow: int
    # Mirsky witness when infeasible: e(X, Y) < r(|X| + |Y| - m)
    X: list[int] = field(default_factory=list)
    Y: list[int] = field(default_factory=list)


def find_r_factor(A: Sequence[int], B: Sequence[int], edges: Iterable[Sequence[int]], r: int) -> RFactorResult:
    """Spanning r-regular subgraph of the bipartite graph (A, B, edges), or a cut witness."""
    A, B = list(A), list(B)
    if len(A) != len(B):
        raise ContractError(f"unbalanced sides {len(A)} != {len(B)}")
    if r < 0:
        raise ParameterError("r must be nonnegative")
    m = len(A)
    apos = {v: i for i, v in enumerate(A)}
    bpos = {v: i for i, v in enumerate(B)}
    src, snk = 2 * m, 2 * m + 1
    net = Dinic(2 * m + 2)
    for i in range(m):
        net.add_edge(src, i, r)
        net.add_edge(m + i, snk, r)
    arcs: list[tuple[int, Edge]] = []
    for u, v in edges:
        if u in bpos and v in apos:
            u, v = v, u
        if u not in apos or v not in bpos:
            raise ContractError(f"edge ({u}, {v}) does not cross the bipartition")
        arcs.append((net.add_edge(apos[u], m + bpos[v], 1), canon(u, v)))
    flow = net.max_flow(src, snk)
    if flow == r * m:
        chosen = sorted(e for a, e in arcs if net.cap[a] == 0)
        return RFactorResult(True, chosen, flow)
    seen = net.reachable(src)
    X = [A[i] for i in range(m) if seen[i]]
    Y = [B[i] for i in range(m) if not seen[m + i]]
    return RFactorResult(False, [], flow, X, Y)


def near_factor_matchings(A: Sequence[int], B: Sequence[int], edges: Iterable[Sequence[int]], r: int) -> list[list[Edge]]:
    """``r`` disjoint matchings of a bipartite graph with |A| = |B| + 1.

    A fake vertex joined to all of A balances the sides; an r-factor of the
    augmented graph is peeled into perfect matchings and the fake edges are
    dropped, so every real vertex is matched in at least r - 1 of them.
    """
    A, B = list(A), list(B)
    if r < 1:
        raise ParameterError("r must be >= 1")
    if len(A) != len(B) + 1:
        raise ContractError("near_factor_matchings needs |A| = |B| + 1")
    fake = -1
    aug = [tuple(e) for e in edges] + [(a, fake) for a in A]
    res = find_r_factor(A, B + [fake], aug, r)
    if not res.feasible:
        raise InfeasibleError("augmented graph has no r-factor", res)
    aset = set(A)
    factor_edges = [(u, v) if u in aset else (v, u) for u, v in res.edges]
    layers = peel_perfect_matchings(A, B + [fake], factor_edges)
    return [[e for e in layer if fake not in e] for layer in layers]


def slice_matchings(A: Sequence[int], B: Sequence[int], edges: Iterable[Sequence[int]], r: int) -> list[list[Edge]]:
    """r matchings of G[A, B] covering every vertex at least r - 1 times (sizes may differ by one)."""
    A, B = list(A), list(B)
    edges = list(edges)
    if len(A) < len(B):
        A, B = B, A
    if len(A) == len(B):
        res = find_r_factor(A, B, edges, r)
        if not res.feasible:
            raise InfeasibleError("no r-factor", res)
        aset = set(A)
        oriented = [(u, v) if u in aset else (v, u) for u, v in res.edges]
        return peel_perfect_matchings(A, B, oriented)
    if len(A) == len(B) + 1:
        return near_factor_matchings(A, B, edges, r)
    raise ContractError("sides differ by more than one")


@dataclass
class RFactorParams:
    r: int
    gamma: float
    lam: float
    feasible: bool


def compute_gamma(d: int, t: int, lam: float, coeff: float = 104.0) -> RFactorParams:
    """gamma = coeff * max(lam, sqrt(d log d / t)) and r = floor(d/t - gamma); feasible iff gamma < r/2."""
    if t < 1:
        raise ParameterError("t must be >= 1")
    spread = math.sqrt(d * math.log(d) / t) if d > 1 else 0.0
    gamma = coeff * max(lam, spread)
    r = math.floor(d / t - gamma)
    return RFactorParams(r, gamma, lam, r > 0 and gamma < r / 2)
