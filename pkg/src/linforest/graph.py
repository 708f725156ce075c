"""Simple undirected graphs, linear-forest checks, decompositions and lower bounds.

Vertices are dense integers ``0..n-1`` and every edge is stored as the
canonical pair ``(min, max)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Sequence

from .errors import ContractError, ParameterError

Edge = tuple[int, int]


def canon(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable simple graph with sorted adjacency lists."""

    __slots__ = ("n", "adj", "m", "labels", "_edge_set")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = (), labels=None):
        if n < 0:
            raise ParameterError("vertex count must be nonnegative")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        m = 0
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ContractError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ContractError(f"edge ({u}, {v}) out of range for n={n}")
            if v in nbrs[u]:
                raise ContractError(f"parallel edge ({u}, {v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
            m += 1
        self.n = n
        self.adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(s)) for s in nbrs)
        self.m = m
        self.labels = tuple(labels) if labels is not None else None
        self._edge_set: frozenset[Edge] | None = None

    @classmethod
    def from_labeled_edges(cls, pairs: Iterable[tuple[Hashable, Hashable]]) -> "Graph":
        """Remap arbitrary vertex labels to ``0..n-1`` (first-seen order)."""
        index: dict[Hashable, int] = {}
        edges = []
        for a, b in pairs:
            for x in (a, b):
                if x not in index:
                    index[x] = len(index)
            edges.append((index[a], index[b]))
        return cls(len(index), edges, labels=list(index))

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adj]

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    @property
    def min_degree(self) -> int:
        return min((len(a) for a in self.adj), default=0)

    def is_regular(self) -> bool:
        return self.n == 0 or self.max_degree == self.min_degree

    def edges(self) -> list[Edge]:
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def edge_set(self) -> frozenset[Edge]:
        if self._edge_set is None:
            self._edge_set = frozenset(self.edges())
        return self._edge_set

    def has_edge(self, u: int, v: int) -> bool:
        return canon(u, v) in self.edge_set()

    def edge_subgraph(self, edges: Iterable[Sequence[int]]) -> "Graph":
        """Spanning subgraph on the same vertex set."""
        return Graph(self.n, edges)

    def induced(self, vertices: Sequence[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph relabelled to ``0..k-1``; returns it with the old ids."""
        verts = sorted(vertices)
        pos = {v: i for i, v in enumerate(verts)}
        edges = [
            (pos[u], pos[w]) for u in verts for w in self.adj[u] if u < w and w in pos
        ]
        return Graph(len(verts), edges), verts

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, max_degree={self.max_degree})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.n, self.adj))


class UnionFind:
    def __init__(self, n: int = 0):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the classes of ``a`` and ``b``; False if already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def _linear_forest_violation(n: int, edges: Iterable[Edge]) -> tuple[str, Edge] | None:
    deg: dict[int, int] = {}
    uf = UnionFind(n)
    for u, v in edges:
        du = deg.get(u, 0) + 1
        dv = deg.get(v, 0) + 1
        if du > 2 or dv > 2:
            return "degree", (u, v)
        deg[u] = du
        deg[v] = dv
        if not uf.union(u, v):
            return "cycle", (u, v)
    return None


def is_linear_forest(g: Graph, es: Iterable[Sequence[int]]) -> bool:
    """True iff ``es`` has maximum degree at most 2 and contains no cycle."""
    edges = []
    for u, v in es:
        e = canon(int(u), int(v))
        if e not in g.edge_set():
            raise ContractError(f"edge {e} is not an edge of the graph")
        edges.append(e)
    return _linear_forest_violation(g.n, edges) is None


@dataclass
class ForestDecomposition:
    n: int
    forests: list[list[Edge]]

    @property
    def count(self) -> int:
        return len(self.forests)

    def normalized(self) -> "ForestDecomposition":
        """Canonical edges, each forest sorted; empty forests dropped."""
        forests = [sorted(canon(u, v) for u, v in f) for f in self.forests]
        return ForestDecomposition(self.n, [f for f in forests if f])

    def to_json(self) -> str:
        payload = {
            "n": self.n,
            "count": self.count,
            "forests": [[[u, v] for u, v in f] for f in self.forests],
        }
        return json.dumps(payload, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ForestDecomposition":
        data = json.loads(text)
        forests = [[(int(u), int(v)) for u, v in f] for f in data["forests"]]
        if "count" in data and data["count"] != len(forests):
            raise ContractError("count field does not match number of forests")
        return cls(int(data["n"]), forests)


@dataclass
class VerificationReport:
    valid: bool
    count: int
    reason: str | None = None
    forest_index: int | None = None
    edge: Edge | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.valid


def verify_decomposition(g: Graph, d: ForestDecomposition) -> VerificationReport:
    """Check that the forests are linear, pairwise edge-disjoint and cover E(g)."""
    if d.n != g.n:
        return VerificationReport(False, d.count, f"vertex count {d.n} != {g.n}")
    gset = g.edge_set()
    seen: dict[Edge, int] = {}
    for i, forest in enumerate(d.forests):
        canon_edges = []
        for u, v in forest:
            e = canon(int(u), int(v))
            if e not in gset:
                return VerificationReport(False, d.count, "edge not in graph", i, e)
            if e in seen:
                return VerificationReport(
                    False, d.count, "edge used twice", i, e, {"first_forest": seen[e]}
                )
            seen[e] = i
            canon_edges.append(e)
        bad = _linear_forest_violation(g.n, canon_edges)
        if bad is not None:
            return VerificationReport(False, d.count, f"not a linear forest ({bad[0]})", i, bad[1])
    if len(seen) != g.m:
        missing = next(e for e in g.edges() if e not in seen)
        return VerificationReport(False, d.count, "edge not covered", None, missing)
    return VerificationReport(True, d.count)


def la_lower_bound(g: Graph) -> int:
    """max(ceil(Delta/2), ceil(e(G)/(n-1))): a linear forest has at most n-1 edges."""
    if g.m == 0:
        return 0
    return max(-(-g.max_degree // 2), -(-g.m // (g.n - 1)))


def _deficiency_pairs(deficit: dict[int, int]) -> list[tuple[int, int]]:
    # Greedy realisation of the deficits by a simple graph with loops (a loop adds 1).
    remaining = dict(deficit)
    pairs = []
    while True:
        live = sorted((k for k, r in remaining.items() if r > 0), key=lambda k: (-remaining[k], k))
        if not live:
            return pairs
        x = live[0]
        partners = live[1 : 1 + remaining[x]]
        for y in partners:
            pairs.append((x, y))
            remaining[y] -= 1
        remaining[x] -= len(partners)
        if remaining[x] > 0:
            pairs.append((x, x))
        remaining[x] = 0


def regularize(g: Graph, max_vertices: int | None = None) -> Graph:
    """Embed ``g`` as an induced subgraph of a max_degree-regular simple graph.

    Each step takes two disjoint copies of the current graph and joins
    deficient vertices across the copies; vertices ``0..g.n-1`` keep their
    original neighbourhoods. Raises ``ParameterError`` if the result would
    exceed ``max_vertices``.
    """
    target = g.max_degree
    n = g.n
    edges = g.edges()
    while True:
        deg = [0] * n
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        deficit = {v: target - deg[v] for v in range(n) if deg[v] < target}
        if not deficit:
            return Graph(n, edges)
        if max_vertices is not None and 2 * n > max_vertices:
            raise ParameterError(f"regularizing needs more than {max_vertices} vertices")
        cross = []
        for x, y in _deficiency_pairs(deficit):
            cross.append((x, y + n))
            if x != y:
                cross.append((y, x + n))
        edges = edges + [(u + n, v + n) for u, v in edges] + cross
        n *= 2


def read_edge_list(path: str | Path) -> Graph:
    text = Path(path).read_text()
    return parse_edge_list(text)


def parse_edge_list(text: str) -> Graph:
    tokens = text.split()
    if len(tokens) < 2:
        raise ParameterError("edge list must start with 'n m'")
    n, m = int(tokens[0]), int(tokens[1])
    body = tokens[2:]
    if len(body) != 2 * m:
        raise ParameterError(f"expected {m} edges, found {len(body) / 2:g}")
    edges = [(int(body[2 * i]), int(body[2 * i + 1])) for i in range(m)]
    return Graph(n, edges)


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def write_edge_list(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g))


def max_degree_of(edges: Iterable[Edge]) -> int:
    deg: dict[int, int] = {}
    for u, v in edges:
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    return max(deg.values(), default=0)

