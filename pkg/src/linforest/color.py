"""Edge colorings and matching decompositions.

``vizing_color`` is the Misra-Gries fan/rotate/invert procedure and never
uses more than max_degree + 1 colors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import ContractError, ParameterError
from .graph import Edge, Graph, canon


@dataclass
class EdgeColoring:
    color_of: dict[Edge, int]
    palette_size: int

    def classes(self, size: int | None = None) -> list[list[Edge]]:
        size = self.palette_size if size is None else size
        out: list[list[Edge]] = [[] for _ in range(size)]
        for e, c in self.color_of.items():
            out[c].append(e)
        for cls in out:
            cls.sort()
        return out

    @property
    def colors_used(self) -> int:
        return len(set(self.color_of.values()))


def is_proper(coloring: EdgeColoring) -> bool:
    seen: set[tuple[int, int]] = set()
    for (u, v), c in coloring.color_of.items():
        if not 0 <= c < coloring.palette_size:
            return False
        for x in (u, v):
            if (x, c) in seen:
                return False
            seen.add((x, c))
    return True


def _lowest_bit(x: int) -> int:
    return (x & -x).bit_length() - 1


class _MisraGries:
    def __init__(self, n: int, ncolors: int):
        self.full = (1 << ncolors) - 1
        self.used = [0] * n
        self.at: list[dict[int, int]] = [{} for _ in range(n)]
        self.color: dict[Edge, int] = {}

    def free(self, v: int) -> int:
        return self.full & ~self.used[v]

    def is_free(self, v: int, c: int) -> bool:
        return not (self.used[v] >> c) & 1

    def set(self, u: int, v: int, c: int) -> None:
        self.color[canon(u, v)] = c
        self.at[u][c] = v
        self.at[v][c] = u
        self.used[u] |= 1 << c
        self.used[v] |= 1 << c

    def unset(self, u: int, v: int) -> int:
        c = self.color.pop(canon(u, v))
        del self.at[u][c]
        del self.at[v][c]
        self.used[u] &= ~(1 << c)
        self.used[v] &= ~(1 << c)
        return c

    def maximal_fan(self, u: int, v: int) -> list[int]:
        fan = [v]
        in_fan = {v}
        at_u = self.at[u]
        extended = True
        while extended:
            extended = False
            free_last = self.free(fan[-1])
            while free_last:
                c = _lowest_bit(free_last)
                free_last &= free_last - 1
                w = at_u.get(c)
                if w is not None and w not in in_fan:
                    fan.append(w)
                    in_fan.add(w)
                    extended = True
                    break
        return fan

    def invert_path(self, u: int, c: int, d: int) -> None:
        # the maximal path from u whose edges alternate d, c, d, ...
        path = []
        x, want = u, d
        while True:
            y = self.at[x].get(want)
            if y is None:
                break
            path.append((x, y))
            x, want = y, (c if want == d else d)
        olds = [self.unset(a, b) for a, b in path]
        for (a, b), old in zip(path, olds):
            self.set(a, b, d if old == c else c)

    def color_edge(self, u: int, v: int) -> None:
        common = self.free(u) & self.free(v)
        if common:
            self.set(u, v, _lowest_bit(common))
            return
        fan = self.maximal_fan(u, v)
        c = _lowest_bit(self.free(u))
        d = _lowest_bit(self.free(fan[-1]))
        self.invert_path(u, c, d)
        w_idx = next(i for i, w in enumerate(fan) if self.is_free(w, d))
        # rotate the fan prefix fan[0..w_idx]
        for i in range(w_idx):
            nxt = self.unset(u, fan[i + 1])
            self.set(u, fan[i], nxt)
        self.set(u, fan[w_idx], d)


def vizing_color(g: Graph, edges: Iterable[Sequence[int]] | None = None) -> EdgeColoring:
    """Proper edge coloring with at most max_degree + 1 colors.

    ``edges`` optionally restricts coloring to a subset of ``g``'s edges
    (the palette then follows the subgraph's own maximum degree).
    """
    if edges is None:
        elist = g.edges()
        delta = g.max_degree
    else:
        elist = sorted({canon(int(u), int(v)) for u, v in edges})
        deg: dict[int, int] = {}
        for u, v in elist:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        delta = max(deg.values(), default=0)
    ncolors = delta + 1 if elist else 0
    mg = _MisraGries(g.n, max(ncolors, 1))
    for u, v in elist:
        mg.color_edge(u, v)
    return EdgeColoring(dict(mg.color), ncolors)


def bipartite_matchings(b: Graph, s: int, edges: Iterable[Sequence[int]] | None = None) -> list[list[Edge]]:
    """Exactly ``s`` pairwise disjoint matchings covering the (bipartite) edge set.

    Layers beyond the coloring's palette are empty.
    """
    coloring = vizing_color(b, edges)
    if coloring.palette_size > s:
        raise ParameterError(f"s={s} is smaller than max_degree + 1 = {coloring.palette_size}")
    return coloring.classes(s)


def peel_perfect_matchings(left: Sequence[int], right: Sequence[int], edges: Iterable[Sequence[int]]) -> list[list[Edge]]:
    """Split an r-regular balanced bipartite graph into r perfect matchings.

    Each matching is a maximum matching (Hopcroft-Karp) of what is left,
    which stays regular and hence has a perfect matching.
    """
    left, right = list(left), list(right)
    if len(left) != len(right):
        raise ContractError("sides must have equal size")
    lpos = {v: i for i, v in enumerate(left)}
    rpos = {v: i for i, v in enumerate(right)}
    remaining: set[Edge] = set()
    ldeg = [0] * len(left)
    rdeg = [0] * len(right)
    for u, v in edges:
        if u in rpos and v in lpos:
            u, v = v, u
        if u not in lpos or v not in rpos:
            raise ContractError(f"edge ({u}, {v}) does not cross the bipartition")
        remaining.add((lpos[u], rpos[v]))
        ldeg[lpos[u]] += 1
        rdeg[rpos[v]] += 1
    if not left:
        return []
    r = ldeg[0]
    if any(x != r for x in ldeg) or any(x != r for x in rdeg):
        raise ContractError("graph is not regular")
    k = len(left)
    out = []
    for _ in range(r):
        pairs = sorted(remaining)
        rows = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
        cols = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
        mat = sp.csr_matrix((np.ones(len(pairs), dtype=np.int8), (rows, cols)), shape=(k, k))
        match = maximum_bipartite_matching(mat, perm_type="column")
        if (match < 0).any():
            raise RuntimeError("regular bipartite graph without a perfect matching")
        layer = []
        for i, j in enumerate(match.tolist()):
            remaining.discard((i, j))
            layer.append(canon(left[i], right[j]))
        out.append(sorted(layer))
    return out


@dataclass
class HamPathSet:
    t: int
    paths: list[list[int]]

    @property
    def endpoints(self) -> list[tuple[int, int]]:
        return [(p[0], p[-1]) for p in self.paths]


def check_ham_paths(hp: HamPathSet) -> list[str]:
    t = hp.t
    problems = []
    if len(hp.paths) != t // 2:
        problems.append(f"expected {t // 2} paths, got {len(hp.paths)}")
    used: set[Edge] = set()
    for k, p in enumerate(hp.paths):
        if sorted(p) != list(range(t)):
            problems.append(f"path {k} is not Hamiltonian")
        for a, b in zip(p, p[1:]):
            e = canon(a, b)
            if e in used:
                problems.append(f"edge {e} repeated")
            used.add(e)
    if len(used) != t * (t - 1) // 2:
        problems.append(f"paths cover {len(used)} of {t * (t - 1) // 2} edges")
    ends: set[int] = set()
    for s, e in hp.endpoints:
        if s in ends or e in ends or s == e:
            problems.append("endpoint pairs are not disjoint")
        ends.update((s, e))
    return problems


def walecki_paths(t: int) -> HamPathSet:
    """t/2 edge-disjoint Hamiltonian paths of K_t (zig-zag k, k+1, k-1, k+2, ...)."""
    if t < 2 or t % 2:
        raise ParameterError("walecki_paths needs an even t >= 2")
    paths = []
    for k in range(t // 2):
        p = [k]
        for j in range(1, t):
            step = (j + 1) // 2 if j % 2 else -(j // 2)
            p.append((k + step) % t)
        paths.append(p)
    hp = HamPathSet(t, paths)
    problems = check_ham_paths(hp)
    if problems:
        raise AssertionError(f"Walecki construction failed: {problems[:3]}")
    return hp


def exact_chromatic_index(g: Graph, limit: int = 20) -> int:
    """Chromatic index by backtracking; refuses graphs with more than ``limit`` edges."""
    if g.m > limit:
        raise ParameterError(f"graph has {g.m} edges, limit is {limit}")
    if g.m == 0:
        return 0
    # order edges so that each one touches already-placed edges where possible
    order: list[Edge] = []
    placed: set[Edge] = set()
    touched: set[int] = set()
    pending = g.edges()
    while pending:
        best = max(pending, key=lambda e: ((e[0] in touched) + (e[1] in touched), -e[0], -e[1]))
        pending.remove(best)
        order.append(best)
        placed.add(best)
        touched.update(best)

    def solve(k: int) -> bool:
        used: list[set[int]] = [set() for _ in range(g.n)]

        def place(i: int, top: int) -> bool:
            if i == len(order):
                return True
            u, v = order[i]
            for c in range(min(k, top + 2)):
                if c in used[u] or c in used[v]:
                    continue
                used[u].add(c)
                used[v].add(c)
                if place(i + 1, max(top, c)):
                    return True
                used[u].discard(c)
                used[v].discard(c)
            return False

        return place(0, -1)

    k = g.max_degree
    while not solve(k):
        k += 1
    return k
