"""Graph generators and spectral-gap estimation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, ParameterError, RetryableError
from .graph import Graph
from .rng import stream


def complete_graph(t: int) -> Graph:
    if t < 1:
        raise ParameterError("complete_graph needs t >= 1")
    return Graph(t, combinations(range(t), 2))


def complete_bipartite(a: int, b: int) -> Graph:
    """K_{a,b} with sides ``0..a-1`` and ``a..a+b-1``."""
    return Graph(a + b, ((i, a + j) for i in range(a) for j in range(b)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ParameterError("cycle needs n >= 3")
    return Graph(n, ((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    return Graph(n, ((i, i + 1) for i in range(n - 1)))


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner)


def disjoint_union(*graphs: Graph) -> Graph:
    edges = []
    offset = 0
    for g in graphs:
        edges.extend((u + offset, v + offset) for u, v in g.edges())
        offset += g.n
    return Graph(offset, edges)


def circulant(n: int, offsets) -> Graph:
    """Vertex i is adjacent to i +- o (mod n) for every offset o."""
    offs = list(offsets)
    if len(set(offs)) != len(offs):
        raise ParameterError("offsets must be distinct")
    for o in offs:
        if not 1 <= o <= n // 2:
            raise ParameterError(f"offset {o} outside 1..{n // 2}")
    edges = set()
    for i in range(n):
        for o in offs:
            j = (i + o) % n
            edges.add((min(i, j), max(i, j)))
    return Graph(n, sorted(edges))


def random_regular(n: int, d: int, seed: int | None = None, max_restarts: int = 100) -> Graph:
    """Random simple d-regular graph from the pairing model.

    Stubs are shuffled and paired; pairs forming loops or repeated edges are
    rejected and their stubs re-paired. If the leftover stubs admit no legal
    pair, the attempt restarts from scratch.
    """
    if d < 0 or d >= n:
        raise ParameterError("need 0 <= d < n")
    if (n * d) % 2:
        raise ParameterError("n * d must be even")
    if d == 0:
        return Graph(n)
    rng = stream(seed, "random_regular")
    for _ in range(max_restarts):
        edges = _try_pairing(n, d, rng)
        if edges is not None:
            return Graph(n, sorted(edges))
    raise RetryableError(f"pairing model failed {max_restarts} times for n={n}, d={d}")


def _try_pairing(n: int, d: int, rng: np.random.Generator):
    edges: set[tuple[int, int]] = set()
    stubs = np.repeat(np.arange(n), d)
    while stubs.size:
        rng.shuffle(stubs)
        a, b = stubs[0::2], stubs[1::2]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        rejected = []
        for u, v in zip(lo.tolist(), hi.tolist()):
            if u != v and (u, v) not in edges:
                edges.add((u, v))
            else:
                rejected.extend((u, v))
        if not rejected:
            break
        if len(rejected) == stubs.size and not _has_legal_pair(rejected, edges):
            return None
        stubs = np.array(rejected)
    return edges


def _has_legal_pair(stubs, edges) -> bool:
    vs = sorted(set(stubs))
    return any((u, v) not in edges for u, v in combinations(vs, 2))


@dataclass
class SpectralReport:
    lam: float
    iterations: int
    residual: float
    converged: bool


def adjacency_matrix(g: Graph) -> sp.csr_matrix:
    edges = np.array(g.edges(), dtype=np.int64).reshape(-1, 2)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.ones(rows.size)
    return sp.csr_matrix((data, (rows, cols)), shape=(g.n, g.n))


def second_eigenvalue(g: Graph, tol: float = 1e-4, max_iters: int = 20000, seed: int | None = 0) -> SpectralReport:
    """Second largest absolute adjacency eigenvalue of a regular graph.

    Power iteration on A^2 restricted to the orthogonal complement of the
    all-ones vector; the square root of the Rayleigh quotient is reported.
    Stops once the eigen-residual certifies an eigenvalue within ``tol * d``.
    """
    if not g.is_regular():
        raise ContractError("second_eigenvalue needs a regular graph")
    d = g.max_degree
    if g.n <= 1 or d == 0:
        return SpectralReport(0.0, 0, 0.0, True)
    a = adjacency_matrix(g)
    x = stream(seed, "power_iteration").standard_normal(g.n)
    x -= x.mean()
    norm = np.linalg.norm(x)
    if norm == 0:
        return SpectralReport(0.0, 0, 0.0, True)
    x /= norm
    mu, res = 0.0, math.inf
    for it in range(1, max_iters + 1):
        y = a @ (a @ x)
        y -= y.mean()
        mu = float(x @ y)
        res = float(np.linalg.norm(y - mu * x))
        if mu <= 0:
            # x lies in the kernel of A on the deflated space
            if res <= tol * d:
                return SpectralReport(0.0, it, res, True)
        elif res <= tol * d * math.sqrt(mu):
            return SpectralReport(math.sqrt(mu), it, res, True)
        ny = np.linalg.norm(y)
        if ny == 0:
            return SpectralReport(0.0, it, 0.0, True)
        x = y / ny
    return SpectralReport(math.sqrt(max(mu, 0.0)), max_iters, res, False)
