from __future__ import annotations

import functools
from itertools import combinations

import networkx as nx
import pytest

from linforest.gen import circulant, complete_graph, cycle_graph, petersen_graph, random_regular
from linforest.graph import Graph

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Remember one acceptance verdict; printed in the terminal summary."""
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def from_nx(h: nx.Graph) -> Graph:
    h = nx.convert_node_labels_to_integers(h)
    return Graph(h.number_of_nodes(), h.edges())


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


@functools.lru_cache(maxsize=None)
def connected_cubic_graphs(max_n: int = 8) -> tuple[Graph, ...]:
    """All connected cubic graphs on at most ``max_n`` vertices, up to isomorphism.

    Exhaustive: every labelled 3-regular edge set with N(0) = {1, 2, 3} (no
    loss of generality) is enumerated in lexicographic edge order, then
    deduplicated by isomorphism within Weisfeiler-Lehman hash buckets.
    """
    found: list[nx.Graph] = []
    for n in range(4, max_n + 1, 2):
        pairs = list(combinations(range(n), 2))
        deg = [0] * n
        chosen: list[tuple[int, int]] = []
        reps: dict[str, list[nx.Graph]] = {}

        def extend(i: int) -> None:
            # pick edges in lexicographic order; vertex v must be saturated once
            # every pair starting at v has been decided
            if len(chosen) == 3 * n // 2:
                h = nx.Graph(chosen)
                if nx.is_connected(h):
                    bucket = reps.setdefault(nx.weisfeiler_lehman_graph_hash(h), [])
                    if not any(nx.is_isomorphic(h, r) for r in bucket):
                        bucket.append(h)
                return
            if i == len(pairs):
                return
            u, v = pairs[i]
            if u == 0:
                forced = v <= 3
                if forced:
                    deg[0] += 1
                    deg[v] += 1
                    chosen.append((0, v))
                    extend(i + 1)
                    chosen.pop()
                    deg[0] -= 1
                    deg[v] -= 1
                else:
                    extend(i + 1)
                return
            if i == 0 or pairs[i - 1][0] != u:
                # all pairs (w, *) with w < u are decided: w must be saturated
                if any(deg[w] != 3 for w in range(u)):
                    return
            if deg[u] < 3 and deg[v] < 3:
                deg[u] += 1
                deg[v] += 1
                chosen.append((u, v))
                extend(i + 1)
                chosen.pop()
                deg[u] -= 1
                deg[v] -= 1
            extend(i + 1)

        extend(0)
        found.extend(h for key in sorted(reps) for h in reps[key])
    return tuple(from_nx(h) for h in found)


def tiny_regular_corpus() -> list[tuple[str, Graph]]:
    out = [(f"cubic{i}_n{g.n}", g) for i, g in enumerate(connected_cubic_graphs())]
    out += [("K4", complete_graph(4)), ("K6", complete_graph(6)), ("petersen", petersen_graph())]
    out += [(f"C{n}", cycle_graph(n)) for n in range(3, 19)]
    return out


CIRCULANTS = [
    (8, (1, 4)),
    (64, (1, 2, 3)),
    (101, (1, 5, 12)),
    (256, (1, 7, 31, 64)),
    (200, (1, 4, 9, 16, 25, 36, 49, 64)),
    (512, (1, 3, 9, 27, 81, 243, 5, 17, 40, 100, 150, 200, 7, 11, 13, 19)),
]


def validity_corpus(seeds=range(5)) -> list[tuple[str, Graph]]:
    """The acceptance corpus: random regular, circulants, K_4..K_8, Petersen."""
    out = []
    for n in (256, 1024, 4096):
        for d in (4, 8, 16, 32, 64):
            for s in seeds:
                out.append((f"rr_n{n}_d{d}_s{s}", random_regular(n, d, s)))
    for n, offs in CIRCULANTS:
        out.append((f"circ_{n}_{'-'.join(map(str, offs))}", circulant(n, offs)))
    for k in range(4, 9):
        out.append((f"K{k}", complete_graph(k)))
    out.append(("petersen", petersen_graph()))
    return out


@pytest.fixture(scope="session")
def cubic_graphs():
    return connected_cubic_graphs()
