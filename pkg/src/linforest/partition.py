"""Balanced vertex partition with every vertex's degree into each part near d/t."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ContractError, ParameterError
from .graph import Graph
from .lll import Event, ResampleLog, VariableSpace, resample_until_good
from .rng import stream


@dataclass
class VertexPartition:
    parts: list[list[int]]
    t: int
    degree_window: tuple[float, float]
    part_of: list[int]
    log: ResampleLog | None = None

    def to_json(self) -> str:
        return json.dumps({"t": self.t, "parts": self.parts}, separators=(",", ":"))


def degree_window(d: int, t: int, c_window: float) -> tuple[float, float]:
    spread = c_window * math.sqrt(d * math.log(d) / t) if d > 1 else 0.0
    return d / t - spread, d / t + spread


def check_partition(g: Graph, parts: list[list[int]], window: tuple[float, float]) -> list[str]:
    """Independent scan of both partition properties; returns the violations found."""
    problems = []
    t = len(parts)
    owner = [-1] * g.n
    for i, part in enumerate(parts):
        for v in part:
            if owner[v] != -1:
                problems.append(f"vertex {v} in two parts")
            owner[v] = i
    if any(o == -1 for o in owner):
        problems.append("parts do not cover V")
        return problems
    sizes = [len(p) for p in parts]
    if sizes and max(sizes) - min(sizes) > 1:
        problems.append(f"unbalanced part sizes {min(sizes)}..{max(sizes)}")
    lo, hi = window
    for v in range(g.n):
        counts = [0] * t
        for w in g.adj[v]:
            counts[owner[w]] += 1
        for i, c in enumerate(counts):
            if not lo <= c <= hi:
                problems.append(f"d(v={v}, V_{i}) = {c} outside [{lo:.3f}, {hi:.3f}]")
    return problems


def partition_vertices(
    g: Graph,
    t: int,
    c_window: float = 100.0,
    seed: int | None = 0,
    max_resamples: int = 10_000,
) -> VertexPartition:
    """Random balanced partition into ``t`` parts via block permutations.

    Vertices are cut into consecutive blocks of size ``t``; each block gets an
    independent uniform permutation of part labels. A vertex whose degree into
    some part leaves the window triggers a resample of every block containing
    one of its neighbours.
    """
    if t < 1:
        raise ParameterError("t must be >= 1")
    if t > g.n:
        raise ParameterError(f"t={t} exceeds n={g.n}")
    if not g.is_regular():
        raise ContractError("partition_vertices needs a regular graph (regularize first)")
    n, d = g.n, g.max_degree
    window = degree_window(d, t, c_window)
    lo, hi = window

    nblocks = -(-n // t)
    block_of = [v // t for v in range(n)]
    sizes = [min(t, n - k * t) for k in range(nblocks)]
    rng = stream(seed, "partition")

    def sampler(size):
        return lambda r: r.permutation(size).tolist()

    space = VariableSpace([sampler(s) for s in sizes], rng)
    adj = g.adj

    def make_event(v: int, i: int) -> Event:
        nbrs = adj[v]
        deps = tuple(sorted({block_of[w] for w in nbrs})) or (block_of[v],)

        def violated(values, nbrs=nbrs, i=i):
            c = 0
            for w in nbrs:
                if values[w // t][w % t] == i:
                    c += 1
            return not lo <= c <= hi

        return Event(deps, violated)

    # a window containing every possible count makes an event vacuous; skip evaluating those
    vacuous = lo <= 0 and hi >= d
    events = [] if vacuous else [make_event(v, i) for v in range(n) for i in range(t)]
    values, log = resample_until_good(space, events, max_resamples)

    part_of = [values[v // t][v % t] for v in range(n)]
    parts: list[list[int]] = [[] for _ in range(t)]
    for v, i in enumerate(part_of):
        parts[i].append(v)
    problems = check_partition(g, parts, window)
    if problems:
        raise AssertionError(f"partition failed verification: {problems[:3]}")
    return VertexPartition(parts, t, window, part_of, log)
