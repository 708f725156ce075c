"""Semi-random ("nibble") partial edge coloring with palette tracking.

Each round every vertex marks a fraction of its uncolored edges, marked
edges draw a tentative color from their palette, and a tentative color
sticks unless an adjacent edge drew the same one. Alongside the coloring,
the number of colors c for which a vertex lies on a short cycle of
``refs[c]`` together with color class c is tracked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, NibbleFailure, ParameterError
from .graph import Edge, Graph, canon
from .rng import stream


@dataclass
class NibbleSchedule:
    delta: int
    epsilon: float
    p_eps: float
    t_eps: int
    d_seq: list[float]
    a_seq: list[float]
    e_seq: list[float]
    kappa: float
    upper_ok: bool
    lower_ok: bool | None


def make_schedule(delta: int, epsilon: float, K: float = 1.0, e0: float = 0.0) -> NibbleSchedule:
    if not 0 < epsilon < 1:
        raise ParameterError("epsilon must lie in (0, 1)")
    x = epsilon * (1 - epsilon / 4)
    p = x * math.exp(-2 * x)
    t = math.ceil(math.log(4 / epsilon) / p)
    d_seq = [(1 - p) ** i * delta for i in range(t + 1)]
    a_seq = [d * d / delta if delta else 0.0 for d in d_seq]
    kappa = 1 + K * epsilon
    e_seq = [e0]
    for i in range(t):
        a = a_seq[i]
        e_seq.append(kappa * (e_seq[-1] + (a ** (-1 / 6) if a > 0 else math.inf)))
    upper_ok = d_seq[t] <= epsilon * delta / 4
    lower_ok = d_seq[t] >= epsilon**2 * delta / 16 if epsilon < 0.01 else None
    return NibbleSchedule(delta, epsilon, p, t, d_seq, a_seq, e_seq, kappa, upper_ok, lower_ok)


class ShortCycleTracker:
    """Per color c, a union-find over ``refs[c]`` plus the edges colored c.

    ``count[u]`` is the number of colors for which u lies on a cycle of
    length at most ``max_len`` (a repeated edge counts as a 2-cycle).
    Changes are journaled so a rejected round can be rolled back.
    """

    def __init__(self, n: int, ncolors: int, refs: Sequence[Sequence[Edge]], max_len: float):
        self.n = n
        self.max_len = max_len
        self.parent = list(range(n * ncolors))
        self.size = [1] * (n * ncolors)
        self.members: dict[int, list[int]] = {}
        self.count = np.zeros(n, dtype=np.int64)
        self.journal: list[tuple] | None = None
        for c, matching in enumerate(refs):
            for u, v in matching:
                self.add(c, u, v)

    def _find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            x = parent[x]
        return x

    def add(self, c: int, u: int, v: int) -> None:
        base = c * self.n
        ru, rv = self._find(base + u), self._find(base + v)
        if ru == rv:
            if self.size[ru] <= self.max_len:
                verts = list(self.members.get(ru, [ru - base]))
                self.count[verts] += 1
                if self.journal is not None:
                    self.journal.append(("count", verts))
            return
        if self.size[ru] < self.size[rv]:
            ru, rv = rv, ru
        mu = self.members.setdefault(ru, [ru - base])
        mv = self.members.pop(rv, None)
        old_len = len(mu)
        mu.extend(mv if mv is not None else [rv - base])
        self.parent[rv] = ru
        self.size[ru] += self.size[rv]
        if self.journal is not None:
            self.journal.append(("union", ru, rv, old_len, mv is not None))

    def begin(self) -> None:
        self.journal = []

    def commit(self) -> None:
        self.journal = None

    def rollback(self) -> None:
        for op in reversed(self.journal or []):
            if op[0] == "count":
                self.count[op[1]] -= 1
            else:
                _, ru, rv, old_len, had = op
                moved = self.members[ru][old_len:]
                del self.members[ru][old_len:]
                if had:
                    self.members[rv] = moved
                if old_len == 1:
                    del self.members[ru]
                self.size[ru] -= self.size[rv]
                self.parent[rv] = rv
        self.journal = None


@dataclass
class RoundStats:
    round: int
    residual_edges: int
    vertex_palette: tuple[float, float, float]
    d_i: float
    edge_palette: tuple[float, float, float]
    a_i: float
    deg_gamma: tuple[float, float, float]
    max_cycle_increment: int
    retries: int
    selected: int = 0
    colored: int = 0

    def row(self) -> list:
        return [
            self.round,
            self.residual_edges,
            *(round(x, 6) for x in self.vertex_palette),
            round(self.d_i, 6),
            *(round(x, 6) for x in self.edge_palette),
            round(self.a_i, 6),
            self.max_cycle_increment,
            self.retries,
        ]


CSV_HEADER = [
    "round",
    "residual_edges",
    "A_u_min",
    "A_u_mean",
    "A_u_max",
    "d_i",
    "A_e_min",
    "A_e_mean",
    "A_e_max",
    "a_i",
    "max_delta_C",
    "retries",
]


class NibbleState:
    """Mutable state of one nibble run on a graph with maximum degree ``delta``."""

    def __init__(self, g: Graph, refs: Sequence[Sequence[Edge]], cycle_len: float):
        self.n = g.n
        self.delta = g.max_degree
        self.edges = np.array(g.edges(), dtype=np.int64).reshape(-1, 2)
        self.round = 0
        self.color = np.full(len(self.edges), -1, dtype=np.int64)
        # A_i(u): colors not used at u
        self.vertex_palette = np.ones((self.n, self.delta), dtype=bool)
        # A_i(e), maintained by the edge update rule only
        self.edge_palette = np.ones((len(self.edges), self.delta), dtype=bool)
        self.tracker = ShortCycleTracker(self.n, self.delta + 1, refs, cycle_len)
        self.tentative: dict[Edge, int] = {}
        self.stats: list[RoundStats] = []

    @property
    def cycle_count(self) -> np.ndarray:
        return self.tracker.count

    def residual_index(self) -> np.ndarray:
        return np.flatnonzero(self.color < 0)

    def residual_graph(self) -> Graph:
        idx = self.residual_index()
        return Graph(self.n, self.edges[idx].tolist())

    def residual_max_degree(self) -> int:
        idx = self.residual_index()
        if idx.size == 0:
            return 0
        return int(np.bincount(self.edges[idx].ravel(), minlength=self.n).max())

    def final_color(self) -> dict[Edge, int]:
        idx = np.flatnonzero(self.color >= 0)
        return {(int(self.edges[i, 0]), int(self.edges[i, 1])): int(self.color[i]) for i in idx}

    def palette_identity_holds(self) -> bool:
        """A_i(uv) == A_i(u) & A_i(v) on every uncolored edge."""
        idx = self.residual_index()
        u, v = self.edges[idx, 0], self.edges[idx, 1]
        return bool(np.array_equal(self.edge_palette[idx], self.vertex_palette[u] & self.vertex_palette[v]))

    def is_proper(self) -> bool:
        idx = np.flatnonzero(self.color >= 0)
        c = self.color[idx]
        if c.size and (c.min() < 0 or c.max() >= self.delta):
            return False
        keys = np.concatenate([self.edges[idx, 0] * self.delta + c, self.edges[idx, 1] * self.delta + c])
        return np.unique(keys).size == keys.size

    def snapshot_stats(self, schedule: NibbleSchedule, max_inc: int = 0, retries: int = 0,
                       selected: int = 0, colored: int = 0) -> RoundStats:
        i = self.round
        idx = self.residual_index()
        pal_u = self.vertex_palette.sum(axis=1)
        a_e = self.edge_palette[idx].sum(axis=1) if idx.size else np.zeros(1)
        if idx.size and self.delta:
            u, v = self.edges[idx, 0], self.edges[idx, 1]
            adj = sp.csr_matrix(
                (np.ones(2 * idx.size, dtype=np.int32), (np.concatenate([u, v]), np.concatenate([v, u]))),
                shape=(self.n, self.n),
            )
            counts = np.asarray(adj @ self.vertex_palette.astype(np.int32))
            masked = counts[self.vertex_palette]
        else:
            masked = np.zeros(1)
        if masked.size == 0:
            masked = np.zeros(1)
        d_i = schedule.d_seq[min(i, schedule.t_eps)]
        a_i = schedule.a_seq[min(i, schedule.t_eps)]
        return RoundStats(
            i,
            int(idx.size),
            (float(pal_u.min()) if self.n else 0.0, float(pal_u.mean()) if self.n else 0.0, float(pal_u.max()) if self.n else 0.0),
            d_i,
            (float(a_e.min()), float(a_e.mean()), float(a_e.max())),
            a_i,
            (float(masked.min()), float(masked.mean()), float(masked.max())),
            max_inc,
            retries,
            selected,
            colored,
        )


@dataclass
class _Draw:
    selected: np.ndarray
    tentative: np.ndarray
    winners: np.ndarray
    colors: np.ndarray
    backup: tuple | None = None


def _draw_round(state: NibbleState, epsilon: float, rng: np.random.Generator, rounding: str) -> _Draw:
    res = state.residual_index()
    empty = np.zeros(0, dtype=np.int64)
    if res.size == 0 or state.delta == 0:
        return _Draw(empty, empty, empty, empty)
    n, delta = state.n, state.delta
    eu, ev = state.edges[res, 0], state.edges[res, 1]

    # select: each vertex marks about eps/2 * deg of its uncolored edges
    inc_v = np.concatenate([eu, ev])
    inc_e = np.concatenate([np.arange(res.size), np.arange(res.size)])
    deg = np.bincount(inc_v, minlength=n)
    share = epsilon / 2 * deg
    if rounding == "ceil":
        quota = np.ceil(share - 1e-9).astype(np.int64)
    else:
        # unbiased: every incident edge is marked with probability exactly eps/2
        base = np.floor(share)
        quota = (base + (rng.random(n) < share - base)).astype(np.int64)
    keys = rng.random(inc_v.size)
    order = np.lexsort((keys, inc_v))
    starts = np.concatenate([[0], np.cumsum(deg)[:-1]])
    sv = inc_v[order]
    rank = np.arange(order.size) - starts[sv]
    marked = order[rank < quota[sv]]
    is_sel = np.zeros(res.size, dtype=bool)
    is_sel[inc_e[marked]] = True
    sel = np.flatnonzero(is_sel)

    # tentative color, uniform over the edge palette; empty palettes sit out
    pal = state.edge_palette[res[sel]]
    scores = rng.random(pal.shape, dtype=np.float32)
    scores[~pal] = -1.0
    tc = scores.argmax(axis=1)
    has = pal.any(axis=1)
    sel, tc = sel[has], tc[has]

    # conflicts: an adjacent edge with the same tentative color
    ku = eu[sel] * delta + tc
    kv = ev[sel] * delta + tc
    cnt = np.bincount(np.concatenate([ku, kv]), minlength=n * delta)
    win = (cnt[ku] == 1) & (cnt[kv] == 1)
    return _Draw(res[sel], tc, res[sel[win]], tc[win])


def nibble_round(state: NibbleState, schedule: NibbleSchedule, seed: int | None = 0,
                 attempt: int = 0, rounding: str = "stochastic") -> tuple[NibbleState, _Draw]:
    """One unchecked round: select, draw, resolve conflicts, update.

    The short-cycle tracker journals its changes; callers decide whether to
    ``commit`` or ``rollback``.
    """
    rng = stream(seed, "nibble", state.round, attempt)
    if rounding not in ("stochastic", "ceil"):
        raise ParameterError(f"unknown selection rounding {rounding!r}")
    draw = _draw_round(state, schedule.epsilon, rng, rounding)
    _apply(state, draw)
    return state, draw


def _apply(state: NibbleState, draw: _Draw) -> None:
    state.tracker.begin()
    draw.backup = (state.vertex_palette.copy(), state.edge_palette.copy(), state.tentative)
    w, c = draw.winners, draw.colors
    state.tentative = {
        (int(state.edges[i, 0]), int(state.edges[i, 1])): int(t)
        for i, t in zip(draw.selected.tolist(), draw.tentative.tolist())
    }
    if w.size:
        state.color[w] = c
        u, v = state.edges[w, 0], state.edges[w, 1]
        state.vertex_palette[u, c] = False
        state.vertex_palette[v, c] = False
        # A_{i+1}(e) = A_i(e) minus final colors of edges incident to e
        lost = np.zeros((state.n, state.delta), dtype=bool)
        lost[u, c] = True
        lost[v, c] = True
        res = state.residual_index()
        ru, rv = state.edges[res, 0], state.edges[res, 1]
        state.edge_palette[res] &= ~(lost[ru] | lost[rv])
        for a, b, col in zip(u.tolist(), v.tolist(), c.tolist()):
            state.tracker.add(col, a, b)
    state.round += 1


def _undo(state: NibbleState, draw: _Draw) -> None:
    state.tracker.rollback()
    state.color[draw.winners] = -1
    state.round -= 1
    state.vertex_palette, state.edge_palette, state.tentative = draw.backup


@dataclass
class NibbleConfig:
    seed: int | None = 0
    retries: int = 5
    palette_tol: float = 0.25
    beta: float = 1 / 20
    B: float = 20.0
    cycle_len: float | None = None
    cycle_cap: float | None = None
    K: float = 1.0
    rounding: str = "stochastic"
    check_invariants: bool = False


@dataclass
class NibbleOutcome:
    matchings: list[list[Edge]]
    residual: Graph
    stats: list[RoundStats]
    retries_used: int
    schedule: NibbleSchedule
    max_cycle_count: int
    residual_max_degree: int
    report: dict = field(default_factory=dict)


def _validate_refs(n: int, refs: Sequence[Sequence[Edge]], ncolors: int) -> list[list[Edge]]:
    if len(refs) != ncolors:
        raise ContractError(f"need exactly {ncolors} reference matchings, got {len(refs)}")
    out = []
    for k, m in enumerate(refs):
        seen: set[int] = set()
        cleaned = []
        for u, v in m:
            u, v = int(u), int(v)
            if u == v or not (0 <= u < n and 0 <= v < n) or u in seen or v in seen:
                raise ContractError(f"reference {k} is not a matching on 0..{n - 1}")
            seen.update((u, v))
            cleaned.append(canon(u, v))
        out.append(cleaned)
    return out


def nibble_run(g: Graph, epsilon: float, refs: Sequence[Sequence[Edge]] | None = None,
               config: NibbleConfig | None = None) -> NibbleOutcome:
    """Run all rounds of the schedule with per-round check-and-retry.

    After each round the mean vertex palette must lie within
    ``palette_tol * d_i`` of ``d_i``, the coloring must be proper and no
    vertex may gain more than ``cycle_cap`` short cycles. A failing round is
    redrawn with fresh randomness while the (run-wide) retry budget lasts.
    """
    cfg = config or NibbleConfig()
    delta = g.max_degree
    if refs is None:
        refs = [[] for _ in range(delta + 1)]
    refs = _validate_refs(g.n, refs, delta + 1)
    if delta == 0:
        schedule = make_schedule(1, epsilon, cfg.K)
        return NibbleOutcome([[]], Graph(g.n), [], 0, schedule, 0, 0, {})
    e0 = (delta - g.min_degree) / delta
    schedule = make_schedule(delta, epsilon, cfg.K, e0)
    cycle_len = cfg.cycle_len if cfg.cycle_len is not None else delta ** (cfg.beta / 2)
    cycle_cap = cfg.cycle_cap if cfg.cycle_cap is not None else 1000 * delta**cfg.beta / epsilon**4

    state = NibbleState(g, refs, cycle_len)
    state.stats.append(state.snapshot_stats(schedule))
    retries_used = 0
    for i in range(schedule.t_eps):
        attempt = 0
        while True:
            before = state.cycle_count.copy()
            _, draw = nibble_round(state, schedule, cfg.seed, attempt, cfg.rounding)
            inc = int((state.cycle_count - before).max()) if g.n else 0
            mean_pal = float(state.vertex_palette.sum(axis=1).mean())
            target = schedule.d_seq[i + 1]
            problems = []
            if abs(mean_pal - target) > cfg.palette_tol * target:
                problems.append(f"mean palette {mean_pal:.3f} vs d_{i + 1}={target:.3f}")
            if inc > cycle_cap:
                problems.append(f"cycle increment {inc} > {cycle_cap:.1f}")
            if cfg.check_invariants:
                if not state.is_proper():
                    raise AssertionError("nibble produced an improper coloring")
                if not state.palette_identity_holds():
                    raise AssertionError("edge palettes drifted from A(u) & A(v)")
            if not problems:
                state.tracker.commit()
                state.stats.append(state.snapshot_stats(schedule, inc, attempt, draw.selected.size, draw.winners.size))
                break
            if retries_used >= cfg.retries:
                state.tracker.commit()
                state.stats.append(state.snapshot_stats(schedule, inc, attempt, draw.selected.size, draw.winners.size))
                raise NibbleFailure(f"round {i + 1}: {'; '.join(problems)} (retry budget exhausted)", state.stats)
            _undo(state, draw)
            retries_used += 1
            attempt += 1

    if not state.is_proper():
        raise AssertionError("nibble produced an improper coloring")
    matchings: list[list[Edge]] = [[] for _ in range(delta + 1)]
    for e, c in sorted(state.final_color().items()):
        matchings[c].append(e)
    residual = state.residual_graph()
    b_exp = 6 / cfg.B + 1 / 20
    report = {
        "epsilon": epsilon,
        "t_eps": schedule.t_eps,
        "residual_max_degree": residual.max_degree,
        "residual_target": epsilon * delta / 2,
        "residual_bound": delta ** (1 - 1 / cfg.B),
        "max_cycle_count": int(state.cycle_count.max()) if g.n else 0,
        "cycle_bound": delta**b_exp,
        "cycle_len": cycle_len,
    }
    return NibbleOutcome(
        matchings,
        residual,
        state.stats,
        retries_used,
        schedule,
        report["max_cycle_count"],
        residual.max_degree,
        report,
    )
