"""End-to-end linear forest decompositions.

All pipelines share the same skeleton: a balanced vertex partition
V_0..V_{t-1}, matchings between every pair of parts, and a decomposition of
K_t into Hamiltonian paths. Taking one matching per consecutive pair of a
path gives a linear forest. What differs is how the edges inside the parts
(the leave graph) are absorbed.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Sequence

from .color import vizing_color, walecki_paths
from .errors import ContractError, InfeasibleError, LinforestError, NibbleFailure, ParameterError
from .gen import second_eigenvalue
from .graph import (
    Edge,
    ForestDecomposition,
    Graph,
    _linear_forest_violation,
    canon,
    la_lower_bound,
    max_degree_of,
    regularize,
    verify_decomposition,
)
from .nibble import NibbleConfig, nibble_run
from .partition import partition_vertices
from .rfactor import compute_gamma, slice_matchings
from .rng import stream

MODES = ("baseline", "main", "spectral", "vizing")
_LADDER = {"spectral": "main", "main": "baseline", "baseline": "vizing"}


@dataclass
class PipelineConfig:
    mode: str = "main"
    t_override: int | None = None
    seed: int | None = 0
    # partition
    c_window: float = 100.0
    partition_resamples: int = 10_000
    # nibble
    epsilon: float | None = None
    B: float = 20.0
    beta: float = 1 / 20
    nibble_retries: int = 5
    palette_tol: float = 0.25
    rounding: str = "stochastic"
    # cycle breaking
    cycle_len_exponent: float = 1 / 40
    deletion_window_exponent: float = 1 / 40
    degree_loss_cap_coeff: float = 9.0
    degree_loss_cap_exponent: float = 39 / 40
    break_retries: int = 20
    # spectral
    lam: float | None = None
    gamma_coeff: float = 104.0
    # regularizing non-regular inputs
    max_regularized_factor: int = 64
    fallback: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.t_override is not None and (self.t_override < 2 or self.t_override % 2):
            raise ParameterError("t_override must be an even integer >= 2")
        for name in ("cycle_len_exponent", "deletion_window_exponent", "degree_loss_cap_exponent"):
            if not 0 < getattr(self, name) < 1:
                raise ParameterError(f"{name} must lie in (0, 1)")
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise ParameterError("epsilon must lie in (0, 1)")

    def replace(self, **changes) -> "PipelineConfig":
        return PipelineConfig(**{**asdict(self), **changes})


# ---------------------------------------------------------------- choice of t


@dataclass
class TChoice:
    t: int
    formula: float
    clamped: bool


def _even_round(x: float) -> int:
    return 2 * int(math.floor(x / 2 + 0.5))


def choose_t(d: int, mode: str, lam: float | None = None, n: int | None = None,
             B: float = 20.0, gamma_coeff: float = 104.0) -> TChoice:
    """Number of parts for ``mode``: the optimizing formula, rounded to even and clamped.

    The clamp is [2, min(d/100, n)] with both upper limits rounded down to even.
    """
    if d < 2:
        raise ParameterError("choose_t needs d >= 2")
    log_d = math.log(d)
    if mode == "baseline":
        x = (d / log_d) ** (1 / 3)
    elif mode == "main":
        g = min(1 / 40, 1 / B)
        x = (d ** (1 - 2 * g) / log_d) ** (1 / (3 - 2 * g))
    elif mode == "spectral":
        gamma = gamma_coeff * max(lam if lam is not None else 1.0, 1.0)
        x = (d**3 / gamma**2) ** (1 / 5)
    elif mode == "vizing":
        x = 2.0
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    hi = 2 * (d // 200)
    if n is not None:
        hi = min(hi, 2 * (n // 2))
    t = min(_even_round(x), hi)
    t = max(t, 2)
    return TChoice(t, x, t != _even_round(x))


# ------------------------------------------------------------ shared skeleton


@dataclass
class Skeleton:
    t: int
    parts: list[list[int]]
    part_of: list[int]
    paths: list[list[int]]
    pair_edges: dict[tuple[int, int], list[Edge]]
    inside_edges: list[list[Edge]]


def _resolve_t(g: Graph, cfg: PipelineConfig, mode: str, lam: float | None = None) -> TChoice:
    if cfg.t_override is not None:
        return TChoice(cfg.t_override, float(cfg.t_override), False)
    return choose_t(g.max_degree, mode, lam, g.n, cfg.B, cfg.gamma_coeff)


def _skeleton(g: Graph, t: int, cfg: PipelineConfig) -> Skeleton:
    vp = partition_vertices(g, t, cfg.c_window, cfg.seed, cfg.partition_resamples)
    pair_edges: dict[tuple[int, int], list[Edge]] = {}
    inside: list[list[Edge]] = [[] for _ in range(t)]
    for u, v in g.edges():
        a, b = vp.part_of[u], vp.part_of[v]
        if a == b:
            inside[a].append((u, v))
        else:
            pair_edges.setdefault((min(a, b), max(a, b)), []).append((u, v))
    paths = walecki_paths(t).paths
    return Skeleton(t, vp.parts, vp.part_of, paths, pair_edges, inside)


def _pair_layers(g: Graph, sk: Skeleton, s: int) -> tuple[dict[tuple[int, int], list[list[Edge]]], int]:
    """Proper colorings of every bipartite slice, padded to a common length."""
    layers = {}
    used = 0
    for i in range(sk.t):
        for j in range(i + 1, sk.t):
            edges = sk.pair_edges.get((i, j), [])
            coloring = vizing_color(g, edges)
            used = max(used, coloring.palette_size)
            layers[(i, j)] = coloring.classes()
    width = max(s, used)
    for key, cls in layers.items():
        layers[key] = cls + [[] for _ in range(width - len(cls))]
    return layers, used


def _assemble(n: int, sk: Skeleton, layers: dict[tuple[int, int], list[list[Edge]]], width: int) -> list[list[list[Edge]]]:
    """Per path, ``width`` forests; forest k takes matching k of every consecutive pair."""
    out = []
    for p in sk.paths:
        forests = []
        for k in range(width):
            f: list[Edge] = []
            for a, b in zip(p, p[1:]):
                f.extend(layers[(min(a, b), max(a, b))][k])
            bad = _linear_forest_violation(n, f)
            if bad is not None:
                raise AssertionError(f"path forest is not linear ({bad[0]} at {bad[1]})")
            forests.append(f)
        out.append(forests)
    return out


def _slice_layers(g: Graph, sk: Skeleton, r: int, report: dict) -> dict[tuple[int, int], list[list[Edge]]]:
    layers = {}
    for i in range(sk.t):
        for j in range(i + 1, sk.t):
            edges = sk.pair_edges.get((i, j), [])
            try:
                layers[(i, j)] = slice_matchings(sk.parts[i], sk.parts[j], edges, r)
            except InfeasibleError:
                report.setdefault("slice_fallbacks", []).append([i, j])
                layers[(i, j)] = (vizing_color(g, edges).classes() + [[] for _ in range(r)])[:r]
    return layers


# ------------------------------------------------------------------- baseline


def baseline_s(d: int, t: int, c_window: float) -> int:
    return math.floor(d / t + (c_window + 2) * math.sqrt(d * math.log(d) / t))


def decompose_baseline(g: Graph, cfg: PipelineConfig) -> tuple[ForestDecomposition, dict]:
    """Path forests from bipartite colorings, leave graph absorbed by Vizing."""
    _require_regular(g)
    d = g.max_degree
    tc = _resolve_t(g, cfg, "baseline")
    sk = _skeleton(g, tc.t, cfg)
    s = baseline_s(d, tc.t, cfg.c_window)
    layers, s_used = _pair_layers(g, sk, s)
    per_path = _assemble(g.n, sk, layers, s_used)
    leave = [e for part in sk.inside_edges for e in part]
    leave_classes = vizing_color(g, leave).classes()
    forests = [f for fs in per_path for f in fs] + leave_classes
    delta_l = max_degree_of(leave)
    report = {
        "t": tc.t,
        "t_formula": tc.formula,
        "s": s,
        "s_used": s_used,
        "delta_L": delta_l,
        "count_bound": s_used * tc.t // 2 + delta_l + 1,
    }
    return ForestDecomposition(g.n, forests).normalized(), report


# ------------------------------------------------------------ cycle breaking


@dataclass
class CycleBreakResult:
    forests: list[list[Edge]]
    deleted: list[Edge]
    X: dict[int, int]
    cap: float
    attempts: int
    within_cap: bool
    short_cycles: int = 0
    long_cycles: int = 0


def _cycles(edges: Sequence[Edge]) -> list[list[Edge]]:
    """Cycles of a graph with maximum degree <= 2, each as its edge list."""
    adj: dict[int, list[int]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for v, nb in adj.items():
        if len(nb) > 2:
            raise ContractError(f"vertex {v} has degree {len(nb)} > 2")
    seen: set[int] = set()
    out = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    comp.append(y)
                    stack.append(y)
        if len(comp) < 2 or any(len(adj[x]) != 2 for x in comp):
            continue
        cyc = []
        prev, x = None, start
        while True:
            a, b = adj[x]
            nxt = b if a == prev else a
            cyc.append(canon(x, nxt))
            prev, x = x, nxt
            if x == start:
                break
        out.append(cyc)
    return out


def break_cycles(
    candidates: Sequence[Sequence[Edge]],
    markers: Sequence[set[Edge] | frozenset[Edge]],
    delta_p: int,
    t: int,
    cfg: PipelineConfig | None = None,
    seed_key: tuple = (),
    n: int | None = None,
) -> CycleBreakResult:
    """Delete one marked edge from every cycle so each candidate becomes a linear forest.

    Short cycles (length <= t * delta_p**e) lose their smallest marked edge.
    A long cycle loses a uniformly random edge among its first
    ``floor(delta_p**e / 2)`` marked edges in lexicographic order (at least
    one). When some vertex loses more than the configured cap, the long-cycle
    choices are redrawn; after the retry budget the best attempt is kept.
    """
    cfg = cfg or PipelineConfig()
    dp = max(delta_p, 1)
    short_len = t * dp**cfg.cycle_len_exponent
    window = max(1, math.floor(dp**cfg.deletion_window_exponent / 2))
    cap = cfg.degree_loss_cap_coeff * dp**cfg.degree_loss_cap_exponent

    fixed: list[tuple[int, Edge]] = []
    choices: list[tuple[int, list[Edge]]] = []
    n_short = n_long = 0
    for idx, (cand, mark) in enumerate(zip(candidates, markers)):
        for cyc in _cycles(cand):
            marked = sorted(e for e in cyc if e in mark)
            if not marked:
                raise ContractError(f"cycle in candidate {idx} has no marked edge")
            if len(cyc) <= short_len:
                fixed.append((idx, marked[0]))
                n_short += 1
            else:
                choices.append((idx, marked[:window]))
                n_long += 1

    rng = stream(cfg.seed, "break", *seed_key)
    best = None
    attempts = 0
    while True:
        attempts += 1
        picks = fixed + [(idx, opts[int(rng.integers(len(opts)))]) for idx, opts in choices]
        X: dict[int, int] = {}
        for _, (u, v) in picks:
            X[u] = X.get(u, 0) + 1
            X[v] = X.get(v, 0) + 1
        worst = max(X.values(), default=0)
        if best is None or worst < best[0]:
            best = (worst, picks, X)
        if worst <= cap or not choices or attempts > cfg.break_retries:
            break
    worst, picks, X = best
    drop: dict[int, set[Edge]] = {}
    for idx, e in picks:
        drop.setdefault(idx, set()).add(e)
    forests = []
    for idx, cand in enumerate(candidates):
        gone = drop.get(idx, set())
        f = sorted(canon(u, v) for u, v in cand if canon(u, v) not in gone)
        size = n if n is not None else 1 + max((max(e) for e in f), default=0)
        bad = _linear_forest_violation(size, f)
        if bad is not None:
            raise AssertionError(f"forest {idx} still not linear after cycle breaking: {bad}")
        forests.append(f)
    return CycleBreakResult(forests, sorted(e for _, e in picks), X, cap, attempts, worst <= cap, n_short, n_long)


# ----------------------------------------------------------------------- main


def endpoint_pairs(forest: Sequence[Edge], v_end: set[int] | frozenset[int], t: int) -> list[Edge]:
    """Pairs of ``v_end`` joined in the linear forest by a path of exactly 2t - 1 edges."""
    adj: dict[int, list[int]] = {}
    for u, v in forest:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    target = 2 * t - 1
    seen: set[int] = set()
    pairs = []
    for start in sorted(adj):
        if start in seen or len(adj[start]) != 1:
            continue
        order = [start]
        seen.add(start)
        prev, x = None, start
        while True:
            nxt = [y for y in adj[x] if y != prev]
            if not nxt:
                break
            prev, x = x, nxt[0]
            seen.add(x)
            order.append(x)
        hits = [i for i, v in enumerate(order) if v in v_end]
        for a in hits:
            for b in hits:
                if b - a == target:
                    pairs.append(canon(order[a], order[b]))
    used: set[int] = set()
    for u, v in pairs:
        if u in used or v in used:
            raise ContractError("endpoint pairs do not form a matching")
        used.update((u, v))
    return sorted(pairs)


def _default_epsilon(delta_p: int) -> float:
    return min(max(delta_p ** (-1 / 20), 0.05), 0.95) if delta_p > 0 else 0.5


def decompose_main(g: Graph, cfg: PipelineConfig) -> tuple[ForestDecomposition, dict]:
    """Path forests closed up inside the end parts, nibble-colored, then cycle-broken."""
    _require_regular(g)
    d = g.max_degree
    tc = _resolve_t(g, cfg, "main")
    t = tc.t
    sk = _skeleton(g, t, cfg)
    s = baseline_s(d, t, cfg.c_window)
    layers, s_used = _pair_layers(g, sk, s)
    per_path = _assemble(g.n, sk, layers, s_used)

    forests: list[list[Edge]] = []
    leave: list[Edge] = []
    path_reports = []
    for pi, p in enumerate(sk.paths):
        s_p, t_p = p[0], p[-1]
        # close the path forests up inside V_{s_P}
        inner = vizing_color(g, sk.inside_edges[s_p]).classes()
        width = max(s_used, len(inner))
        f_pp = [(per_path[pi][k] if k < s_used else []) + (inner[k] if k < len(inner) else []) for k in range(width)]
        for k, f in enumerate(f_pp):
            bad = _linear_forest_violation(g.n, f)
            if bad is not None:
                raise AssertionError(f"F'' forest {k} of path {pi} is not linear: {bad}")
        v_end = frozenset(sk.parts[t_p])
        ref_pairs = [endpoint_pairs(f, v_end, t) for f in f_pp]

        # nibble on G*_P = G[V_{t_P}] with the endpoint pairs as references
        star, verts = g.induced(sk.parts[t_p])
        pos = {v: i for i, v in enumerate(verts)}
        delta_p = star.max_degree
        refs = [[(pos[u], pos[v]) for u, v in ref_pairs[k]] if k < len(ref_pairs) else [] for k in range(delta_p + 1)]
        eps = cfg.epsilon if cfg.epsilon is not None else _default_epsilon(delta_p)
        ncfg = NibbleConfig(
            seed=stream(cfg.seed, "nibble", pi).integers(2**62).item(),
            retries=cfg.nibble_retries,
            palette_tol=cfg.palette_tol,
            beta=cfg.beta,
            B=cfg.B,
            cycle_len=max(delta_p, 1) ** cfg.cycle_len_exponent,
            rounding=cfg.rounding,
        )
        prep: dict = {"path": pi, "s_P": s_p, "t_P": t_p, "delta_P": delta_p, "epsilon": eps}
        try:
            out = nibble_run(star, eps, refs, ncfg)
            local = out.matchings
            residual = out.residual.edges()
            prep.update(nibble_retries=out.retries_used, residual_max_degree=out.residual_max_degree,
                        nibble_rounds=len(out.stats) - 1, max_cycle_count=out.max_cycle_count)
        except NibbleFailure as exc:
            local = vizing_color(star).classes()
            residual = []
            prep["nibble_failure"] = str(exc)
        m_prime = [[canon(verts[u], verts[v]) for u, v in m] for m in local]
        width = max(len(f_pp), len(m_prime))
        cands = [(f_pp[k] if k < len(f_pp) else []) + (m_prime[k] if k < len(m_prime) else []) for k in range(width)]
        marks = [frozenset(m_prime[k]) if k < len(m_prime) else frozenset() for k in range(width)]
        br = break_cycles(cands, marks, delta_p, t, cfg, (pi,), g.n)
        forests.extend(br.forests)
        leave.extend(canon(verts[u], verts[v]) for u, v in residual)
        leave.extend(br.deleted)
        prep.update(deleted=len(br.deleted), short_cycles=br.short_cycles, long_cycles=br.long_cycles,
                    max_X=max(br.X.values(), default=0), X_cap=br.cap, X_within_cap=br.within_cap,
                    break_attempts=br.attempts)
        path_reports.append(prep)

    forests.extend(vizing_color(g, leave).classes())
    report = {
        "t": t,
        "t_formula": tc.formula,
        "s": s,
        "s_used": s_used,
        "delta_L": max_degree_of(leave),
        "paths": path_reports,
    }
    return ForestDecomposition(g.n, forests).normalized(), report


# ------------------------------------------------------------------- spectral


def decompose_spectral(g: Graph, cfg: PipelineConfig) -> tuple[ForestDecomposition, dict]:
    """r-factor slices between parts; the leave graph goes through the main pipeline."""
    _require_regular(g)
    d = g.max_degree
    if cfg.lam is not None:
        lam, lam_report = cfg.lam, None
    else:
        sr = second_eigenvalue(g, seed=cfg.seed)
        lam, lam_report = sr.lam, {"iterations": sr.iterations, "converged": sr.converged}
    tc = _resolve_t(g, cfg, "spectral", lam)
    t = tc.t
    params = compute_gamma(d, t, lam, cfg.gamma_coeff)
    report: dict = {"t": t, "t_formula": tc.formula, "lam": lam, "r": params.r, "gamma": params.gamma}
    if lam_report:
        report["lam_estimate"] = lam_report
    if not params.feasible:
        raise InfeasibleError(f"gamma={params.gamma:.3f} is not below r/2 with r={params.r}", params)
    sk = _skeleton(g, t, cfg)
    r = params.r
    layers = _slice_layers(g, sk, r, report)
    per_path = _assemble(g.n, sk, layers, r)
    forests = [f for fs in per_path for f in fs]
    covered = {e for f in forests for e in f}
    leave = [e for e in g.edges() if e not in covered]
    delta_l = max_degree_of(leave)
    report["delta_L"] = delta_l
    report["delta_L_bound"] = d - (t - 1) * (r - 1)
    lg = Graph(g.n, leave)
    sub, sub_report = decompose(lg, cfg.replace(mode="main", t_override=None, seed=stream(cfg.seed, "leave").integers(2**62).item()))
    report["leave"] = sub_report
    forests.extend(sub.forests)
    return ForestDecomposition(g.n, forests).normalized(), report


# --------------------------------------------------------------------- vizing


def decompose_vizing(g: Graph, cfg: PipelineConfig | None = None) -> tuple[ForestDecomposition, dict]:
    coloring = vizing_color(g)
    return ForestDecomposition(g.n, coloring.classes()).normalized(), {"palette": coloring.palette_size}


# ----------------------------------------------------------------- dispatcher


_RUNNERS = {
    "baseline": decompose_baseline,
    "main": decompose_main,
    "spectral": decompose_spectral,
    "vizing": decompose_vizing,
}


def _require_regular(g: Graph) -> None:
    if not g.is_regular():
        raise ContractError("pipeline needs a regular graph (regularize first)")


def _restrict(dec: ForestDecomposition, g: Graph) -> ForestDecomposition:
    keep = g.edge_set()
    return ForestDecomposition(g.n, [[e for e in f if e in keep] for f in dec.forests]).normalized()


def decompose(g: Graph, cfg: PipelineConfig | None = None) -> tuple[ForestDecomposition, dict]:
    """Decompose ``g`` into linear forests with the configured method.

    Non-regular inputs are embedded in a regular supergraph first. Failures
    walk the ladder spectral -> main -> baseline -> vizing, and a result with
    more than max_degree + 1 forests is replaced by the Vizing one. The
    output is always verified.
    """
    cfg = cfg or PipelineConfig()
    start = time.perf_counter()
    report: dict = {"method": cfg.mode, "n": g.n, "m": g.m, "max_degree": g.max_degree, "fallbacks": []}
    if g.m == 0:
        dec = ForestDecomposition(g.n, [])
        report.update(used="vizing", count=0)
        return dec, report

    host = g
    if cfg.mode != "vizing" and g.max_degree >= 2 and not g.is_regular():
        try:
            host = regularize(g, cfg.max_regularized_factor * g.n)
        except ParameterError as exc:
            report["fallbacks"].append({"from": cfg.mode, "reason": str(exc)})
            host = None
        report["regularized_n"] = host.n if host is not None else None

    mode = cfg.mode if host is not None and g.max_degree >= 2 else "vizing"
    dec = None
    while dec is None:
        try:
            dec, sub = _RUNNERS[mode](host if mode != "vizing" else g, cfg)
        except LinforestError as exc:
            if not cfg.fallback or mode == "vizing":
                raise
            report["fallbacks"].append({"from": mode, "reason": f"{type(exc).__name__}: {exc}"})
            mode = _LADDER[mode]
            continue
        report[mode] = sub
    if host is not None and host is not g and mode != "vizing":
        dec = _restrict(dec, g)
    report["used"] = mode
    report["assembled_count"] = dec.count

    ceiling = g.max_degree + 1
    if dec.count > ceiling and cfg.fallback:
        report["fallbacks"].append({"from": mode, "reason": f"count {dec.count} above max_degree + 1"})
        dec, sub = decompose_vizing(g)
        report["vizing"] = sub
        report["used"] = "vizing"

    check = verify_decomposition(g, dec)
    if not check.valid:
        raise AssertionError(f"pipeline produced an invalid decomposition: {check.reason} at {check.edge}")
    report["count"] = dec.count
    report["lower_bound"] = la_lower_bound(g)
    report["wall_time"] = round(time.perf_counter() - start, 4)
    return dec, report
