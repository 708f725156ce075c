"""Moser-Tardos resampling for variable-based bad events."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import ParameterError, ResampleBudgetExceeded

Sampler = Callable[[np.random.Generator], Any]


class VariableSpace:
    """Mutually independent random variables, each with its own sampler."""

    def __init__(self, samplers: Sequence[Sampler], rng: np.random.Generator):
        self.samplers = list(samplers)
        self.rng = rng
        self.values = [s(rng) for s in self.samplers]

    def __len__(self) -> int:
        return len(self.samplers)

    def resample(self, j: int) -> None:
        self.values[j] = self.samplers[j](self.rng)


@dataclass
class Event:
    """A bad event: the variables it reads and a predicate that is True when violated."""

    deps: tuple[int, ...]
    violated: Callable[[list], bool]


@dataclass
class ResampleLog:
    total_resamples: int = 0
    per_event_resamples: list[int] = field(default_factory=list)
    terminated: bool = False


def dependency_degree(events: Sequence[Event]) -> int:
    """Maximum number of other events sharing a variable with one event."""
    by_var: dict[int, set[int]] = {}
    for i, ev in enumerate(events):
        for j in ev.deps:
            by_var.setdefault(j, set()).add(i)
    best = 0
    for i, ev in enumerate(events):
        nbrs = set()
        for j in ev.deps:
            nbrs |= by_var[j]
        nbrs.discard(i)
        best = max(best, len(nbrs))
    return best


def resample_until_good(
    space: VariableSpace, events: Sequence[Event], max_resamples: int
) -> tuple[list, ResampleLog]:
    """Resample the lowest-index violated event until none is violated.

    Only events that share a variable with a resampled event are
    re-evaluated, so each step costs time proportional to its neighbourhood.
    Raises ``ResampleBudgetExceeded`` (carrying the log) when the budget runs out.
    """
    if max_resamples < 1:
        raise ParameterError("max_resamples must be >= 1")
    for i, ev in enumerate(events):
        if not ev.deps:
            raise ParameterError(f"event {i} has an empty dependency set")
    log = ResampleLog(per_event_resamples=[0] * len(events))
    by_var: dict[int, list[int]] = {}
    for i, ev in enumerate(events):
        for j in ev.deps:
            by_var.setdefault(j, []).append(i)

    values = space.values
    bad = [bool(ev.violated(values)) for ev in events]
    heap = [i for i, b in enumerate(bad) if b]
    heapq.heapify(heap)
    while heap:
        i = heap[0]
        if not bad[i]:
            heapq.heappop(heap)
            continue
        if log.total_resamples >= max_resamples:
            raise ResampleBudgetExceeded(
                f"no good assignment after {max_resamples} resamples", log
            )
        log.total_resamples += 1
        log.per_event_resamples[i] += 1
        touched: set[int] = set()
        for j in events[i].deps:
            space.resample(j)
            touched.update(by_var[j])
        for k in touched:
            now = bool(events[k].violated(values))
            if now and not bad[k]:
                heapq.heappush(heap, k)
            bad[k] = now
    log.terminated = True
    return list(values), log
