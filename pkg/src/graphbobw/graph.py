"""Directed feedback graphs over arms ``1..K``.

An edge ``(i, j)`` means that pulling arm ``i`` reveals the reward of arm ``j``.
Graphs are immutable; neighbourhoods are precomputed at construction so the
per-round hot paths in the policies only do tuple lookups.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

FAMILIES = ("bandit", "clique_loops", "bar", "bar_augmented", "loopless_cycle", "random_observable")


class GraphError(ValueError):
    """Malformed graph input (bad arm index, bad family parameters, bad file)."""


class UnobservableGraphError(GraphError):
    """Some arm has no in-neighbour, so no dominating set exists."""

    def __init__(self, arms):
        self.arms = sorted(arms)
        super().__init__(f"arm {self.arms[0]} has no in-neighbour (unobservable arms: {self.arms})")


@dataclass(frozen=True)
class FeedbackGraph:
    K: int
    edges: frozenset
    _out: tuple = field(init=False, repr=False, compare=False)
    _in: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.K, (int, np.integer)) or self.K < 1:
            raise GraphError(f"K must be a positive integer, got {self.K!r}")
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        for i, j in edges:
            if not (1 <= i <= self.K and 1 <= j <= self.K):
                raise GraphError(f"edge ({i}, {j}) has an endpoint outside 1..{self.K}")
        out = [[] for _ in range(self.K + 1)]
        inn = [[] for _ in range(self.K + 1)]
        for i, j in sorted(edges):
            out[i].append(j)
            inn[j].append(i)
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "edges", edges)
        # index 0 is a dummy so arm labels index directly
        object.__setattr__(self, "_out", tuple(tuple(x) for x in out))
        object.__setattr__(self, "_in", tuple(tuple(x) for x in inn))

    def _check(self, i):
        if not 1 <= i <= self.K:
            raise GraphError(f"arm {i} outside 1..{self.K}")

    def out_neighbors(self, i: int) -> frozenset:
        self._check(i)
        return frozenset(self._out[i])

    def in_neighbors(self, i: int) -> frozenset:
        self._check(i)
        return frozenset(self._in[i])

    @property
    def out_lists(self) -> tuple:
        """Sorted out-neighbour tuples indexed by arm label (entry 0 unused)."""
        return self._out

    @property
    def in_lists(self) -> tuple:
        return self._in

    def to_dict(self) -> dict:
        return {"K": self.K, "edges": [list(e) for e in sorted(self.edges)]}


@dataclass(frozen=True)
class DominatingSet:
    members: tuple

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        if len(set(members)) != len(members):
            raise GraphError(f"dominating set has repeated arms: {list(members)}")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, arm):
        return arm in self.members

    def covers(self, g: FeedbackGraph) -> bool:
        covered = set()
        for j in self.members:
            if not 1 <= j <= g.K:
                return False
            covered.update(g.out_lists[j])
        return len(covered) == g.K


def out_neighbors(g: FeedbackGraph, i: int) -> frozenset:
    return g.out_neighbors(i)


def in_neighbors(g: FeedbackGraph, i: int) -> frozenset:
    return g.in_neighbors(i)


def unobservable_arms(g: FeedbackGraph) -> list:
    return [i for i in range(1, g.K + 1) if not g.in_lists[i]]


def is_observable(g: FeedbackGraph) -> bool:
    return not unobservable_arms(g)


def greedy_dominating_set(g: FeedbackGraph) -> DominatingSet:
    """Greedy set cover over out-neighbourhoods.

    Each step takes the arm whose out-neighbourhood covers the most still
    uncovered arms; ties go to the smallest label. Gives a ``ln K``
    approximation of the minimum dominating set.
    """
    missing = unobservable_arms(g)
    if missing:
        raise UnobservableGraphError(missing)
    uncovered = set(range(1, g.K + 1))
    chosen = []
    while uncovered:
        best, best_gain = None, 0
        for j in range(1, g.K + 1):
            gain = sum(1 for x in g.out_lists[j] if x in uncovered)
            if gain > best_gain:
                best, best_gain = j, gain
        chosen.append(best)
        uncovered.difference_update(g.out_lists[best])
    return DominatingSet(tuple(chosen))


def validate_dominating_set(g: FeedbackGraph, dom: DominatingSet | Iterable[int]) -> DominatingSet:
    if not isinstance(dom, DominatingSet):
        dom = DominatingSet(tuple(dom))
    if len(dom) == 0 or not dom.covers(g):
        raise GraphError(f"{list(dom.members)} is not a dominating set of the graph")
    return dom


def make_graph(family: str, K: int, edge_prob: float | None = None, seed: int | None = None) -> FeedbackGraph:
    if family not in FAMILIES:
        raise GraphError(f"unknown graph family {family!r}; expected one of {FAMILIES}")
    if K < 2:
        raise GraphError(f"K must be at least 2, got {K}")
    arms = range(1, K + 1)
    if family == "bandit":
        edges = {(i, i) for i in arms}
    elif family == "clique_loops":
        edges = {(i, j) for i in arms for j in arms}
    elif family == "bar":
        if K % 2:
            raise GraphError(f"bar graph needs an even K, got {K}")
        edges = _bar_edges(K)
    elif family == "bar_augmented":
        # bar pairs; an odd last arm is tied both ways to arm 1
        edges = _bar_edges(K - K % 2)
        if K % 2:
            edges |= {(K, 1), (1, K)}
    elif family == "loopless_cycle":
        edges = {(i, i % K + 1) for i in arms}
    else:
        if seed is None:
            raise GraphError("random_observable needs a seed")
        if edge_prob is None or not 0.0 < edge_prob <= 1.0:
            raise GraphError(f"random_observable needs edge_prob in (0, 1], got {edge_prob!r}")
        edges = _random_observable_edges(K, edge_prob, seed)
    return FeedbackGraph(K, frozenset(edges))


def _bar_edges(K):
    edges = set()
    for i in range(1, K + 1, 2):
        edges |= {(i, i + 1), (i + 1, i)}
    return edges


def _random_observable_edges(K, edge_prob, seed):
    rng = np.random.default_rng(seed)
    draws = rng.random((K, K))
    edges = {(i + 1, j + 1) for i in range(K) for j in range(K) if i != j and draws[i, j] < edge_prob}
    has_in = {j for _, j in edges}
    for j in range(1, K + 1):
        if j not in has_in:
            others = [i for i in range(1, K + 1) if i != j]
            edges.add((int(others[rng.integers(len(others))]), j))
    return edges


def graph_from_dict(data: dict) -> FeedbackGraph:
    if not isinstance(data, dict) or set(data) != {"K", "edges"}:
        raise GraphError('graph JSON must be an object with exactly the keys "K" and "edges"')
    K = data["K"]
    if not isinstance(K, int) or isinstance(K, bool) or K < 1:
        raise GraphError(f'"K" must be a positive integer, got {K!r}')
    seen = set()
    for e in data["edges"]:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in e)):
            raise GraphError(f"edge {e!r} is not a pair of integers")
        pair = (e[0], e[1])
        if pair in seen:
            raise GraphError(f"duplicate edge {list(pair)}")
        seen.add(pair)
    return FeedbackGraph(K, frozenset(seen))


def load_graph(path) -> FeedbackGraph:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return graph_from_dict(data)


def save_graph(g: FeedbackGraph, path) -> None:
    Path(path).write_text(json.dumps(g.to_dict()) + "\n")
