"""Exact irregularity strength of small graphs by backtracking."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import InfiniteStrength, PreconditionError
from .graph import Graph, has_finite_strength
from .weighting import EdgeWeighting

FOUND, NONE, EXHAUSTED = "found", "none", "exhausted"


@dataclass(frozen=True)
class SearchBudget:
    max_k: int = 12
    node_limit: int = 2_000_000

    def __post_init__(self):
        if self.max_k < 1 or self.node_limit < 1:
            raise PreconditionError("max_k and node_limit must be >= 1")


@dataclass
class SearchResult:
    status: str
    weighting: Optional[EdgeWeighting] = None
    nodes: int = 0


def _edge_order(g: Graph):
    deg = g._degrees
    return sorted(g.edges(), key=lambda e: (-(int(deg[e[0]]) + int(deg[e[1]])), e))


def _distinct_reps_exist(intervals, taken) -> bool:
    # Greedy by right endpoint finds a system of distinct representatives
    # for integer intervals whenever one exists.
    used = set(taken)
    for hi, lo in sorted((hi, lo) for lo, hi in intervals):
        x = lo
        while x in used:
            x += 1
        if x > hi:
            return False
        used.add(x)
    return True


def find_assignment(g: Graph, k: int, budget: SearchBudget = SearchBudget()) -> SearchResult:
    """Search for a weighting into [1, k] with distinct weighted degrees."""
    if not has_finite_strength(g):
        raise InfiniteStrength("graph has an isolated edge or several isolated vertices")
    order = _edge_order(g)
    m = len(order)
    cur = [0] * g.n
    rem = [g.degree(v) for v in range(g.n)]
    finished = {}          # weight -> vertex
    for v in range(g.n):
        if rem[v] == 0:
            finished[0] = v
    vals = [0] * m
    nodes = 0

    def feasible():
        intervals = [(cur[v] + rem[v], cur[v] + rem[v] * k) for v in range(g.n) if rem[v]]
        return _distinct_reps_exist(intervals, finished)

    if not feasible():
        return SearchResult(NONE, nodes=0)

    def rec(i):
        nonlocal nodes
        if i == m:
            return True
        u, v = order[i]
        for x in range(1, k + 1):
            nodes += 1
            if nodes > budget.node_limit:
                raise _Budget
            cur[u] += x
            cur[v] += x
            rem[u] -= 1
            rem[v] -= 1
            added = []
            ok = True
            for z in (u, v):
                if rem[z] == 0:
                    if cur[z] in finished:
                        ok = False
                        break
                    finished[cur[z]] = z
                    added.append(cur[z])
            if ok and feasible():
                vals[i] = x
                if rec(i + 1):
                    return True
            for key in added:
                del finished[key]
            cur[u] -= x
            cur[v] -= x
            rem[u] += 1
            rem[v] += 1
        return False

    try:
        hit = rec(0)
    except _Budget:
        return SearchResult(EXHAUSTED, nodes=nodes)
    if not hit:
        return SearchResult(NONE, nodes=nodes)
    return SearchResult(FOUND, EdgeWeighting(dict(zip(order, vals)), k), nodes)


class _Budget(Exception):
    pass


def exact_strength(g: Graph, budget: SearchBudget = SearchBudget()):
    """Smallest feasible k, math.inf for infinite strength, None if unknown."""
    if not has_finite_strength(g):
        return math.inf
    for k in range(1, budget.max_k + 1):
        res = find_assignment(g, k, budget)
        if res.status == FOUND:
            return k
        if res.status == EXHAUSTED:
            return None
    return None
