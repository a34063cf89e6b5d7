"""Immutable simple graphs, edge-list I/O and random generators."""
from __future__ import annotations

import io
from typing import Iterable

import networkx as nx
import numpy as np

from .errors import (DuplicateEdge, InfeasibleDegreeSequence, ParseError,
                     PreconditionError, SelfLoop)


class Graph:
    """Simple undirected graph on vertices 0..n-1.

    Adjacency is stored as sorted tuples and edges as (u, v) pairs with u < v
    in ascending order. Instances are never mutated after construction.
    """

    __slots__ = ("n", "adj", "m", "_edges", "_degrees")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 0:
            raise PreconditionError("vertex count must be non-negative")
        nbrs: list[set] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise SelfLoop(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise PreconditionError(f"edge ({u}, {v}) out of range for n={n}")
            if v in nbrs[u]:
                raise DuplicateEdge(f"duplicate edge ({min(u, v)}, {max(u, v)})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.n = n
        self.adj = tuple(tuple(sorted(s)) for s in nbrs)
        self._edges = tuple((u, v) for u in range(n) for v in self.adj[u] if u < v)
        self.m = len(self._edges)
        self._degrees = np.fromiter((len(a) for a in self.adj), dtype=np.int64, count=n)

    def edges(self) -> tuple:
        return self._edges

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees.copy()

    def has_edge(self, u: int, v: int) -> bool:
        a = self.adj[u]
        i = np.searchsorted(a, v) if a else 0
        return i < len(a) and a[i] == v

    def min_degree(self) -> int:
        return int(self._degrees.min()) if self.n else 0

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, self.adj))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def load_edge_list(text) -> Graph:
    """Parse whitespace separated "u v" lines; `#` starts a comment.

    `text` may be a string or a readable text stream. The vertex count is one
    more than the largest index mentioned.
    """
    if not isinstance(text, str):
        text = text.read()
    pairs = []
    seen = set()
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) != 2:
            raise ParseError(f"line {lineno}: expected two vertex indices, got {line!r}")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError:
            raise ParseError(f"line {lineno}: malformed token in {line!r}") from None
        if u < 0 or v < 0:
            raise ParseError(f"line {lineno}: negative vertex index")
        if u == v:
            raise SelfLoop(f"line {lineno}: self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdge(f"line {lineno}: duplicate edge {key}")
        seen.add(key)
        pairs.append(key)
    n = 1 + max((v for e in pairs for v in e), default=-1)
    return Graph(n, pairs)


def dump_edge_list(g: Graph) -> str:
    return "".join(f"{u} {v}\n" for u, v in g.edges())


def generate_random_regular(n: int, d: int, seed: int) -> Graph:
    """Uniform-ish random d-regular graph via the pairing model.

    Delegates to networkx, which pairs stubs, discards loops and repeated
    pairs as they arise and restarts when stuck.
    """
    if d < 0 or d >= n:
        raise InfeasibleDegreeSequence(f"need 0 <= d < n, got n={n}, d={d}")
    if (n * d) % 2:
        raise InfeasibleDegreeSequence(f"n*d = {n * d} is odd")
    if d == 0:
        return Graph(n, [])
    nxg = nx.random_regular_graph(d, n, seed=int(seed) % (2 ** 32))
    return Graph(n, nxg.edges())


def generate_min_degree_graph(n: int, delta: int, density: float, seed: int) -> Graph:
    """Erdos-Renyi sample, then top up every vertex to degree >= delta."""
    if not (0 < density <= 1):
        raise PreconditionError("density must lie in (0, 1]")
    if not (0 <= delta < n):
        raise PreconditionError("need 0 <= delta < n")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < density
    nbrs = [set() for _ in range(n)]
    for u, v in zip(iu[keep].tolist(), ju[keep].tolist()):
        nbrs[u].add(v)
        nbrs[v].add(u)
    for v in range(n):
        while len(nbrs[v]) < delta:
            cand = [u for u in range(n) if u != v and u not in nbrs[v]]
            u = cand[int(rng.integers(len(cand)))]
            nbrs[v].add(u)
            nbrs[u].add(v)
    return Graph(n, [(u, v) for u in range(n) for v in nbrs[u] if u < v])


def degree_stats(g: Graph) -> tuple[int, int, int, int]:
    """(min degree, max degree, isolated vertices, isolated edges)."""
    deg = g._degrees
    if g.n == 0:
        return 0, 0, 0, 0
    iso_v = int((deg == 0).sum())
    iso_e = sum(1 for u, v in g.edges() if deg[u] == 1 and deg[v] == 1)
    return int(deg.min()), int(deg.max()), iso_v, iso_e


def has_finite_strength(g: Graph) -> bool:
    _, _, iso_v, iso_e = degree_stats(g)
    return iso_e == 0 and iso_v <= 1
