"""Edge weightings, weighted degrees, verification and counting lower bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainMismatch, ParseError
from .graph import Graph, degree_stats


class EdgeWeighting:
    """Map from edges (u, v), u < v, to integer weights.

    `k` is the declared maximum weight. Intermediate weightings produced
    inside the pipeline may carry k=None and weights outside [1, k].
    """

    def __init__(self, weights: dict, k: Optional[int] = None):
        self.weights = {(min(u, v), max(u, v)): int(w) for (u, v), w in weights.items()}
        self.k = k

    @classmethod
    def from_array(cls, g: Graph, arr, k=None) -> "EdgeWeighting":
        return cls({e: int(w) for e, w in zip(g.edges(), arr)}, k)

    def as_array(self, g: Graph) -> np.ndarray:
        _check_domain(g, self)
        return np.array([self.weights[e] for e in g.edges()], dtype=np.int64)

    def max_weight(self) -> int:
        return max(self.weights.values(), default=0)

    def __getitem__(self, e):
        u, v = e
        return self.weights[(min(u, v), max(u, v))]

    def __eq__(self, other):
        return isinstance(other, EdgeWeighting) and self.weights == other.weights and self.k == other.k

    def __repr__(self):
        return f"EdgeWeighting(m={len(self.weights)}, k={self.k})"


def _check_domain(g: Graph, w: EdgeWeighting):
    if len(w.weights) != g.m or any(e not in w.weights for e in g.edges()):
        extra = sorted(set(w.weights) - set(g.edges()))
        missing = sorted(set(g.edges()) - set(w.weights))
        raise DomainMismatch(f"weighting domain differs from edge set "
                             f"(missing={missing[:3]}, extra={extra[:3]})")


def weighted_degrees(g: Graph, w: EdgeWeighting) -> np.ndarray:
    """Per-vertex sums of incident weights as an int64 vector."""
    _check_domain(g, w)
    out = [0] * g.n
    for (u, v) in g.edges():
        x = w.weights[(u, v)]
        out[u] += x
        out[v] += x
    return np.array(out, dtype=np.int64)


def degrees_from_array(g: Graph, arr) -> np.ndarray:
    e = np.asarray(g.edges(), dtype=np.int64).reshape(-1, 2)
    arr = np.asarray(arr, dtype=np.int64)
    return np.bincount(e[:, 0], weights=arr, minlength=g.n).astype(np.int64) + \
        np.bincount(e[:, 1], weights=arr, minlength=g.n).astype(np.int64)


@dataclass(frozen=True)
class VerificationResult:
    valid: bool
    reason: str = ""
    edge: Optional[tuple] = None
    vertices: Optional[tuple] = None

    def __bool__(self):
        return self.valid


def verify_irregular(g: Graph, w: EdgeWeighting) -> VerificationResult:
    """Check weights lie in [1, k] and weighted degrees are pairwise distinct."""
    try:
        _check_domain(g, w)
    except DomainMismatch as exc:
        return VerificationResult(False, str(exc))
    k = w.k
    for e in g.edges():
        x = w.weights[e]
        if x < 1 or (k is not None and x > k):
            return VerificationResult(False, f"weight {x} on edge {e} outside [1, {k}]", edge=e)
    wd = weighted_degrees(g, w)
    first = {}
    for v in range(g.n):
        x = int(wd[v])
        if x in first:
            u = first[x]
            return VerificationResult(False, f"vertices {u} and {v} both weigh {x}", vertices=(u, v))
        first[x] = v
    return VerificationResult(True)


def counting_bound(g: Graph):
    """Degree-class counting bound, valid for every graph.

    Vertices of degree in [delta, t] get weighted degrees in [delta, t*k],
    so t*k - delta + 1 >= N[delta, t]. A lone isolated vertex is ignored
    since its weight 0 is unique anyway.
    """
    _, _, iso_v, iso_e = degree_stats(g)
    if iso_e or iso_v >= 2:
        return math.inf
    deg = g._degrees[g._degrees > 0]
    if deg.size == 0:
        return 1
    dmin = int(deg.min())
    best = 1
    counts = np.bincount(deg)
    cum = np.cumsum(counts)
    for t in range(dmin, int(deg.max()) + 1):
        if counts[t] == 0:
            continue
        best = max(best, -(-(int(cum[t]) + dmin - 1) // t))
    return best


def lower_bound(g: Graph):
    """Lower bound on the irregularity strength.

    d-regular graphs with d >= 2 use ceil((n + d + 1) / d); every other
    graph falls back to `counting_bound`.
    """
    dmin, dmax, iso_v, iso_e = degree_stats(g)
    if iso_e or iso_v >= 2:
        return math.inf
    if g.n and dmin == dmax and dmin >= 2:
        d = dmin
        return -(-(g.n + d + 1) // d)
    return counting_bound(g)


def dump_weighting(g: Graph, w: EdgeWeighting) -> str:
    k = w.k if w.k is not None else w.max_weight()
    lines = [f"k={k}\n"]
    lines += [f"{u} {v} {w.weights[(u, v)]}\n" for u, v in sorted(w.weights)]
    return "".join(lines)


def load_weighting(text) -> EdgeWeighting:
    if not isinstance(text, str):
        text = text.read()
    k = None
    weights = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("k="):
            try:
                k = int(line[2:])
            except ValueError:
                raise ParseError(f"line {lineno}: bad header {line!r}") from None
            continue
        toks = line.split()
        if len(toks) != 3:
            raise ParseError(f"line {lineno}: expected 'u v w', got {line!r}")
        try:
            u, v, x = map(int, toks)
        except ValueError:
            raise ParseError(f"line {lineno}: malformed token in {line!r}") from None
        weights[(min(u, v), max(u, v))] = x
    return EdgeWeighting(weights, k)
