"""Scikit-learn style wrapper around the solver."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .engine import SolveConfig, solve
from .errors import DomainMismatch, ParseError
from .graph import Graph
from .params import PAPER


def check_graph(X, n=None) -> Graph:
    """Coerce X into a Graph.

    Accepts a Graph, a networkx graph with integer nodes, an (m, 2) integer
    edge array, or a square 0/1 adjacency matrix.
    """
    if isinstance(X, Graph):
        return X
    if hasattr(X, "nodes") and hasattr(X, "edges"):
        nodes = list(X.nodes())
        if any(not isinstance(v, (int, np.integer)) or v < 0 for v in nodes):
            raise ParseError("networkx graph nodes must be non-negative integers")
        size = max(nodes) + 1 if nodes else 0
        return Graph(size if n is None else n, [(int(u), int(v)) for u, v in X.edges()])
    arr = check_array(X, dtype=np.int64, ensure_2d=True, ensure_min_samples=0)
    if arr.shape[0] == arr.shape[1] and arr.shape[0] != 2 and set(np.unique(arr).tolist()) <= {0, 1}:
        if not np.array_equal(arr, arr.T):
            raise ParseError("adjacency matrix must be symmetric")
        iu, ju = np.nonzero(np.triu(arr, 1))
        return Graph(arr.shape[0], list(zip(iu.tolist(), ju.tolist())))
    if arr.shape[1] != 2:
        raise ParseError(f"edge array must have two columns, got {arr.shape[1]}")
    if arr.size and arr.min() < 0:
        raise ParseError("vertex indices must be non-negative")
    size = int(arr.max()) + 1 if arr.size else 0
    return Graph(size if n is None else n, [tuple(r) for r in arr.tolist()])


class IrregularWeighting(BaseEstimator, TransformerMixin):
    """Finds an edge weighting with pairwise distinct weighted degrees.

    fit solves the graph; transform returns the edge weights in sorted edge
    order for the fitted graph.
    """

    def __init__(self, seed=0, max_retries=5, mode=PAPER, overrides=None,
                 fallback_enabled=True, epsilon=0.2, alpha=0.05):
        self.seed = seed
        self.max_retries = max_retries
        self.mode = mode
        self.overrides = overrides
        self.fallback_enabled = fallback_enabled
        self.epsilon = epsilon
        self.alpha = alpha

    def fit(self, X, y=None):
        g = check_graph(X)
        cfg = SolveConfig(seed=self.seed, max_retries=self.max_retries, mode=self.mode,
                          overrides=self.overrides, fallback_enabled=self.fallback_enabled,
                          epsilon=self.epsilon, alpha=self.alpha)
        self.weighting_, self.report_ = solve(g, cfg)
        self.graph_ = g
        self.k_ = self.report_.k_achieved
        return self

    def transform(self, X):
        check_is_fitted(self, "weighting_")
        g = check_graph(X, n=self.graph_.n)
        if g != self.graph_:
            raise DomainMismatch("transform must be called on the fitted graph")
        return self.weighting_.as_array(g)

    def weighted_degrees(self):
        check_is_fitted(self, "weighting_")
        from .weighting import weighted_degrees
        return weighted_degrees(self.graph_, self.weighting_)
