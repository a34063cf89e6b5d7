import networkx as nx
import numpy as np
import pytest
from sklearn.base import clone

from irregular_strength.errors import DomainMismatch, ParseError
from irregular_strength.estimator import IrregularWeighting, check_graph
from irregular_strength.graph import Graph


def test_check_graph_inputs():
    ref = Graph(3, [(0, 1), (1, 2)])
    assert check_graph(np.array([[0, 1], [1, 2]])) == ref
    assert check_graph(nx.path_graph(3)) == ref
    assert check_graph(np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])) == ref
    assert check_graph(ref) is ref


def test_check_graph_rejects():
    with pytest.raises(ParseError):
        check_graph(np.array([[0, 1, 2]]))
    with pytest.raises(ParseError):
        check_graph(np.array([[0, 1, 0], [0, 0, 1], [0, 1, 0]]))


def test_fit_transform():
    est = IrregularWeighting(seed=1)
    w = est.fit_transform(nx.complete_graph(4))
    assert est.report_.valid
    degs = est.weighted_degrees()
    assert len(set(degs.tolist())) == 4
    assert w.max() == est.k_


def test_params_roundtrip():
    est = IrregularWeighting(seed=3, max_retries=2)
    assert est.get_params()["max_retries"] == 2
    assert clone(est).get_params() == est.get_params()


def test_transform_other_graph():
    est = IrregularWeighting().fit(nx.complete_graph(4))
    with pytest.raises(DomainMismatch):
        est.transform(nx.cycle_graph(4))
