import xml.etree.ElementTree as ET

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from r2spill.errors import DataError
from r2spill.network import export_network


def antisym(rng, K, scale=1.0):
    A = scale * rng.standard_normal((K, K))
    return A - A.T


def test_zero_matrix_is_edgeless():
    net = export_network(np.zeros((3, 3)), ["A", "B", "C"])
    assert net.edges == []
    assert [n[1] for n in net.nodes] == ["receiver"] * 3


def test_single_edge_direction():
    npdc = np.zeros((3, 3))
    npdc[2, 1], npdc[1, 2] = 0.10, -0.10  # asset 1 transmits to asset 2
    net = export_network(npdc, ["A", "B", "C"])
    assert net.edges == [("B", "C", 0.10)]
    roles = {n[0]: n[1] for n in net.nodes}
    assert roles["B"] == "transmitter" and roles["C"] == "receiver"


def test_threshold_is_strict():
    npdc = np.array([[0.0, -0.05], [0.05, 0.0]])
    assert export_network(npdc, ["A", "B"], 0.05).edges == []


@given(st.integers(0, 1000), st.integers(2, 8))
def test_zero_threshold_one_edge_per_pair(seed, K):
    npdc = antisym(np.random.default_rng(seed), K)
    net = export_network(npdc, [f"X{k}" for k in range(K)], 0.0)
    assert len(net.edges) == K * (K - 1) // 2
    assert all(w > 0 for *_, w in net.edges)


def test_net_sums_to_zero(rng):
    net = export_network(antisym(rng, 6), list("ABCDEF"))
    assert abs(sum(n[2] for n in net.nodes)) < 1e-12


def test_dot_and_graphml_parse(rng):
    npdc = antisym(rng, 4)
    net = export_network(npdc, ["A", "B", "C", "D"], 0.3)
    dot = net.to_dot()
    assert dot.startswith("digraph npdc {")
    assert dot.count("->") == len(net.edges)
    root = ET.fromstring(net.to_graphml())
    assert root.tag.endswith("graphml")
    g = nx.parse_graphml(net.to_graphml())
    assert g.number_of_edges() == len(net.edges)
    for src, dst, w in net.edges:
        assert g.edges[src, dst]["weight"] == pytest.approx(w)


def test_rejects_non_antisymmetric():
    with pytest.raises(DataError, match="antisymmetric"):
        export_network(np.array([[0.0, 1.0], [1.0, 0.0]]), ["A", "B"])


def test_rejects_wrong_shape():
    with pytest.raises(DataError):
        export_network(np.zeros((2, 2)), ["A", "B", "C"])
