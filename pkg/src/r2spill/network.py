"""Net pairwise spillover networks in DOT and GraphML."""

from __future__ import annotations

import io
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import DataError

__all__ = ["SpilloverNetwork", "export_network"]


@dataclass
class SpilloverNetwork:
    nodes: list  # (name, role, net)
    edges: list  # (source, target, weight)
    threshold: float

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph(threshold=self.threshold)
        for name, role, net in self.nodes:
            g.add_node(name, role=role, net=float(net))
        for src, dst, w in self.edges:
            g.add_edge(src, dst, weight=float(w))
        return g

    def to_dot(self, name: str = "npdc", precision: int = 6) -> str:
        fmt = f"{{:.{precision}g}}"
        colors = {"transmitter": "steelblue", "receiver": "gold"}
        lines = [f"digraph {name} {{", f'  graph [threshold="{fmt.format(self.threshold)}"];']
        for node, role, net in self.nodes:
            lines.append(
                f'  "{node}" [role="{role}", net="{fmt.format(net)}", '
                f'style=filled, fillcolor="{colors[role]}"];'
            )
        for src, dst, w in self.edges:
            lines.append(f'  "{src}" -> "{dst}" [weight="{fmt.format(w)}", label="{fmt.format(w)}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_graphml(self) -> str:
        buf = io.BytesIO()
        nx.write_graphml(self.to_networkx(), buf)
        return buf.getvalue().decode("utf-8")


def export_network(npdc, assets, threshold: float = 0.05) -> SpilloverNetwork:
    """Directed net-spillover graph from an NPDC matrix.

    ``npdc[j, i] > 0`` means i is a net transmitter to j; an edge
    ``i -> j`` with that weight is kept when it exceeds ``threshold``.
    Node roles use ``NET_i = sum_j npdc[j, i]`` (transmitter if positive).
    """
    npdc = np.asarray(npdc, dtype=float)
    K = len(assets)
    if npdc.shape != (K, K):
        raise DataError(f"NPDC must be {K}x{K}, got {npdc.shape}")
    scale = max(1.0, np.abs(npdc).max(initial=0.0))
    if np.abs(npdc + npdc.T).max(initial=0.0) > 1e-9 * scale:
        raise DataError("NPDC matrix must be antisymmetric")
    net = npdc.sum(axis=0)
    nodes = [(str(a), "transmitter" if net[i] > 0 else "receiver", float(net[i]))
             for i, a in enumerate(assets)]
    edges = []
    for i in range(K):
        for j in range(K):
            if i != j and npdc[j, i] > threshold:
                edges.append((str(assets[i]), str(assets[j]), float(npdc[j, i])))
    return SpilloverNetwork(nodes, edges, float(threshold))
