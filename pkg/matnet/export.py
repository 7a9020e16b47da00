"""Ranked edge lists and their export as JSON, Graphviz DOT or CSV."""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import networkx as nx
import numpy as np
import pandas as pd

from matnet import normal
from matnet.errors import DataFormatError, InvalidParameterError
from matnet.reports import SCHEMA_VERSION, atomic_write_text
from matnet.statistics import PairStatistics

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["rank", "i", "j", "node_i", "node_j", "w", "p_value"]
_NODES_PREFIX = "# nodes="


class ExportFormat(str, Enum):
    JSON = "json"
    DOT = "dot"
    CSV = "csv"


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    w: float
    p_value: float
    rank: int


@dataclass(frozen=True)
class EdgeList:
    """Pairs ``i < j`` ordered by p-value; ranks start at 1."""

    entries: List[Edge]
    node_labels: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def top(self, k: Optional[int]) -> "EdgeList":
        if k is None:
            return self
        if k < 1:
            raise InvalidParameterError(f"top-k must be positive, got {k}")
        return EdgeList(self.entries[:k], self.node_labels)

    def label(self, index: int) -> str:
        return self.node_labels[index] if self.node_labels else str(index)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"rank": e.rank, "i": e.i, "j": e.j, "node_i": self.label(e.i), "node_j": self.label(e.j),
             "w": e.w, "p_value": e.p_value}
            for e in self.entries
        ]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def to_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(len(self.node_labels)))
        nx.set_node_attributes(graph, {k: self.label(k) for k in graph.nodes}, "label")
        for e in self.entries:
            graph.add_edge(e.i, e.j, w=e.w, p_value=e.p_value, rank=e.rank)
        return graph


def edge_list(stats: PairStatistics, node_labels: Optional[Sequence[str]] = None) -> EdgeList:
    """Every pair ranked by its two-sided normal p-value (ties: larger ``|W|`` first, then index)."""
    rows, cols = stats.pairs()
    w = stats.w_stat[rows, cols]
    pvals = normal.two_sided_pvalue(w)
    order = np.lexsort((cols, rows, -np.abs(w), pvals))
    entries = [
        Edge(i=int(rows[k]), j=int(cols[k]), w=float(w[k]), p_value=float(pvals[k]), rank=r + 1)
        for r, k in enumerate(order)
    ]
    labels = list(node_labels) if node_labels is not None else [str(k) for k in range(stats.p)]
    return EdgeList(entries, labels)


def network_summary(edges: EdgeList) -> Dict[str, object]:
    graph = edges.to_graph()
    degrees = dict(graph.degree())
    hubs = sorted(degrees, key=lambda k: (-degrees[k], k))[:5]
    return {
        "n_nodes": graph.number_of_nodes(),
        "n_edges": graph.number_of_edges(),
        "density": nx.density(graph) if graph.number_of_nodes() > 1 else 0.0,
        "hubs": [{"node": edges.label(k), "degree": degrees[k]} for k in hubs if degrees[k] > 0],
    }


def _to_json(edges: EdgeList) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "nodes": edges.node_labels,
        "edges": [
            {"rank": e.rank, "i": e.i, "j": e.j, "source": edges.label(e.i), "target": edges.label(e.j),
             "w": e.w, "p_value": e.p_value}
            for e in edges.entries
        ],
        "graph": nx.node_link_data(edges.to_graph(), edges="links"),
    }
    return json.dumps(doc, indent=2) + "\n"


def _quote(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _to_dot(edges: EdgeList) -> str:
    graph = edges.to_graph()
    lines = ["graph matnet {"]
    for node, data in graph.nodes(data=True):
        lines.append(f"  {node} [label={_quote(data['label'])}];")
    for u, v, data in sorted(graph.edges(data=True), key=lambda e: e[2]["rank"]):
        lines.append(f"  {u} -- {v} [p_value={data['p_value']!r}, w={data['w']!r}, rank={data['rank']}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _to_csv(edges: EdgeList) -> str:
    buf = io.StringIO()
    buf.write(_NODES_PREFIX + json.dumps(edges.node_labels) + "\n")
    edges.to_frame().to_csv(buf, index=False)
    return buf.getvalue()


_WRITERS = {ExportFormat.JSON: _to_json, ExportFormat.DOT: _to_dot, ExportFormat.CSV: _to_csv}


def export_network(edges: EdgeList, fmt, path, top_k: Optional[int] = None) -> Path:
    """Write ``edges`` (optionally the ``top_k`` most significant) to ``path``."""
    try:
        fmt = ExportFormat(fmt)
    except ValueError:
        raise InvalidParameterError(f"unknown export format {fmt!r}; use json, dot or csv") from None
    chosen = edges.top(top_k)
    out = atomic_write_text(Path(path), _WRITERS[fmt](chosen))
    logger.info("[export] %d edges as %s to %s", len(chosen), fmt.value, out)
    return out


def read_edge_csv(path) -> EdgeList:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith(_NODES_PREFIX):
            raise DataFormatError(f"{path.name} is not an edge-list CSV (missing node header)")
        labels = json.loads(first[len(_NODES_PREFIX):])
        frame = pd.read_csv(fh, float_precision="round_trip")
    entries = [
        Edge(i=int(r.i), j=int(r.j), w=float(r.w), p_value=float(r.p_value), rank=int(r.rank))
        for r in frame.itertuples(index=False)
    ]
    return EdgeList(entries, labels)
