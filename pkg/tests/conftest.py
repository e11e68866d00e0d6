"""Shared fixtures: the FIX7 seven-node citation network used throughout."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import sparse

from citeflow import Membership, PubTime, build_graph

FIX7_NODES = [
    ("1", PubTime(2016, 5)),
    ("2", PubTime(2016, 1)),
    ("3", PubTime(2015, 9)),
    ("4", PubTime(2015, 5)),
    ("5", PubTime(2015, 1)),
    ("6", PubTime(2014, 5)),
    ("7", PubTime(2014, 1)),
]
FIX7_EDGES = [
    ("1", "2"),
    ("1", "3"),
    ("2", "4"),
    ("2", "5"),
    ("3", "5"),
    ("4", "6"),
    ("5", "6"),
    ("5", "7"),
]
# disciplines X = {1, 2, 4}, Y = {3, 5}, Z = {6, 7}
FIX7_MEMBER_ROWS = [
    ("1", "X", 1.0),
    ("2", "X", 1.0),
    ("3", "Y", 1.0),
    ("4", "X", 1.0),
    ("5", "Y", 1.0),
    ("6", "Z", 1.0),
    ("7", "Z", 1.0),
]

NODES_CSV = "id,year,month\n" + "".join(
    f"{nid},{t.year},{t.month}\n" for nid, t in FIX7_NODES
)
EDGES_CSV = "citing,cited\n" + "".join(f"{a},{b}\n" for a, b in FIX7_EDGES)
MEMBERSHIP_CSV = "id,discipline,weight\n" + "".join(
    f"{nid},{d},{w:g}\n" for nid, d, w in FIX7_MEMBER_ROWS
)

# frozen expectations, all dyadic and exact in binary floating point
FIX7_P_ROW1 = (1.0, 0.5, 0.5, 0.25, 0.75, 0.625, 0.375)
FIX7_F = [[4.25, 1.75, 3.0], [0.0, 3.0, 2.0], [0.0, 0.0, 2.0]]
FIX7_F0 = [[3.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]]
FIX7_M1 = [[1.0, 1.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 0.0]]
FIX7_L1_NORMS = (5.0, 3.0, 1.0)
FIX7_SHARES = (5 / 9, 3 / 9, 1 / 9)
FIX7_R_VECTOR = (4.0, 3.0, 3.0, 2.0, 2.0, 1.0, 1.0)
FIX7_LONGEST = 3


@pytest.fixture
def fix7_graph():
    graph, report = build_graph(FIX7_NODES, FIX7_EDGES)
    assert report.edges_kept == 8
    return graph


@pytest.fixture
def fix7_membership(fix7_graph):
    index = fix7_graph.id_index
    labels = ["X", "Y", "Z"]
    pos = {lab: i for i, lab in enumerate(labels)}
    rows = [index[nid] for nid, _, _ in FIX7_MEMBER_ROWS]
    cols = [pos[d] for _, d, _ in FIX7_MEMBER_ROWS]
    data = [w for _, _, w in FIX7_MEMBER_ROWS]
    weights = sparse.coo_matrix(
        (data, (rows, cols)), shape=(fix7_graph.n, 3), dtype=np.float64
    ).tocsr()
    weights.sort_indices()
    return Membership(k=3, labels=tuple(labels), weights=weights)


@pytest.fixture
def fix7_files(tmp_path):
    """FIX7 written out as the three CSV input files."""
    nodes = tmp_path / "nodes.csv"
    edges = tmp_path / "edges.csv"
    membership = tmp_path / "membership.csv"
    nodes.write_text(NODES_CSV, encoding="utf-8")
    edges.write_text(EDGES_CSV, encoding="utf-8")
    membership.write_text(MEMBERSHIP_CSV, encoding="utf-8")
    return nodes, edges, membership
