"""Graph edge compression into a single symbol, and its reconstruction."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import fhrr
from .backends import PhaseBackend
from .errors import DimensionError


@dataclass(frozen=True)
class Graph:
    n_nodes: int
    edges: frozenset

    def __post_init__(self):
        canon = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise ValueError(f"edge ({i}, {j}) out of range")
            canon.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(canon))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
        for i, j in self.edges:
            a[i, j] = a[j, i] = True
        return a


@dataclass(frozen=True)
class HDGraphCode:
    node_symbols: np.ndarray  # (n_nodes, d) phases
    edge_symbol: object  # backend handle
    backend_name: str = "phase"


def gen_erdos_renyi(n: int, p: float, seed: fhrr.SeedLike = None) -> Graph:
    if n < 2:
        raise ValueError("need at least two nodes")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability {p} outside [0, 1]")
    rng = fhrr.make_rng(seed)
    pairs = list(combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return Graph(n, frozenset(pr for pr, k in zip(pairs, keep) if k))


def compress_edges(g: Graph, d: int, seed: fhrr.SeedLike = None, backend=None) -> HDGraphCode:
    backend = backend or PhaseBackend()
    if not g.edges:
        raise ValueError("graph has no edges to encode")
    if d < 64:
        raise DimensionError("symbol dimension must be >= 64")
    nodes = fhrr.random_codebook(g.n_nodes, d, seed)
    handles = [backend.encode(s) for s in nodes]
    edges = [backend.bind(handles[i], handles[j]) for i, j in sorted(g.edges)]
    return HDGraphCode(nodes, backend.bundle(edges), backend.name)


def predict_edges(code: HDGraphCode, backend=None) -> np.ndarray:
    """Similarity of every node to the edge symbol unbound by each other node.

    Row i holds similarity(node_j, unbind(G, node_i)); the diagonal is NaN.
    """
    backend = backend or PhaseBackend()
    n = code.node_symbols.shape[0]
    nodes = backend.encode(code.node_symbols)
    a = np.full((n, n), np.nan)
    for i in range(n):
        key = backend.unbind(code.edge_symbol, nodes[i])
        row = backend.similarity(nodes, key[None, :])
        a[i] = row
        a[i, i] = np.nan
    return a


def auroc(scores, labels) -> float:
    """Mann-Whitney AUROC: P(score_pos > score_neg), ties counted half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC needs both positive and negative labels")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size)
    sorted_scores = scores[order]
    # average ranks over tied runs
    _, start, counts = np.unique(sorted_scores, return_index=True, return_counts=True)
    avg = start + (counts + 1) / 2.0
    ranks[order] = np.repeat(avg, counts)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def graph_auroc(g: Graph, adjacency_scores: np.ndarray) -> float:
    off = ~np.eye(g.n_nodes, dtype=bool)
    return auroc(adjacency_scores[off], g.adjacency()[off])
