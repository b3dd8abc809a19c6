"""Social graphs: degree-bin connectivity features, graph similarity and the
edge-overlap sampler used to derive two views from one graph."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

DEFAULT_LENGTH = 70
DEFAULT_BIN_SIZE = 15


@dataclass(frozen=True)
class SocialGraph:
    nodes: frozenset[str]
    adjacency: Mapping[str, frozenset[str]]

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], nodes: Iterable[str] = ()) -> "SocialGraph":
        adj: dict[str, set[str]] = {n: set() for n in nodes}
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        return cls(frozenset(adj), {n: frozenset(s) for n, s in adj.items()})

    def degree(self, node: str) -> int:
        return len(self.adjacency[node])

    def edges(self) -> list[tuple[str, str]]:
        """Canonical sorted edge list with ``u < v``."""
        return sorted((u, v) for u, nbrs in self.adjacency.items() for v in nbrs if u < v)

    @property
    def num_edges(self) -> int:
        return sum(len(s) for s in self.adjacency.values()) // 2


@dataclass(frozen=True)
class GraphFeatureVector:
    counts: np.ndarray
    bin_size: int

    @property
    def length(self) -> int:
        return len(self.counts)


def load_edge_list(path: str | Path) -> SocialGraph:
    edges, isolated = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if parts[:2] == ["#", "isolated"] and len(parts) == 3:
                isolated.append(parts[2])
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v'")
            if parts[0] != parts[1]:
                edges.append((parts[0], parts[1]))
    return SocialGraph.from_edges(edges, isolated)


def save_edge_list(g: SocialGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")
        # isolated nodes would otherwise vanish on reload
        for n in sorted(g.nodes):
            if not g.adjacency[n]:
                fh.write(f"# isolated {n}\n")


def degree_feature_vector(
    g: SocialGraph, node: str, n: int = DEFAULT_LENGTH, b: int = DEFAULT_BIN_SIZE
) -> GraphFeatureVector:
    """Count neighbours by degree bin: ``c_k`` holds neighbours with
    ``k*b < degree <= (k+1)*b``; degrees beyond ``n*b`` land in the last bin."""
    if node not in g.adjacency:
        raise KeyError(f"unknown node {node!r}")
    counts = np.zeros(n, dtype=np.int64)
    for v in g.adjacency[node]:
        k = -(-g.degree(v) // b) - 1
        counts[min(max(k, 0), n - 1)] += 1
    return GraphFeatureVector(counts, b)


def graph_features(
    g: SocialGraph, n: int = DEFAULT_LENGTH, b: int = DEFAULT_BIN_SIZE
) -> dict[str, GraphFeatureVector]:
    return {node: degree_feature_vector(g, node, n, b) for node in sorted(g.nodes)}


def sim_graph(f_a: GraphFeatureVector, f_b: GraphFeatureVector) -> float | None:
    if f_a.length != f_b.length or f_a.bin_size != f_b.bin_size:
        raise ValueError("graph feature vectors have different shapes")
    na = float(np.linalg.norm(f_a.counts))
    nb = float(np.linalg.norm(f_b.counts))
    if na == 0.0 or nb == 0.0:
        return None
    c = float(np.dot(f_a.counts, f_b.counts)) / (na * nb)
    return min(max(c, 0.0), 1.0)


def split_graph(
    g: SocialGraph, edge_overlap: float, vertex_overlap: float = 1.0, seed: int = 0
) -> tuple[SocialGraph, SocialGraph]:
    """Copy every vertex into both views and deal each edge to both views with
    probability ``edge_overlap``, otherwise to exactly one view (even odds)."""
    if not 0.0 <= edge_overlap <= 1.0:
        raise ValueError("edge_overlap must lie in [0, 1]")
    if vertex_overlap != 1.0:
        raise ValueError("only vertex_overlap=1 is supported")
    rng = np.random.default_rng(seed)
    edges = g.edges()
    u = rng.random(len(edges))
    half = edge_overlap + (1.0 - edge_overlap) / 2.0
    aux_edges, tgt_edges = [], []
    for e, r in zip(edges, u):
        if r < edge_overlap:
            aux_edges.append(e)
            tgt_edges.append(e)
        elif r < half:
            aux_edges.append(e)
        else:
            tgt_edges.append(e)
    return (
        SocialGraph.from_edges(aux_edges, g.nodes),
        SocialGraph.from_edges(tgt_edges, g.nodes),
    )


def generate_synthetic_graph(num_nodes: int, attach_m: int, seed: int = 0) -> SocialGraph:
    """Preferential attachment: each new node links to ``attach_m`` distinct
    existing nodes chosen with probability proportional to degree."""
    if not num_nodes > attach_m >= 1:
        raise ValueError("need num_nodes > attach_m >= 1")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    repeated: list[int] = []
    targets = list(range(attach_m))
    for new in range(attach_m, num_nodes):
        for t in targets:
            edges.append((new, t))
        repeated.extend(targets)
        repeated.extend([new] * attach_m)
        chosen: set[int] = set()
        picks: list[int] = []
        while len(picks) < attach_m:
            t = repeated[int(rng.integers(len(repeated)))]
            if t not in chosen:
                chosen.add(t)
                picks.append(t)
        targets = picks
    names = [str(i) for i in range(num_nodes)]
    return SocialGraph.from_edges(((names[u], names[v]) for u, v in edges), names)


def graph_from_neighbors(neighbors: Mapping[str, Iterable[str]]) -> SocialGraph:
    """Symmetrised graph from per-profile neighbour lists."""
    edges = [(u, v) for u, nbrs in neighbors.items() for v in nbrs if u != v]
    return SocialGraph.from_edges(edges, neighbors.keys())
