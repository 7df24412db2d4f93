"""
Road graph: undirected, unweighted, with a binary adjacency matrix.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from zitd_gnn.errors import DataError


@dataclass(frozen=True)
class RoadGraph:
    """
    Roads V = {0..n_roads-1}, undirected edges E and adjacency A.

    ``edges`` holds normalised pairs (i < j). The diagonal of ``adjacency``
    is zero; attention adds self-loops through ``neighbourhood_mask``.
    """

    n_roads: int
    edges: tuple[tuple[int, int], ...]
    adjacency: np.ndarray

    def neighbourhood_mask(self) -> np.ndarray:
        """Boolean N x N mask of {j : A_ij = 1} plus i itself."""
        return (self.adjacency > 0) | np.eye(self.n_roads, dtype=bool)

    def degree(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def permute(self, perm: Sequence[int]) -> "RoadGraph":
        """
        Relabel roads so that new road k is old road perm[k].

        Returns:
            A graph with the same structure under the new labels.
        """
        perm = np.asarray(perm)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(len(perm))
        relabelled = [(int(inverse[a]), int(inverse[b])) for a, b in self.edges]
        return build_graph(self.n_roads, relabelled)


def build_graph(n: int, edge_list: Iterable[tuple[int, int]]) -> RoadGraph:
    """
    Build a road graph from an undirected edge list.

    Args:
        n: Number of roads.
        edge_list: Pairs of 0-based road indices.

    Returns:
        A RoadGraph with a symmetric adjacency; isolated roads are allowed.

    Raises:
        DataError: On out-of-range indices, self-edges or duplicate pairs.
    """
    if n < 1:
        raise DataError(f"a road graph needs at least one road, got {n}")
    adjacency = np.zeros((n, n))
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    for a, b in edge_list:
        a, b = int(a), int(b)
        if not (0 <= a < n and 0 <= b < n):
            raise DataError(f"edge ({a}, {b}) references a road outside [0, {n})")
        if a == b:
            raise DataError(f"self-edge ({a}, {b}) is not allowed")
        pair = (min(a, b), max(a, b))
        if pair in seen:
            raise DataError(f"duplicate edge ({a}, {b})")
        seen.add(pair)
        edges.append(pair)
        adjacency[a, b] = adjacency[b, a] = 1.0
    return RoadGraph(n_roads=n, edges=tuple(edges), adjacency=adjacency)
