"""Prosumer network topology: undirected graphs and closed neighborhoods.

Nodes are indexed 0..N-1 in input order. All sharing happens over the closed
neighborhood of a node (its direct neighbors plus the node itself), which is
also the index set every allocation vector lives on.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "NetworkGraph",
    "Neighborhood",
    "build_from_positions",
    "build_from_edges",
    "load_positions_csv",
    "load_edge_list",
]


@dataclass(frozen=True)
class Neighborhood:
    """Closed neighborhood of one node: its neighbors plus the node itself.

    Members are sorted ascending so allocation-vector indexing is
    deterministic across runs.
    """

    center: int
    members: tuple[int, ...]

    @property
    def local_dim(self) -> int:
        return len(self.members)

    def index_of(self, node: int) -> int:
        """Position of `node` within members; raises ValueError if absent."""
        return self.members.index(node)


class NetworkGraph:
    """Undirected graph over prosumer nodes, immutable after construction.

    Safe to share read-only across concurrently updating agents.
    """

    def __init__(self, adjacency, positions=None):
        adj = np.array(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be a square matrix")
        n = adj.shape[0]
        if n == 0:
            raise ValueError("graph must have at least one node")
        if adj.diagonal().any():
            raise ValueError("adjacency diagonal must be zero (no self-loops)")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        self._adjacency = adj
        self._adjacency.setflags(write=False)
        self.node_count: int = n

        if positions is not None:
            pos = np.array(positions, dtype=float)
            if pos.shape != (n, 2):
                raise ValueError(f"positions must have shape ({n}, 2), got {pos.shape}")
            if not np.isfinite(pos).all():
                raise ValueError("positions must be finite")
            pos.setflags(write=False)
            self.positions = pos
        else:
            self.positions = None

        closed = adj | np.eye(n, dtype=bool)
        self._neighborhoods = tuple(
            Neighborhood(i, tuple(int(j) for j in np.flatnonzero(closed[i])))
            for i in range(n)
        )

    @property
    def adjacency(self) -> np.ndarray:
        return self._adjacency

    def degree(self, i: int) -> int:
        """Neighbor count of node i, excluding i itself."""
        self._check_index(i)
        return int(self._adjacency[i].sum())

    def neighborhood(self, i: int) -> Neighborhood:
        self._check_index(i)
        return self._neighborhoods[i]

    def neighborhoods(self) -> tuple[Neighborhood, ...]:
        return self._neighborhoods

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.node_count:
            raise IndexError(f"node index {i} out of range [0, {self.node_count})")

    def __repr__(self) -> str:
        edges = int(self._adjacency.sum()) // 2
        return f"NetworkGraph(nodes={self.node_count}, edges={edges})"


def build_from_positions(positions, threshold: float) -> NetworkGraph:
    """Connect every pair of facilities within Euclidean `threshold` of each other.

    Duplicate positions are allowed (distance 0 connects them for any
    threshold >= 0). Non-finite coordinates are rejected.
    """
    pos = np.array(positions, dtype=float)
    if pos.size == 0:
        raise ValueError("positions must be nonempty")
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise ValueError("positions must be a list of 2-D points")
    if not np.isfinite(pos).all():
        raise ValueError("positions contain NaN or infinite coordinates")
    if not threshold >= 0:  # also catches NaN
        raise ValueError("threshold must be nonnegative")
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    adj = dist <= threshold
    np.fill_diagonal(adj, False)
    return NetworkGraph(adj, positions=pos)


def build_from_edges(n: int, edges) -> NetworkGraph:
    """Build an n-node graph from an edge list; duplicate edges are idempotent."""
    if n < 1:
        raise ValueError("node count must be positive")
    adj = np.zeros((n, n), dtype=bool)
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise ValueError(f"self-loop ({i},{j}) not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i},{j}) references a node outside [0, {n})")
        adj[i, j] = adj[j, i] = True
    return NetworkGraph(adj)


def load_positions_csv(path) -> np.ndarray:
    """Read facility positions from a CSV with header `id,x,y`.

    Ids must be exactly 0..N-1 (any row order); returns positions ordered by id.
    """
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:3]] != ["id", "x", "y"]:
            raise ValueError(f"{path}: expected header 'id,x,y', got {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append((int(row["id"]), float(row["x"]), float(row["y"])))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad row {row}") from exc
    if not rows:
        raise ValueError(f"{path}: no facility rows")
    rows.sort()
    ids = [r[0] for r in rows]
    if ids != list(range(len(rows))):
        raise ValueError(f"{path}: ids must be 0..{len(rows) - 1} after sorting, got {ids}")
    pos = np.array([(x, y) for _, x, y in rows], dtype=float)
    if not np.isfinite(pos).all():
        raise ValueError(f"{path}: positions contain NaN or infinite coordinates")
    return pos


def load_edge_list(path) -> list[tuple[int, int]]:
    """Read an edge list file: one `i j` pair per line, '#' comments allowed."""
    path = Path(path)
    edges = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'i j', got {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return edges
