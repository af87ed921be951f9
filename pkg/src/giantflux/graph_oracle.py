"""Direct dynamic-graph simulation, the ground-truth oracle for small n.

Samples every pairwise edge arrival E_ij ~ Exp(w_i * w_j); the edge {i, j} is
present at intensity lambda iff E_ij <= lambda / n.  A single Kruskal-style
pass over the sorted arrivals with union-find tracks component counts and
volumes, so one realization yields the giant pathwise-coupled across a whole
ascending lambda grid.  Memory is O(n^2), hence the size cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .weights import WeightVector

__all__ = [
    "DynamicGraphRealization",
    "GiantSnapshot",
    "DEFAULT_CAP",
    "simulate_dynamic_graph",
    "giant_path",
]

DEFAULT_CAP = 2000


@dataclass(frozen=True)
class DynamicGraphRealization:
    """All n(n-1)/2 edge arrivals of one realization, sorted ascending."""

    weights: np.ndarray
    edge_i: np.ndarray
    edge_j: np.ndarray
    arrivals: np.ndarray

    @property
    def n(self) -> int:
        return self.weights.size

    @classmethod
    def from_arrivals(cls, weights, edges) -> "DynamicGraphRealization":
        """Build from an explicit (i, j, arrival) list; deterministic tests only.

        The list must contain every unordered pair exactly once.
        """
        w = np.asarray(weights, dtype=np.float64).copy()
        n = w.size
        seen = set()
        ii, jj, aa = [], [], []
        for i, j, arrival in edges:
            i, j = (int(i), int(j)) if i < j else (int(j), int(i))
            if not (0 <= i < j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if arrival <= 0.0:
                raise ValueError(f"arrival for edge ({i}, {j}) must be > 0")
            seen.add((i, j))
            ii.append(i)
            jj.append(j)
            aa.append(float(arrival))
        if len(seen) != n * (n - 1) // 2:
            raise ValueError(
                f"expected {n * (n - 1) // 2} edges for n={n}, got {len(seen)}"
            )
        return cls._sorted(w, np.array(ii, dtype=np.int64), np.array(jj, dtype=np.int64),
                           np.array(aa, dtype=np.float64))

    @classmethod
    def _sorted(cls, w, ei, ej, arrivals) -> "DynamicGraphRealization":
        order = np.argsort(arrivals)
        ei, ej, arrivals = ei[order], ej[order], arrivals[order]
        for arr in (w, ei, ej, arrivals):
            arr.setflags(write=False)
        return cls(weights=w, edge_i=ei, edge_j=ej, arrivals=arrivals)


@dataclass(frozen=True)
class GiantSnapshot:
    """Count and volume of the most voluminous component at one lambda."""

    lam: float
    count: int
    volume: float


def simulate_dynamic_graph(
    w: WeightVector, seed: int, cap: int = DEFAULT_CAP
) -> DynamicGraphRealization:
    """Sample all pairwise arrivals for a weight vector."""
    n = w.n
    if n > cap:
        raise ValueError(f"n={n} exceeds the O(n^2) simulation cap {cap}")
    rng = np.random.default_rng(seed)
    ei, ej = np.triu_indices(n, k=1)
    ei = ei.astype(np.int64)
    ej = ej.astype(np.int64)
    rates = w.weights[ei] * w.weights[ej]
    arrivals = rng.standard_exponential(ei.size) / rates if ei.size else np.empty(0)
    return DynamicGraphRealization._sorted(w.weights.copy(), ei, ej, arrivals)


class _UnionFind:
    """Union by size with path compression; roots carry count and volume."""

    def __init__(self, weights: np.ndarray):
        n = weights.size
        self.parent = list(range(n))
        self.count = [1] * n
        self.volume = [float(x) for x in weights]

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while x != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.count[ra] < self.count[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.count[ra] += self.count[rb]
        self.volume[ra] += self.volume[rb]


def _max_volume_root(uf: _UnionFind, n: int) -> tuple[int, float]:
    """Count and volume of the max-volume component.

    Scanning vertices in index order with a strict comparison makes ties go
    to the component containing the smallest vertex index.
    """
    best_volume = -np.inf
    best_count = 0
    seen_best = -1
    for v in range(n):
        root = uf.find(v)
        if root == seen_best:
            continue
        vol = uf.volume[root]
        if vol > best_volume:
            best_volume = vol
            best_count = uf.count[root]
            seen_best = root
    return best_count, best_volume


def giant_path(r: DynamicGraphRealization, lambdas) -> list[GiantSnapshot]:
    """Giant snapshots over an ascending lambda grid, one Kruskal pass."""
    grid = np.asarray(lambdas, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("lambda grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) < 0.0):
        raise ValueError("lambda grid must be ascending")
    n = r.n
    uf = _UnionFind(r.weights)
    snapshots = []
    pos = 0
    m = r.arrivals.size
    for lam in grid:
        threshold = lam / n
        while pos < m and r.arrivals[pos] <= threshold:
            uf.union(int(r.edge_i[pos]), int(r.edge_j[pos]))
            pos += 1
        count, volume = _max_volume_root(uf, n)
        snapshots.append(GiantSnapshot(lam=float(lam), count=count, volume=volume))
    return snapshots


def _components_at(r: DynamicGraphRealization, lam: float) -> list[tuple[int, float]]:
    """(count, volume) for every component at one lambda; test helper."""
    uf = _UnionFind(r.weights)
    threshold = lam / r.n
    for pos in range(r.arrivals.size):
        if r.arrivals[pos] > threshold:
            break
        uf.union(int(r.edge_i[pos]), int(r.edge_j[pos]))
    out = []
    for v in range(r.n):
        if uf.find(v) == v:
            out.append((uf.count[v], uf.volume[v]))
    return out
