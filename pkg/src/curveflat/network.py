"""Erdős–Rényi contact networks.

Nodes are the dense integers ``0..n-1``. Edges are stored once as ``(u, v)``
with ``u < v``; neighbour lists are kept in CSR form and exposed as plain
Python lists for the event loop, which iterates them far faster than numpy
slices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_BATCH = 1 << 16


@dataclass(frozen=True)
class Network:
    n_nodes: int
    edges: np.ndarray  # (m, 2) int64, rows sorted, u < v
    indptr: np.ndarray
    indices: np.ndarray
    _adj: list[list[int]] | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_edges(cls, n_nodes: int, edges) -> "Network":
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            if e.min() < 0 or e.max() >= n_nodes:
                raise ValueError("node id out of range")
            e = np.sort(e, axis=1)
            e = np.unique(e, axis=0)
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n_nodes), out=indptr[1:])
        return cls(n_nodes, e, indptr, dst)

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        if self._adj is None:
            flat = self.indices.tolist()
            ptr = self.indptr.tolist()
            adj = [flat[ptr[u]:ptr[u + 1]] for u in range(self.n_nodes)]
            object.__setattr__(self, "_adj", adj)
        return self._adj

    def write_edge_list(self, path) -> None:
        """Write one ``u v`` pair per line, sorted, ``u < v``."""
        with open(Path(path), "w", newline="\n") as fh:
            for u, v in self.edges.tolist():
                fh.write(f"{u} {v}\n")


def _pair_from_index(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Row u of the strict upper triangle starts at offset u*(2n-u-1)/2.
    u_all = np.arange(n - 1, dtype=np.int64)
    starts = u_all * (2 * n - u_all - 1) // 2
    u = np.searchsorted(starts, k, side="right") - 1
    v = k - starts[u] + u + 1
    return u, v


def erdos_renyi(n: int, p: float, seed) -> Network:
    """Sample G(n, p) by geometric skipping over the pair index.

    Each of the ``n(n-1)/2`` unordered pairs is present independently with
    probability ``p``. The gaps between successive present pairs are
    geometric, so the cost is proportional to ``n + |E|`` rather than to the
    number of pairs.

    Parameters
    ----------
    n : int
        Number of nodes, ``n >= 1``.
    p : float
        Edge probability in ``[0, 1]``.
    seed : int, SeedSequence or Generator
        Anything accepted by :func:`numpy.random.default_rng`.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    n_pairs = n * (n - 1) // 2
    if p == 0.0 or n_pairs == 0:
        return Network.from_edges(n, np.empty((0, 2), dtype=np.int64))
    if p == 1.0:
        k = np.arange(n_pairs, dtype=np.int64)
    else:
        chunks = []
        pos = -1
        while True:
            # cap so a huge draw (tiny p) cannot wrap around in int64
            gaps = np.minimum(rng.geometric(p, size=_BATCH), n_pairs + 1)
            idx = pos + np.cumsum(gaps)
            inside = idx[idx < n_pairs]
            chunks.append(inside)
            if inside.size < idx.size:
                break
            pos = int(idx[-1])
        k = np.concatenate(chunks)
    u, v = _pair_from_index(k, n)
    return Network.from_edges(n, np.column_stack([u, v]))


def mean_degree(net: Network) -> float:
    return 2.0 * net.n_edges / net.n_nodes
