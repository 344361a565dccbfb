"""
Bulk-synchronous exchange board.

Every node posts one p-dimensional block per round; after the barrier a
node may read its own block and the blocks of its neighbors, nothing
else. Each posted round counts as one exchange per neighbor pair.
"""

from __future__ import annotations

import numpy as np

from .topology import Graph


class LocalityError(RuntimeError):
    """A node tried to read state of a node outside its neighborhood."""


class ExchangeBoard:
    """Message board mediating all neighbor exchanges of a run.

    Parameters
    ----------
    graph : Graph
    read_log : list, optional
        When given, every read appends ``(reader, owner)`` to it.
    """

    def __init__(self, graph: Graph, read_log: list | None = None):
        self.graph = graph
        self.rounds = 0
        self.read_log = read_log
        self._posted = None
        self._allowed = [set(graph.neighborhood(i)) | {i} for i in range(graph.n)]

    def post(self, blocks: np.ndarray) -> None:
        """Publish one block per node and close the round."""
        blocks = np.array(blocks, dtype=float)
        if blocks.ndim != 2 or blocks.shape[0] != self.graph.n:
            raise ValueError(f"expected one block per node, got shape {blocks.shape}")
        blocks.setflags(write=False)
        self._posted = blocks
        self.rounds += 1

    def _require_posted(self):
        if self._posted is None:
            raise RuntimeError("nothing posted yet")
        return self._posted

    def read(self, reader: int, owner: int) -> np.ndarray:
        posted = self._require_posted()
        if owner not in self._allowed[reader]:
            raise LocalityError(f"node {reader} cannot read node {owner}")
        if self.read_log is not None:
            self.read_log.append((reader, owner))
        return posted[owner]

    def inbox(self, reader: int) -> dict[int, np.ndarray]:
        """Neighbor blocks of ``reader`` keyed by sender, in neighbor order."""
        return {j: self.read(reader, j) for j in self.graph.neighborhood(reader)}

    def neighbor_blocks(self) -> np.ndarray:
        """All nodes' inboxes at once: ``out[i, k] = block of neighbors[i, k]``."""
        posted = self._require_posted()
        nb = self.graph.neighbors
        if self.read_log is not None:
            self.read_log.extend((i, int(j)) for i in range(self.graph.n) for j in nb[i])
        return posted[nb]
