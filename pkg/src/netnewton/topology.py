"""
Communication graphs and consensus weight matrices.

Graphs are undirected and d-regular; neighbor lists are stored as an
``(n, d)`` integer table so that per-node neighbor sums run in a fixed
order. Weights are stored on the graph support only: one diagonal entry
per node and one off-diagonal entry per table slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class TopologyError(ValueError):
    """Raised for malformed graph or weight inputs."""


@dataclass(frozen=True)
class Graph:
    """Undirected d-regular graph on nodes ``0..n-1``.

    Attributes
    ----------
    n : int
        Number of nodes.
    d : int
        Common degree.
    neighbors : ndarray of int, shape (n, d)
        ``neighbors[i]`` is the ordered neighborhood of node ``i``.
    """

    n: int
    d: int
    neighbors: np.ndarray = field(repr=False)

    def __post_init__(self):
        nb = np.asarray(self.neighbors, dtype=np.intp)
        if nb.shape != (self.n, self.d):
            raise TopologyError(f"neighbor table has shape {nb.shape}, expected {(self.n, self.d)}")
        nb.setflags(write=False)
        object.__setattr__(self, "neighbors", nb)

    def neighborhood(self, i: int) -> list[int]:
        return [int(j) for j in self.neighbors[i]]

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges as sorted ``(i, j)`` pairs with ``i < j``."""
        return sorted({(min(i, int(j)), max(i, int(j))) for i in range(self.n) for j in self.neighbors[i]})

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for i in range(self.n):
            A[i, self.neighbors[i]] = 1.0
        return A

    def is_connected(self) -> bool:
        seen = np.zeros(self.n, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            i = frontier.pop()
            for j in self.neighbors[i]:
                if not seen[j]:
                    seen[j] = True
                    frontier.append(int(j))
        return bool(seen.all())

    def check(self, require_connected: bool = True) -> None:
        """Raise :class:`TopologyError` unless symmetry/regularity (and connectivity) hold."""
        nb = self.neighbors
        if nb.size and (nb.min() < 0 or nb.max() >= self.n):
            raise TopologyError("neighbor index out of range")
        for i in range(self.n):
            row = nb[i]
            if i in row:
                raise TopologyError(f"self loop at node {i}")
            if len(set(row.tolist())) != self.d:
                raise TopologyError(f"repeated neighbor at node {i}")
            for j in row:
                if i not in nb[j]:
                    raise TopologyError(f"asymmetric edge ({i}, {j})")
        if require_connected and not self.is_connected():
            raise TopologyError("graph is not connected")


def build_regular_cycle(n: int, d: int) -> Graph:
    """d-regular cycle: node ``i`` links to the ``d/2`` nearest nodes on each side.

    >>> build_regular_cycle(100, 4).neighborhood(0)
    [1, 2, 99, 98]
    """
    if n < 3:
        raise TopologyError(f"need n >= 3, got {n}")
    if d < 2 or d % 2:
        raise TopologyError(f"degree must be a positive even integer, got {d}")
    if d >= n:
        raise TopologyError(f"degree {d} must be below node count {n}")
    half = d // 2
    offsets = [k for k in range(1, half + 1)] + [-k for k in range(1, half + 1)]
    table = [[(i + o) % n for o in offsets] for i in range(n)]
    g = Graph(n, d, np.array(table))
    g.check()
    return g


def graph_from_edges(n: int, edges, require_connected: bool = True) -> Graph:
    """Build a regular graph from an explicit undirected edge list.

    Neighbors of each node are ordered by index. The same symmetry and
    regularity checks as for generated cycles apply.
    """
    adj: list[set[int]] = [set() for _ in range(n)]
    for i, j in edges:
        i, j = int(i), int(j)
        if i == j:
            raise TopologyError(f"self loop at node {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise TopologyError(f"edge ({i}, {j}) out of range for n={n}")
        adj[i].add(j)
        adj[j].add(i)
    degrees = {len(a) for a in adj}
    if len(degrees) != 1:
        raise TopologyError(f"graph is not regular, degrees {sorted(degrees)}")
    d = degrees.pop()
    if d == 0:
        raise TopologyError("graph has no edges")
    g = Graph(n, d, np.array([sorted(a) for a in adj]))
    g.check(require_connected=require_connected)
    return g


@dataclass(frozen=True)
class WeightMatrix:
    """Symmetric consensus weights on the support of a graph.

    Attributes
    ----------
    graph : Graph
    diag : ndarray, shape (n,)
        Self weights ``w_ii``.
    offdiag : ndarray, shape (n, d)
        ``offdiag[i, k]`` is ``w_ij`` for ``j = graph.neighbors[i, k]``.
    """

    graph: Graph
    diag: np.ndarray = field(repr=False)
    offdiag: np.ndarray = field(repr=False)

    def __post_init__(self):
        diag = np.array(self.diag, dtype=float)
        off = np.array(self.offdiag, dtype=float)
        if diag.shape != (self.graph.n,) or off.shape != (self.graph.n, self.graph.d):
            raise TopologyError("weight arrays do not match the graph")
        diag.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def delta(self) -> float:
        """Smallest diagonal weight."""
        return float(self.diag.min())

    @property
    def Delta(self) -> float:
        """Largest diagonal weight."""
        return float(self.diag.max())

    def weight(self, i: int, j: int) -> float:
        if i == j:
            return float(self.diag[i])
        hits = np.flatnonzero(self.graph.neighbors[i] == j)
        return float(self.offdiag[i, hits[0]]) if hits.size else 0.0

    def to_dense(self) -> np.ndarray:
        W = np.diag(self.diag)
        for i in range(self.n):
            W[i, self.graph.neighbors[i]] += self.offdiag[i]
        return W

    def scaled_row(self, i: int, factor: float) -> "WeightMatrix":
        """Copy with row ``i`` multiplied by ``factor`` (for building bad inputs)."""
        diag, off = self.diag.copy(), self.offdiag.copy()
        diag[i] *= factor
        off[i] *= factor
        return WeightMatrix(self.graph, diag, off)


def build_weights(g: Graph) -> WeightMatrix:
    """Uniform weights ``w_ii = 1/2 + 1/(2(d+1))`` and ``w_ij = 1/(2(d+1))``."""
    g.check(require_connected=False)
    off = 1.0 / (2 * (g.d + 1))
    return WeightMatrix(g, np.full(g.n, 0.5 + off), np.full((g.n, g.d), off))


@dataclass
class Check:
    name: str
    passed: bool
    violation: float
    detail: str = ""


@dataclass
class WeightReport:
    checks: list[Check]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'} {c.name:<16} violation={c.violation:.3e} {c.detail}".rstrip()
            for c in self.checks
        ]


def validate_weights(w: WeightMatrix, row_tol: float = 1e-12, eig_tol: float = 1e-10) -> WeightReport:
    """Diagnose a weight matrix against the consensus requirements.

    Checks symmetry, row-stochasticity, nonnegativity on the support,
    the diagonal bound ``0 <= w_ii < 1``, and that the all-ones vector
    spans the null space of ``I - W`` (exactly one eigenvalue of
    ``I - W`` below ``eig_tol``). Never raises on bad weights.
    """
    W = w.to_dense()
    n = w.n
    checks = []

    asym = float(np.abs(W - W.T).max()) if n else 0.0
    checks.append(Check("symmetric", asym <= row_tol, asym))

    row_err = float(np.abs(W.sum(axis=1) - 1.0).max())
    checks.append(Check("row_stochastic", row_err <= row_tol, row_err))

    neg = float(max(0.0, -w.diag.min(), -w.offdiag.min() if w.offdiag.size else 0.0))
    zero_on_support = bool((w.offdiag == 0).any())
    checks.append(
        Check("support", neg == 0.0 and not zero_on_support, neg,
              "zero weight on an edge" if zero_on_support else "")
    )

    lo_violation = max(0.0, -w.delta)
    hi_violation = max(0.0, w.Delta - (1.0 - 1e-15))
    checks.append(
        Check("diagonal_bounds", lo_violation == 0.0 and hi_violation == 0.0,
              max(lo_violation, hi_violation), f"delta={w.delta:.6g} Delta={w.Delta:.6g}")
    )

    L = np.eye(n) - 0.5 * (W + W.T)
    eig = np.linalg.eigvalsh(L)
    zeros = int(np.sum(np.abs(eig) <= eig_tol))
    gap = float(eig[1]) if n > 1 else float("inf")
    checks.append(
        Check("null_space", zeros == 1 and gap > eig_tol, float(abs(eig[0])),
              f"zero_eigs={zeros} lambda_2={gap:.3e}")
    )
    return WeightReport(checks)
