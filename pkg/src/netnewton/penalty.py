"""
Penalized consensus objective and its blockwise derivative machinery.

A stacked vector ``y = [x_1; ...; x_n]`` is held as an ``(n, p)`` array
whose row ``i`` is owned by node ``i``. Everything here works block by
block through the neighbor table; dense Kronecker forms live in
:mod:`netnewton.oracles`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objective import ProblemInstance
from .topology import WeightMatrix


def as_blocks(y, n: int, p: int) -> np.ndarray:
    """View a flat length-``n*p`` vector (or an ``(n, p)`` array) as blocks."""
    Y = np.asarray(y, dtype=float)
    if Y.shape == (n, p):
        return Y
    if Y.shape == (n * p,):
        return Y.reshape(n, p)
    raise ValueError(f"stacked vector has shape {Y.shape}, expected {(n, p)} or {(n * p,)}")


def _check(Y: np.ndarray, inst: ProblemInstance, w: WeightMatrix) -> np.ndarray:
    if inst.n != w.n:
        raise ValueError(f"instance has {inst.n} nodes but weights have {w.n}")
    return as_blocks(Y, inst.n, inst.p)


def neighbor_sum(weights: np.ndarray, nb_blocks: np.ndarray) -> np.ndarray:
    """``out[i] = sum_k weights[i, k] * nb_blocks[i, k]`` accumulated in neighbor order.

    The fixed accumulation order makes the batched result bit-identical to
    a node-by-node loop over the same neighbor lists.
    """
    out = np.zeros(nb_blocks.shape[::2])
    for k in range(nb_blocks.shape[1]):
        out += weights[:, k, None] * nb_blocks[:, k]
    return out


def consensus_residual(Y: np.ndarray, nb_blocks: np.ndarray, w: WeightMatrix) -> np.ndarray:
    """Blocks of ``(I - Z) y``."""
    return (1.0 - w.diag)[:, None] * Y - neighbor_sum(w.offdiag, nb_blocks)


def penalty_value(y, inst: ProblemInstance, w: WeightMatrix, alpha: float) -> float:
    """``F(y) = 1/2 y^T (I - Z) y + alpha * sum_i f_i(x_i)``."""
    Y = _check(y, inst, w)
    r = consensus_residual(Y, Y[w.graph.neighbors], w)
    return float(0.5 * np.sum(Y * r) + alpha * inst.values(Y).sum())


def local_gradient(i: int, x_i, neighbor_values: dict, inst: ProblemInstance,
                   w: WeightMatrix, alpha: float) -> np.ndarray:
    """Gradient block of ``F`` at node ``i`` from its own and its neighbors' iterates.

    ``g_i = (1 - w_ii) x_i - sum_{j in N_i} w_ij x_j + alpha * grad f_i(x_i)``
    """
    nbrs = w.graph.neighborhood(i)
    if set(neighbor_values) != set(nbrs):
        missing = sorted(set(nbrs) - set(neighbor_values))
        extra = sorted(set(neighbor_values) - set(nbrs))
        raise KeyError(f"node {i}: missing neighbor values {missing}, unexpected {extra}")
    x_i = np.asarray(x_i, dtype=float)
    acc = np.zeros_like(x_i)
    for k, j in enumerate(nbrs):
        acc += w.offdiag[i, k] * np.asarray(neighbor_values[j], dtype=float)
    return (1.0 - w.diag[i]) * x_i - acc + alpha * inst.locals[i].gradient(x_i)


def stacked_gradient(Y: np.ndarray, nb_blocks: np.ndarray, inst: ProblemInstance,
                     w: WeightMatrix, alpha: float) -> np.ndarray:
    """All gradient blocks at once, given each node's neighbor inbox."""
    return consensus_residual(Y, nb_blocks, w) + alpha * inst.gradients(Y)


def penalty_gradient(y, inst: ProblemInstance, w: WeightMatrix, alpha: float) -> np.ndarray:
    """``grad F(y)`` as ``(n, p)`` blocks (centralized convenience)."""
    Y = _check(y, inst, w)
    return stacked_gradient(Y, Y[w.graph.neighbors], inst, w, alpha)


@dataclass(frozen=True)
class HessianSplit:
    """Splitting ``H = D - B`` of the penalized Hessian.

    ``D_ii = alpha * hess f_i(x_i) + 2 (1 - w_ii) I`` is node-local.
    ``B_ii = (1 - w_ii) I`` and ``B_ij = w_ij I`` depend on the weights only.
    When all local Hessians are diagonal ``d_diag`` holds the diagonals of
    the D blocks and ``d_full`` is None; otherwise ``d_full`` holds the
    ``(n, p, p)`` blocks.
    """

    alpha: float
    b_self: np.ndarray
    b_nbr: np.ndarray
    d_diag: np.ndarray | None = None
    d_full: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.b_self.shape[0]

    def D_blocks(self) -> np.ndarray:
        if self.d_full is not None:
            return self.d_full
        p = self.d_diag.shape[1]
        return np.einsum("ij,jk->ijk", self.d_diag, np.eye(p))

    def B_self_blocks(self, p: int) -> np.ndarray:
        return self.b_self[:, None, None] * np.eye(p)

    def solve_D(self, V: np.ndarray) -> np.ndarray:
        """``D^{-1} v`` blockwise."""
        if self.d_full is None:
            return V / self.d_diag
        return np.linalg.solve(self.d_full, V[..., None])[..., 0]

    def solve_D_local(self, i: int, v: np.ndarray) -> np.ndarray:
        if self.d_full is None:
            return v / self.d_diag[i]
        return np.linalg.solve(self.d_full[i], v)

    def apply_B(self, V: np.ndarray, nb_blocks: np.ndarray) -> np.ndarray:
        """Blocks of ``B v`` from own blocks and neighbor inboxes."""
        return self.b_self[:, None] * V + neighbor_sum(self.b_nbr, nb_blocks)


def build_split(y, inst: ProblemInstance, w: WeightMatrix, alpha: float) -> HessianSplit:
    Y = _check(y, inst, w)
    scale = 2.0 * (1.0 - w.diag)
    if inst.diagonal_hessians:
        hd = inst.hessian_diagonals(Y)
        if not np.all(np.isfinite(hd)):
            raise FloatingPointError("non-finite Hessian entries")
        d_diag = alpha * hd + scale[:, None]
        d_diag.setflags(write=False)
        return HessianSplit(alpha, 1.0 - w.diag, w.offdiag, d_diag=d_diag)
    H = inst.hessians(Y)
    if not np.all(np.isfinite(H)):
        raise FloatingPointError("non-finite Hessian entries")
    d_full = alpha * H + scale[:, None, None] * np.eye(inst.p)
    d_full.setflags(write=False)
    return HessianSplit(alpha, 1.0 - w.diag, w.offdiag, d_full=d_full)
