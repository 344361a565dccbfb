"""
Dense centralized oracles.

These build ``Z = W kron I`` and friends explicitly and are meant for
verification at small scale (``n * p <= 2000``). The distributed code
paths never call into this module.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .objective import ProblemInstance
from .penalty import as_blocks
from .topology import WeightMatrix

MAX_ORACLE_DIM = 2000


def _guard(n: int, p: int) -> None:
    if n * p > MAX_ORACLE_DIM:
        raise ValueError(f"dense oracle limited to n*p <= {MAX_ORACLE_DIM}, got {n * p}")


def dense_Z(w: WeightMatrix, p: int) -> np.ndarray:
    return np.kron(w.to_dense(), np.eye(p))


def dense_G(y, inst: ProblemInstance) -> np.ndarray:
    Y = as_blocks(y, inst.n, inst.p)
    return sla.block_diag(*inst.hessians(Y))


def dense_penalty_value(y, inst, w, alpha) -> float:
    Y = as_blocks(y, inst.n, inst.p)
    v = Y.ravel()
    IZ = np.eye(v.size) - dense_Z(w, inst.p)
    return float(0.5 * v @ IZ @ v + alpha * sum(f.value(x) for f, x in zip(inst.locals, Y)))


def dense_gradient(y, inst, w, alpha) -> np.ndarray:
    """``(I - Z) y + alpha h(y)`` as a flat vector."""
    Y = as_blocks(y, inst.n, inst.p)
    v = Y.ravel()
    h = np.concatenate([f.gradient(x) for f, x in zip(inst.locals, Y)])
    return (np.eye(v.size) - dense_Z(w, inst.p)) @ v + alpha * h


def dense_hessian(y, inst, w, alpha) -> np.ndarray:
    """``I - Z + alpha G``."""
    _guard(inst.n, inst.p)
    N = inst.n * inst.p
    return np.eye(N) - dense_Z(w, inst.p) + alpha * dense_G(y, inst)


def dense_split(y, inst, w, alpha) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``D = alpha G + 2 (I - Z_d)`` and ``B = I - 2 Z_d + Z``."""
    _guard(inst.n, inst.p)
    Z = dense_Z(w, inst.p)
    Zd = np.diag(np.diag(Z))
    I = np.eye(Z.shape[0])
    return alpha * dense_G(y, inst) + 2 * (I - Zd), I - 2 * Zd + Z


def dense_hessian_inverse_oracle(y, inst, w, alpha) -> np.ndarray:
    H = dense_hessian(y, inst, w, alpha)
    try:
        c = sla.cho_factor(H)
    except sla.LinAlgError as exc:
        raise np.linalg.LinAlgError("penalized Hessian is not positive definite") from exc
    return sla.cho_solve(c, np.eye(H.shape[0]))


def inv_sqrt_spd(D: np.ndarray) -> np.ndarray:
    lam, V = np.linalg.eigh(D)
    return (V / np.sqrt(lam)) @ V.T


def normalized_coupling(y, inst, w, alpha) -> np.ndarray:
    """``D^{-1/2} B D^{-1/2}``."""
    D, B = dense_split(y, inst, w, alpha)
    S = inv_sqrt_spd(D)
    return S @ B @ S


def spectral_radius(X: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (X + X.T)))))


def truncated_inverse(y, inst, w, alpha, K: int) -> np.ndarray:
    """``D^{-1/2} [sum_{k=0}^K X^k] D^{-1/2}`` with ``X = D^{-1/2} B D^{-1/2}``."""
    D, B = dense_split(y, inst, w, alpha)
    S = inv_sqrt_spd(D)
    X = S @ B @ S
    acc = np.eye(X.shape[0])
    term = np.eye(X.shape[0])
    for _ in range(K):
        term = term @ X
        acc = acc + term
    return S @ acc @ S


def truncated_direction(y, inst, w, alpha, K: int, g=None) -> np.ndarray:
    """Dense NN-K direction ``-Hhat_K^{-1} g`` as ``(n, p)`` blocks."""
    if g is None:
        g = dense_gradient(y, inst, w, alpha)
    g = np.asarray(g, dtype=float).ravel()
    return (-truncated_inverse(y, inst, w, alpha, K) @ g).reshape(inst.n, inst.p)


def newton_direction(y, inst, w, alpha) -> np.ndarray:
    H = dense_hessian(y, inst, w, alpha)
    g = dense_gradient(y, inst, w, alpha)
    return (-sla.solve(H, g, assume_a="pos")).reshape(inst.n, inst.p)


def penalized_optimum(inst: ProblemInstance, w: WeightMatrix, alpha: float) -> np.ndarray:
    """Minimizer of ``F`` for a quadratic instance, as ``(n, p)`` blocks.

    Solves ``(I - Z + alpha blockdiag(A_i)) y = -alpha [b_1; ...; b_n]``.
    """
    if not inst.is_quadratic:
        raise ValueError("closed-form penalized optimum needs the quadratic family")
    _guard(inst.n, inst.p)
    H = np.eye(inst.n * inst.p) - dense_Z(w, inst.p) + alpha * np.diag(inst.a.ravel())
    rhs = -alpha * inst.b.ravel()
    try:
        y = sla.solve(H, rhs, assume_a="pos")
    except (sla.LinAlgError, ValueError) as exc:
        raise np.linalg.LinAlgError("penalized system is singular") from exc
    return y.reshape(inst.n, inst.p)
