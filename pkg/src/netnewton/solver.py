"""
Per-round solver steps: DGD, Network Newton-K, and a dense Newton oracle.

Every neighbor interaction goes through an :class:`ExchangeBoard`; a
step reads nothing but a node's own block and its neighbors' posted
blocks. Passing ``per_node=True`` runs the node-by-node kernels instead
of the batched ones; both produce bit-identical iterates.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .metrics import MetricsTrace, Monitor, StoppingRule
from .network import ExchangeBoard
from .objective import ProblemInstance
from .oracles import newton_direction
from .penalty import HessianSplit, build_split, local_gradient, stacked_gradient
from .topology import WeightMatrix

RUNNING = "running"
DIVERGED = "diverged"
STOPPED = "stopped"


@dataclass(frozen=True)
class SolverState:
    y: np.ndarray = field(repr=False)
    alpha: float
    t: int = 0
    comm_exchanges: int = 0
    grad_norms: np.ndarray | None = field(default=None, repr=False)
    status: str = RUNNING

    @classmethod
    def initial(cls, inst: ProblemInstance, alpha: float, y0=None) -> "SolverState":
        y = np.zeros((inst.n, inst.p)) if y0 is None else np.array(y0, dtype=float).reshape(inst.n, inst.p)
        return cls(y=y, alpha=float(alpha))


@dataclass(frozen=True)
class NNConfig:
    K: int = 0
    epsilon: float = 1.0

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 0:
            raise ValueError(f"K must be a nonnegative integer, got {self.K}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"step size must lie in (0, 1], got {self.epsilon}")


def _board(w: WeightMatrix, board: ExchangeBoard | None) -> ExchangeBoard:
    return ExchangeBoard(w.graph) if board is None else board


def _exchange_gradient(Y, inst, w, alpha, board, per_node):
    board.post(Y)
    if not per_node:
        return stacked_gradient(Y, board.neighbor_blocks(), inst, w, alpha)
    return np.array([local_gradient(i, Y[i], board.inbox(i), inst, w, alpha) for i in range(inst.n)])


def _advance(state: SolverState, Y_new, G, exchanges: int) -> SolverState:
    status = RUNNING if np.all(np.isfinite(Y_new)) else DIVERGED
    return replace(state, y=Y_new, t=state.t + 1, comm_exchanges=state.comm_exchanges + exchanges,
                   grad_norms=np.linalg.norm(G, axis=1), status=status)


def dgd_step(state: SolverState, inst: ProblemInstance, w: WeightMatrix,
             board: ExchangeBoard | None = None, per_node: bool = False) -> SolverState:
    """One DGD iteration, i.e. a unit gradient step on the penalized objective."""
    board = _board(w, board)
    G = _exchange_gradient(state.y, inst, w, state.alpha, board, per_node)
    return _advance(state, state.y - G, G, 1)


def nn_direction(state: SolverState, split: HessianSplit, g: np.ndarray, K: int,
                 board: ExchangeBoard | None = None, per_node: bool = False) -> np.ndarray:
    """NN-K direction by K rounds of neighbor exchange.

    ``d0_i = -D_ii^{-1} g_i`` then ``d_i <- D_ii^{-1} (sum_{j in N_i + i} B_ij d_j - g_i)``.
    """
    if board is None:
        raise ValueError("nn_direction needs the exchange board of the run")
    g = np.asarray(g, dtype=float)
    if not per_node:
        d = -split.solve_D(g)
        for _ in range(K):
            board.post(d)
            d = split.solve_D(split.apply_B(d, board.neighbor_blocks()) - g)
        return d

    n = g.shape[0]
    nbrs = [board.graph.neighborhood(i) for i in range(n)]
    d = np.array([-split.solve_D_local(i, g[i]) for i in range(n)])
    for _ in range(K):
        board.post(d)
        new = np.empty_like(d)
        for i in range(n):
            inbox = board.inbox(i)
            acc = np.zeros_like(d[i])
            for k, j in enumerate(nbrs[i]):
                acc += split.b_nbr[i, k] * inbox[j]
            new[i] = split.solve_D_local(i, split.b_self[i] * d[i] + acc - g[i])
        d = new
    return d


def nn_step(state: SolverState, inst: ProblemInstance, w: WeightMatrix, cfg: NNConfig,
            board: ExchangeBoard | None = None, per_node: bool = False) -> SolverState:
    """One NN-K iteration: gradient exchange, K direction rounds, local update."""
    board = _board(w, board)
    G = _exchange_gradient(state.y, inst, w, state.alpha, board, per_node)
    split = build_split(state.y, inst, w, state.alpha)
    d = nn_direction(state, split, G, cfg.K, board, per_node)
    return _advance(state, state.y + cfg.epsilon * d, G, cfg.K + 1)


def exact_newton_step_oracle(state: SolverState, inst: ProblemInstance, w: WeightMatrix) -> SolverState:
    """Full Newton step ``y - H^{-1} g`` by dense solve (verification only)."""
    d = newton_direction(state.y, inst, w, state.alpha)
    G = stacked_gradient(state.y, state.y[w.graph.neighbors], inst, w, state.alpha)
    return _advance(state, state.y + d, G, 0)


def parse_method(method: str) -> tuple[str, int | None]:
    """``"DGD"`` -> ("DGD", None); ``"NN-2"`` -> ("NN", 2); likewise ANN-K and ADGD."""
    m = method.strip().upper()
    if m in ("DGD", "ADGD", "ADAPTIVE-DGD"):
        return ("ADGD" if m != "DGD" else "DGD"), None
    for fam in ("ANN", "NN"):
        if m.startswith(fam + "-"):
            k = m[len(fam) + 1:]
            if k.isdigit():
                return fam, int(k)
    raise ValueError(f"unknown method {method!r}")


def run_fixed_alpha(inst: ProblemInstance, w: WeightMatrix, method: str, alpha: float,
                    cfg: NNConfig | None = None, stop: StoppingRule | None = None,
                    y0=None, board: ExchangeBoard | None = None,
                    callback=None) -> MetricsTrace:
    """Iterate DGD or NN-K at a fixed penalty parameter and record metrics.

    ``method`` is ``"DGD"`` or ``"NN-K"``; for NN-K the truncation order in
    the name overrides ``cfg.K``. ``callback(state)`` sees every state.
    """
    family, K = parse_method(method)
    if family not in ("DGD", "NN"):
        raise ValueError(f"{method!r} is not a fixed-alpha method")
    cfg = cfg or NNConfig()
    if family == "NN":
        cfg = replace(cfg, K=K)
    stop = stop or StoppingRule()
    board = _board(w, board)
    monitor = Monitor(inst, w)
    trace = MetricsTrace(method=f"NN-{K}" if family == "NN" else "DGD", K=K, seed=inst.seed,
                         meta={"alpha": alpha, "epsilon": cfg.epsilon, "instance": inst.fingerprint(),
                               "n": inst.n, "p": inst.p, "d": w.graph.d})
    state = SolverState.initial(inst, alpha, y0)
    rec = monitor.record(trace, state.y, 0, alpha, 0)
    reason = DIVERGED if rec is None else stop.fired(0, *rec)
    while reason is None:
        if family == "DGD":
            state = dgd_step(state, inst, w, board)
        else:
            state = nn_step(state, inst, w, cfg, board)
        if callback is not None:
            callback(state)
        if state.status == DIVERGED:
            reason = DIVERGED
            break
        rec = monitor.record(trace, state.y, state.t, alpha, state.comm_exchanges)
        if rec is None:
            reason = DIVERGED
            break
        reason = stop.fired(state.t, *rec)
    trace.stop_reason = reason
    trace.status = DIVERGED if reason == DIVERGED else STOPPED
    trace.final_y = state.y
    return trace
