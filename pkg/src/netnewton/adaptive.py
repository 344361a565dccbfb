"""
Adaptive penalty schedule (ANN-K and adaptive DGD).

Each node keeps an n-bit signal vector. A node whose local gradient norm
drops to ``tol`` sets its own bit and broadcasts a one-bit signal; all
receivers set the sender's bit. When every bit is set the whole network
multiplies ``alpha`` by ``eta`` and clears the bits.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .metrics import MetricsTrace, Monitor, StoppingRule
from .network import ExchangeBoard
from .objective import ProblemInstance
from .solver import DIVERGED, STOPPED, NNConfig, SolverState, dgd_step, nn_step, parse_method
from .topology import WeightMatrix


@dataclass(frozen=True)
class AdaptiveConfig:
    """Parameters of the decreasing-alpha schedule.

    ``K=None`` selects adaptive DGD as the inner step. ``inner_loop`` selects
    the formulation where each node iterates until it reaches ``tol`` before
    signalling; on a synchronous network it yields the same epochs.
    """

    alpha0: float = 1e-2
    eta: float = 0.1
    tol: float = 1e-3
    alpha_min: float = 1e-8
    K: int | None = 0
    epsilon: float = 1.0
    inner_loop: bool = False

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if not 0.0 < self.alpha_min <= self.alpha0:
            raise ValueError("need 0 < alpha_min <= alpha0")


@dataclass(frozen=True)
class SignalState:
    """Signal vectors of all nodes; ``bits[i, j]`` is s_ij at node i."""

    bits: np.ndarray
    signal_msgs: int = 0
    broadcasts: int = 0

    @classmethod
    def initial(cls, n: int) -> "SignalState":
        return cls(np.zeros((n, n), dtype=bool))

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    def synchronous(self) -> bool:
        return bool((self.bits == self.bits[0]).all())

    def all_set(self) -> bool:
        return bool(self.bits.all())

    def deliver(self, senders) -> "SignalState":
        """Set own bits of ``senders`` and deliver their broadcasts to every other node."""
        senders = list(senders)
        if not senders:
            return self
        bits = self.bits.copy()
        pending = []
        for i in senders:
            bits[i, i] = True
            pending.append(i)
        for i in pending:
            bits[:, i] = True
        n = self.n
        return SignalState(bits, self.signal_msgs + len(senders) * (n - 1), self.broadcasts + len(senders))

    def reset(self) -> "SignalState":
        return replace(self, bits=np.zeros_like(self.bits))


def _inner_step(state, inst, w, cfg: AdaptiveConfig, board):
    if cfg.K is None:
        return dgd_step(state, inst, w, board)
    return nn_step(state, inst, w, NNConfig(cfg.K, cfg.epsilon), board)


def _maybe_update_alpha(state: SolverState, sig: SignalState, cfg: AdaptiveConfig):
    if sig.all_set() and state.alpha * cfg.eta >= cfg.alpha_min:
        return replace(state, alpha=state.alpha * cfg.eta), sig.reset(), True
    return state, sig, False


def ann_round(state: SolverState, sig: SignalState, inst: ProblemInstance, w: WeightMatrix,
              cfg: AdaptiveConfig, board: ExchangeBoard | None = None):
    """One synchronous round: inner step, signalling, and the alpha check.

    Returns the new solver state, the new signal state, and whether alpha
    was decreased at the end of this round.
    """
    board = ExchangeBoard(w.graph) if board is None else board
    state = _inner_step(state, inst, w, cfg, board)
    if state.status == DIVERGED:
        return state, sig, False
    own = np.diag(sig.bits)
    senders = np.flatnonzero((state.grad_norms <= cfg.tol) & ~own)
    sig = sig.deliver(senders)
    if not sig.synchronous():
        raise RuntimeError("signal vectors out of sync")
    return _maybe_update_alpha(state, sig, cfg)


def run_adaptive(inst: ProblemInstance, w: WeightMatrix, method: str, cfg: AdaptiveConfig,
                 stop: StoppingRule | None = None, y0=None,
                 board: ExchangeBoard | None = None, callback=None) -> MetricsTrace:
    """Run ANN-K (``"ANN-K"``) or adaptive DGD (``"ADGD"``) and record metrics.

    ``callback(state, sig)`` sees the solver and signal state after every round.

    ``trace.meta["alpha_updates"]`` lists ``(t, old_alpha, new_alpha, worst)``
    per decrease, where ``worst`` is the largest over nodes of the smallest
    gradient norm that node reached during the closing epoch.
    """
    family, K = parse_method(method)
    if family not in ("ANN", "ADGD"):
        raise ValueError(f"{method!r} is not an adaptive method")
    cfg = replace(cfg, K=K if family == "ANN" else None)
    stop = stop or StoppingRule()
    board = ExchangeBoard(w.graph) if board is None else board
    monitor = Monitor(inst, w)
    name = f"ANN-{K}" if family == "ANN" else "ADGD"
    trace = MetricsTrace(method=name, K=K, seed=inst.seed,
                         meta={"alpha0": cfg.alpha0, "eta": cfg.eta, "tol": cfg.tol,
                               "alpha_min": cfg.alpha_min, "epsilon": cfg.epsilon,
                               "inner_loop": cfg.inner_loop, "instance": inst.fingerprint(),
                               "n": inst.n, "p": inst.p, "d": w.graph.d, "alpha_updates": []})
    state = SolverState.initial(inst, cfg.alpha0, y0)
    sig = SignalState.initial(inst.n)
    epoch_best = np.full(inst.n, np.inf)

    rec = monitor.record(trace, state.y, 0, state.alpha, 0, 0)
    reason = DIVERGED if rec is None else stop.fired(0, *rec)
    while reason is None:
        old_alpha = state.alpha
        if cfg.inner_loop:
            state, sig, updated = _inner_loop_round(state, sig, inst, w, cfg, board, epoch_best)
        else:
            state, sig, updated = ann_round(state, sig, inst, w, cfg, board)
        if callback is not None:
            callback(state, sig)
        if state.status == DIVERGED:
            reason = DIVERGED
            break
        epoch_best = np.minimum(epoch_best, state.grad_norms)
        if updated:
            trace.meta["alpha_updates"].append((state.t, old_alpha, state.alpha, float(epoch_best.max())))
            epoch_best = np.full(inst.n, np.inf)
        rec = monitor.record(trace, state.y, state.t, state.alpha,
                             state.comm_exchanges, sig.signal_msgs)
        if rec is None:
            reason = DIVERGED
            break
        reason = stop.fired(state.t, *rec)
    trace.stop_reason = reason
    trace.status = DIVERGED if reason == DIVERGED else STOPPED
    trace.final_y = state.y
    trace.meta["broadcasts"] = sig.broadcasts
    return trace


def _inner_loop_round(state, sig, inst, w, cfg, board, epoch_best):
    """Round of the inner-loop formulation.

    Every node keeps stepping in lockstep (neighbors still need its
    blocks), but only reports once its own loop condition has been met at
    some round of the epoch; the broadcast happens when the last node
    finishes.
    """
    state = _inner_step(state, inst, w, cfg, board)
    if state.status == DIVERGED:
        return state, sig, False
    finished = np.minimum(epoch_best, state.grad_norms) <= cfg.tol
    if finished.all() and not sig.all_set():
        sig = sig.deliver(np.flatnonzero(~np.diag(sig.bits)))
    return _maybe_update_alpha(state, sig, cfg)
