"""
Per-iteration metrics and the trace container shared by all runners.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .objective import ProblemInstance
from .oracles import MAX_ORACLE_DIM, penalized_optimum
from .penalty import penalty_gradient, penalty_value
from .topology import WeightMatrix

COLUMNS = ("t", "alpha", "e_t", "f_gap", "comm_exchanges", "signal_msgs", "max_grad_norm")


def relative_error(y, xstar) -> float:
    """Average normalized squared distance ``(1/n) sum_i |x_i - x*|^2 / |x*|^2``."""
    Y = np.asarray(y, dtype=float)
    xs = np.asarray(xstar, dtype=float)
    if Y.ndim == 1:
        Y = Y.reshape(-1, xs.size)
    ref = float(xs @ xs)
    if ref == 0.0:
        raise ValueError("relative error is undefined for a zero optimum")
    return float(np.mean(np.sum((Y - xs) ** 2, axis=1)) / ref)


@dataclass
class StoppingRule:
    """Stop at ``max_iter`` or when ``e_t < target_e`` or ``max_i |g_i| <= target_grad``."""

    max_iter: int = 20_000
    target_e: float | None = None
    target_grad: float | None = None

    def fired(self, t: int, e: float, gmax: float) -> str | None:
        if self.target_e is not None and e < self.target_e:
            return "target_e"
        if self.target_grad is not None and gmax <= self.target_grad:
            return "target_grad"
        if t >= self.max_iter:
            return "max_iter"
        return None


@dataclass
class MetricsTrace:
    """Per-iteration records of one run plus run metadata.

    Column data is kept in ``data`` (one list per name in ``COLUMNS``);
    ``meta`` echoes method, K, seed, configuration and instance hash.
    """

    method: str
    K: int | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)
    data: dict = field(default_factory=lambda: {c: [] for c in COLUMNS})
    status: str = "running"
    stop_reason: str | None = None
    final_y: np.ndarray | None = field(default=None, repr=False)

    def append(self, **rec) -> None:
        for c in COLUMNS:
            self.data[c].append(rec[c])

    def __len__(self) -> int:
        return len(self.data["t"])

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.data[name], dtype=float)

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.data["t"], dtype=int)

    @property
    def e(self) -> np.ndarray:
        return self.column("e_t")

    @property
    def f_gap(self) -> np.ndarray:
        return self.column("f_gap")

    @property
    def alpha(self) -> np.ndarray:
        return self.column("alpha")

    @property
    def comm(self) -> np.ndarray:
        return np.asarray(self.data["comm_exchanges"], dtype=np.int64)

    @property
    def final_e(self) -> float:
        return float(self.data["e_t"][-1])

    def iterations_to(self, target_e: float) -> int | None:
        hits = np.flatnonzero(self.e < target_e)
        return int(self.t[hits[0]]) if hits.size else None


class Monitor:
    """Centralized observer computing trace metrics; not part of the protocol."""

    def __init__(self, inst: ProblemInstance, w: WeightMatrix, xstar=None):
        self.inst = inst
        self.w = w
        self.xstar = inst.xstar if xstar is None else np.asarray(xstar, dtype=float)
        self._fstar: dict[float, float] = {}
        self._ystar: dict[float, np.ndarray] = {}

    def ystar(self, alpha: float) -> np.ndarray | None:
        if alpha not in self._ystar:
            if not self.inst.is_quadratic or self.inst.n * self.inst.p > MAX_ORACLE_DIM:
                return None
            ys = penalized_optimum(self.inst, self.w, alpha)
            self._ystar[alpha] = ys
            self._fstar[alpha] = penalty_value(ys, self.inst, self.w, alpha)
        return self._ystar[alpha]

    def record(self, trace: MetricsTrace, Y, t, alpha, comm, signal_msgs=0):
        """Append one record; returns ``(e, max_grad)`` or None if a metric is non-finite."""
        e = relative_error(Y, self.xstar) if self.xstar is not None else float("nan")
        gap = float("nan")
        if self.ystar(alpha) is not None:
            gap = penalty_value(Y, self.inst, self.w, alpha) - self._fstar[alpha]
        gmax = float(np.linalg.norm(penalty_gradient(Y, self.inst, self.w, alpha), axis=1).max())
        if not np.isfinite(gmax) or np.isinf(e) or np.isinf(gap):
            return None
        trace.append(t=t, alpha=alpha, e_t=e, f_gap=gap, comm_exchanges=comm,
                     signal_msgs=signal_msgs, max_grad_norm=gmax)
        return e, gmax
