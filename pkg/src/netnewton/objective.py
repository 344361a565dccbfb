"""
Local objectives and the randomized quadratic benchmark family.
"""

from __future__ import annotations

import hashlib
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

#: Identifier of the random stream used by :func:`generate_quadratic_family`.
RNG_ALGORITHM = "numpy.PCG64/SeedSequence(seed,spawn_key=(0,node))"


class ObjectiveError(ValueError):
    pass


class LocalObjective(ABC):
    """Smooth strongly convex function held by one node.

    Subclasses declare Hessian eigenvalue bounds ``m`` and ``M``.
    """

    m: float
    M: float

    @abstractmethod
    def value(self, x: np.ndarray) -> float: ...

    @abstractmethod
    def gradient(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def hessian(self, x: np.ndarray) -> np.ndarray: ...

    #: True when ``hessian`` is always diagonal; enables entrywise inversion.
    diagonal_hessian: bool = False


class QuadraticLocal(LocalObjective):
    """``f(x) = 1/2 x^T diag(a) x + b^T x`` with a positive diagonal."""

    diagonal_hessian = True

    def __init__(self, a, b):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise ObjectiveError("a and b must be vectors of equal length")
        if not np.all(self.a > 0):
            raise ObjectiveError("diagonal must be positive")
        self.m = float(self.a.min())
        self.M = float(self.a.max())

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (self.a * x) + self.b @ x)

    def gradient(self, x):
        return self.a * np.asarray(x, dtype=float) + self.b

    def hessian(self, x):
        return np.diag(self.a)


@dataclass(frozen=True)
class ProblemInstance:
    """n local objectives over a common dimension p.

    For an all-quadratic instance the batched arrays ``a`` and ``b``
    (shape ``(n, p)``) are populated and evaluations are vectorized.
    """

    locals: tuple
    p: int
    seed: int | None = None
    xi: int | None = None
    xstar: np.ndarray | None = field(default=None, repr=False)
    a: np.ndarray | None = field(default=None, repr=False)
    b: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.locals)

    @property
    def is_quadratic(self) -> bool:
        return self.a is not None

    @cached_property
    def diagonal_hessians(self) -> bool:
        return all(f.diagonal_hessian for f in self.locals)

    @property
    def m(self) -> float:
        return min(f.m for f in self.locals)

    @property
    def M(self) -> float:
        return max(f.M for f in self.locals)

    # batched evaluations over stacked iterates X of shape (n, p)

    def values(self, X: np.ndarray) -> np.ndarray:
        if self.is_quadratic:
            return 0.5 * np.sum(self.a * X * X, axis=1) + np.sum(self.b * X, axis=1)
        return np.array([f.value(x) for f, x in zip(self.locals, X)])

    def gradients(self, X: np.ndarray) -> np.ndarray:
        if self.is_quadratic:
            return self.a * X + self.b
        return np.array([f.gradient(x) for f, x in zip(self.locals, X)])

    def hessian_diagonals(self, X: np.ndarray) -> np.ndarray:
        if self.is_quadratic:
            return self.a
        return np.array([np.diag(f.hessian(x)) for f, x in zip(self.locals, X)])

    def hessians(self, X: np.ndarray) -> np.ndarray:
        if self.is_quadratic:
            return np.einsum("ij,jk->ijk", self.a, np.eye(self.p))
        return np.array([f.hessian(x) for f, x in zip(self.locals, X)])

    def global_value(self, x: np.ndarray) -> float:
        """Aggregate objective ``sum_i f_i(x)`` at a common point."""
        return float(self.values(np.broadcast_to(x, (self.n, self.p))).sum())

    def fingerprint(self) -> str:
        """Short content hash used to assert paired-instance discipline."""
        h = hashlib.sha256()
        h.update(np.array([self.n, self.p]).tobytes())
        if self.is_quadratic:
            h.update(np.ascontiguousarray(self.a).tobytes())
            h.update(np.ascontiguousarray(self.b).tobytes())
        else:
            h.update(repr([type(f).__name__ for f in self.locals]).encode())
        return h.hexdigest()[:16]


def node_rng(seed: int, i: int) -> np.random.Generator:
    """Independent stream for node ``i``; does not depend on generation order."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(0, i))))


def from_quadratic_arrays(a, b, seed=None, xi=None) -> ProblemInstance:
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    if a.ndim != 2 or a.shape != b.shape:
        raise ObjectiveError(f"a and b must both have shape (n, p), got {a.shape} and {b.shape}")
    locs = tuple(QuadraticLocal(ai, bi) for ai, bi in zip(a, b))
    a.setflags(write=False)
    b.setflags(write=False)
    inst = ProblemInstance(locs, a.shape[1], seed=seed, xi=xi, a=a, b=b)
    xs = global_optimum(inst)
    xs.setflags(write=False)
    object.__setattr__(inst, "xstar", xs)
    return inst


def generate_quadratic_family(n: int, p: int, xi: int, seed: int) -> ProblemInstance:
    """Random diagonal quadratics with local condition numbers up to ``10**(2 xi)``.

    The first ``p/2`` diagonal entries of each ``A_i`` are drawn uniformly
    from ``{1, 10^-1, ..., 10^-xi}``, the last ``p/2`` from
    ``{1, 10, ..., 10^xi}``; each ``b_i`` is uniform on ``[0, 1]^p``.
    """
    if n < 1:
        raise ObjectiveError(f"need n >= 1, got {n}")
    if p < 2 or p % 2:
        raise ObjectiveError(f"dimension must be a positive even integer, got {p}")
    if int(xi) != xi or xi < 0:
        raise ObjectiveError(f"condition exponent must be a nonnegative integer, got {xi}")
    xi = int(xi)
    half = p // 2
    exps = np.arange(xi + 1)
    a = np.empty((n, p))
    b = np.empty((n, p))
    for i in range(n):
        rng = node_rng(seed, i)
        a[i, :half] = 10.0 ** -rng.choice(exps, size=half)
        a[i, half:] = 10.0 ** rng.choice(exps, size=half)
        b[i] = rng.uniform(0.0, 1.0, size=p)
    return from_quadratic_arrays(a, b, seed=seed, xi=xi)


def global_optimum(inst: ProblemInstance) -> np.ndarray:
    """Closed-form minimizer ``-(sum A_i)^{-1} sum b_i`` of the aggregate quadratic."""
    if not inst.is_quadratic:
        raise ObjectiveError("closed-form optimum only exists for the quadratic family")
    A = np.diag(inst.a.sum(axis=0))
    if not np.all(np.isfinite(A)) or np.linalg.cond(A) > 1e15:
        raise ObjectiveError("aggregate Hessian is singular")
    return np.linalg.solve(A, -inst.b.sum(axis=0))


def condition_number(inst: ProblemInstance) -> float:
    """Condition number of the aggregate Hessian ``sum A_i``."""
    if not inst.is_quadratic:
        raise ObjectiveError("condition number needs the quadratic family")
    s = inst.a.sum(axis=0)
    return float(s.max() / s.min())


# --- instance files ---------------------------------------------------------

def instance_to_dict(inst: ProblemInstance, explicit: bool = True) -> dict:
    if not inst.is_quadratic:
        raise ObjectiveError("only quadratic instances are serializable")
    doc = {"format": "netnewton-instance/1", "n": inst.n, "p": inst.p, "xi": inst.xi,
           "seed": inst.seed, "rng": RNG_ALGORITHM}
    if explicit:
        # repr round-trips exactly through json
        doc["A_diag"] = inst.a.tolist()
        doc["b"] = inst.b.tolist()
    return doc


def instance_from_dict(doc: dict) -> ProblemInstance:
    if "A_diag" in doc:
        inst = from_quadratic_arrays(doc["A_diag"], doc["b"], seed=doc.get("seed"), xi=doc.get("xi"))
        if inst.n != doc.get("n", inst.n) or inst.p != doc.get("p", inst.p):
            raise ObjectiveError("explicit arrays disagree with declared n, p")
        return inst
    missing = [k for k in ("n", "p", "xi", "seed") if doc.get(k) is None]
    if missing:
        raise ObjectiveError(f"instance file lacks {missing} and has no explicit arrays")
    if doc.get("rng", RNG_ALGORITHM) != RNG_ALGORITHM:
        raise ObjectiveError(f"unsupported rng {doc['rng']!r}")
    return generate_quadratic_family(doc["n"], doc["p"], doc["xi"], doc["seed"])


def save_instance(inst: ProblemInstance, path, explicit: bool = True) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst, explicit), indent=1) + "\n")


def load_instance(path) -> ProblemInstance:
    return instance_from_dict(json.loads(Path(path).read_text()))
