"""
Dense-oracle equivalence suite and setup checks.

Everything here runs at oracle scale and compares the distributed
kernels against explicit Kronecker-form linear algebra.
"""

from __future__ import annotations

import numpy as np

from . import oracles
from .network import ExchangeBoard
from .objective import ProblemInstance, from_quadratic_arrays, global_optimum
from .penalty import build_split, penalty_gradient
from .solver import SolverState, dgd_step, exact_newton_step_oracle, nn_direction
from .topology import Check, WeightMatrix, build_regular_cycle, build_weights, validate_weights


def _rel(a, b) -> float:
    den = np.linalg.norm(np.ravel(b))
    return float(np.linalg.norm(np.ravel(a) - np.ravel(b)) / (den if den > 0 else 1.0))


def random_small_setup(rng: np.random.Generator):
    """Random quadratic instance with n in 3..8, p in 1..3, d in {2, 4} and d < n."""
    n = int(rng.integers(3, 9))
    p = int(rng.integers(1, 4))
    d = int(rng.choice([dd for dd in (2, 4) if dd < n]))
    a = 10.0 ** rng.integers(-1, 2, size=(n, p))
    b = rng.uniform(size=(n, p))
    return from_quadratic_arrays(a, b), build_weights(build_regular_cycle(n, d))


def equivalence_suite(count: int = 100, seed: int = 0, kmax: int = 4) -> list[Check]:
    """Compare the distributed kernels with dense oracles on ``count`` random instances.

    Returns one :class:`Check` per property, carrying the worst violation
    seen across all instances.
    """
    rng = np.random.default_rng(seed)
    worst = {"direction": 0.0, "split": 0.0, "coupling_radius": 0.0,
             "gradient": 0.0, "dgd_fixed_point": 0.0, "newton_one_step": 0.0}
    for _ in range(count):
        inst, w = random_small_setup(rng)
        alpha = float(rng.choice([1e-1, 1e-2]))
        Y = rng.normal(size=(inst.n, inst.p))
        G = penalty_gradient(Y, inst, w, alpha)
        split = build_split(Y, inst, w, alpha)
        for K in range(kmax + 1):
            d = nn_direction(None, split, G, K, ExchangeBoard(w.graph))
            worst["direction"] = max(worst["direction"], _rel(d, oracles.truncated_direction(Y, inst, w, alpha, K)))

        D, B = oracles.dense_split(Y, inst, w, alpha)
        H = oracles.dense_hessian(Y, inst, w, alpha)
        worst["split"] = max(worst["split"], float(np.abs(D - B - H).max()))
        rho = oracles.spectral_radius(oracles.normalized_coupling(Y, inst, w, alpha))
        worst["coupling_radius"] = max(worst["coupling_radius"], rho)
        worst["gradient"] = max(worst["gradient"], _rel(G, oracles.dense_gradient(Y, inst, w, alpha)))

        ys = oracles.penalized_optimum(inst, w, alpha)
        moved = dgd_step(SolverState(ys, alpha), inst, w).y
        worst["dgd_fixed_point"] = max(worst["dgd_fixed_point"], _rel(moved, ys))
        jumped = exact_newton_step_oracle(SolverState(10 * Y, alpha), inst, w).y
        worst["newton_one_step"] = max(worst["newton_one_step"], _rel(jumped, ys))

    tol = {"direction": 1e-11, "split": 1e-12, "gradient": 1e-12,
           "dgd_fixed_point": 1e-10, "newton_one_step": 1e-9}
    out = [Check(k, worst[k] <= tol[k], worst[k], f"tol={tol[k]:g}") for k in tol]
    out.insert(2, Check("coupling_radius", worst["coupling_radius"] < 1.0,
                        worst["coupling_radius"], "need < 1"))
    return out


def setup_checks(w: WeightMatrix, inst: ProblemInstance, alpha: float) -> list[Check]:
    """Weight checks plus sanity checks of the instance on that topology."""
    checks = list(validate_weights(w).checks)
    checks.append(Check("same_size", inst.n == w.n, float(abs(inst.n - w.n)),
                        f"instance n={inst.n}, topology n={w.n}"))
    checks.append(Check("strong_convexity", inst.m > 0, max(0.0, -inst.m),
                        f"m={inst.m:.3e} M={inst.M:.3e}"))
    if inst.is_quadratic:
        x = global_optimum(inst)
        S = inst.a.sum(axis=0)
        res = _rel(S * x, -inst.b.sum(axis=0))
        checks.append(Check("optimum_residual", res < 1e-12, res))
    if inst.n * inst.p <= oracles.MAX_ORACLE_DIM and inst.n == w.n:
        Y = np.zeros((inst.n, inst.p))
        rho = oracles.spectral_radius(oracles.normalized_coupling(Y, inst, w, alpha))
        checks.append(Check("coupling_radius", rho < 1.0, rho, f"alpha={alpha:g}"))
    return checks
