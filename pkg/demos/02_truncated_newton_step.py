"""
How good is a truncated Newton step?
====================================

The NN-K direction sums the first K + 1 terms of a series for the
inverse Hessian of the penalized objective. Each extra term costs one
round of neighbor exchange. Here we compare the distributed direction
with the exact Newton direction on a small network, and check that each
node only ever read its neighbors' blocks.
"""

import numpy as np

from netnewton import build_regular_cycle, build_split, build_weights, generate_quadratic_family, nn_direction
from netnewton import oracles
from netnewton.network import ExchangeBoard
from netnewton.penalty import penalty_gradient

w = build_weights(build_regular_cycle(12, 2))
inst = generate_quadratic_family(12, 4, 2, seed=3)
rng = np.random.default_rng(0)
Y = rng.normal(size=(12, 4))

for alpha in (1e-1, 1e-2):
    G = penalty_gradient(Y, inst, w, alpha)
    split = build_split(Y, inst, w, alpha)
    exact = oracles.newton_direction(Y, inst, w, alpha)
    rho = oracles.spectral_radius(oracles.normalized_coupling(Y, inst, w, alpha))
    print(f"alpha={alpha:g}: spectral radius of the normalized coupling {rho:.4f}")
    for K in (0, 1, 2, 4, 8, 16):
        d = nn_direction(None, split, G, K, ExchangeBoard(w.graph))
        err = np.linalg.norm(d - exact) / np.linalg.norm(exact)
        cos = np.sum(d * exact) / np.linalg.norm(d) / np.linalg.norm(exact)
        print(f"  K={K:2d}  rel err {err:.3e}  cosine {cos:.6f}")

# Smaller alpha pushes the radius toward 1 and the series converges more
# slowly. Every truncation still has a positive inner product with the
# exact step, which is what descent needs.

# %% locality
log = []
board = ExchangeBoard(w.graph, read_log=log)
nn_direction(None, build_split(Y, inst, w, 1e-2), penalty_gradient(Y, inst, w, 1e-2), 3, board)
far = [(i, j) for i, j in log if j not in w.graph.neighborhood(i)]
print(f"\n{len(log)} reads over {board.rounds} exchange rounds, {len(far)} outside a neighborhood")
