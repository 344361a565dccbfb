import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netnewton import oracles
from netnewton.adaptive import AdaptiveConfig, SignalState, ann_round, run_adaptive
from netnewton.metrics import StoppingRule
from netnewton.solver import NNConfig, SolverState, run_fixed_alpha

from conftest import random_setup


def test_all_nodes_converged_same_round(rng):
    inst, w = random_setup(rng, n=6, p=2)
    ys = oracles.penalized_optimum(inst, w, 0.1)
    cfg = AdaptiveConfig(alpha0=0.1, eta=0.5, tol=1e-6, K=1)
    state, sig, updated = ann_round(SolverState(ys, 0.1), SignalState.initial(6), inst, w, cfg)
    assert updated and state.alpha == pytest.approx(0.05)
    assert not sig.bits.any()
    assert sig.signal_msgs == 6 * 5 and sig.broadcasts == 6


def test_no_node_converged(rng):
    inst, w = random_setup(rng, n=6, p=2)
    cfg = AdaptiveConfig(alpha0=0.1, tol=1e-12, K=1)
    state, sig, updated = ann_round(SolverState.initial(inst, 0.1), SignalState.initial(6), inst, w, cfg)
    assert not updated and state.alpha == 0.1
    assert not sig.bits.any() and sig.signal_msgs == 0


def test_partial_signals_stay_synchronous(rng):
    inst, w = random_setup(rng, n=6, p=2)
    ys = oracles.penalized_optimum(inst, w, 0.1)
    Y = ys.copy()
    Y[0] += 1.0  # node 0 and its neighbors are far from stationary
    cfg = AdaptiveConfig(alpha0=0.1, tol=1e-3, K=0)
    state, sig, updated = ann_round(SolverState(Y, 0.1), SignalState.initial(6), inst, w, cfg)
    assert not updated
    assert sig.synchronous() and 0 < sig.bits[0].sum() < 6
    assert not sig.bits[:, 0].any()


def test_alpha_schedule_visits_decades(benchmark_setup):
    w, inst = benchmark_setup
    cfg = AdaptiveConfig(alpha0=1e-1, eta=0.1, tol=1e-3)
    tr = run_adaptive(inst, w, "ANN-2", cfg, stop=StoppingRule(max_iter=400))
    alphas = tr.alpha
    distinct = [alphas[0]] + [b for a, b in zip(alphas, alphas[1:]) if b != a]
    assert len(distinct) >= 4
    for k, a in enumerate(distinct):
        assert a == pytest.approx(1e-1 * 0.1**k, rel=1e-12)
    # every alpha value is held for at least one recorded round after t=0
    assert all(np.sum(alphas == a) >= 1 for a in distinct)


def test_floor_reduces_to_fixed_alpha(rng):
    inst, w = random_setup(rng, n=8, p=2, d=4)
    cfg = AdaptiveConfig(alpha0=0.1, eta=0.1, tol=1.0, alpha_min=0.1)
    stop = StoppingRule(max_iter=60)
    ad = run_adaptive(inst, w, "ANN-1", cfg, stop=stop)
    fx = run_fixed_alpha(inst, w, "NN-1", 0.1, NNConfig(), stop=stop)
    assert not ad.meta["alpha_updates"]
    for c in ("e_t", "f_gap", "comm_exchanges", "max_grad_norm", "alpha"):
        assert ad.data[c] == fx.data[c]
    assert ad.data["signal_msgs"][-1] == 8 * 7


@pytest.mark.parametrize("method", ["ANN-0", "ANN-2", "ADGD"])
def test_adaptive_invariants(benchmark_setup, method):
    w, inst = benchmark_setup
    cfg = AdaptiveConfig(alpha0=1e-2, eta=0.1, tol=1e-3)
    tr = run_adaptive(inst, w, method, cfg, stop=StoppingRule(max_iter=800))
    a = tr.alpha
    assert np.all(np.diff(a) <= 0)
    drops = np.flatnonzero(np.diff(a) < 0)
    assert drops.size == len(tr.meta["alpha_updates"]) > 0
    assert np.allclose(a[drops + 1] / a[drops], 0.1, rtol=1e-14)
    for t, old, new, worst in tr.meta["alpha_updates"]:
        assert worst <= cfg.tol
    # one broadcast per node per epoch at most
    epochs = len(tr.meta["alpha_updates"]) + 1
    assert tr.meta["broadcasts"] <= inst.n * epochs
    assert np.all(np.diff(tr.column("signal_msgs")) >= 0)
    assert np.all(np.diff(tr.comm) > 0)


def test_inner_loop_variant_has_same_epochs(benchmark_setup):
    w, inst = benchmark_setup
    stop = StoppingRule(max_iter=600)
    a = run_adaptive(inst, w, "ANN-1", AdaptiveConfig(alpha0=1e-1), stop=stop)
    b = run_adaptive(inst, w, "ANN-1", AdaptiveConfig(alpha0=1e-1, inner_loop=True), stop=stop)
    assert [u[:3] for u in a.meta["alpha_updates"]] == [u[:3] for u in b.meta["alpha_updates"]]
    assert a.data["e_t"] == b.data["e_t"]
    assert a.meta["broadcasts"] == b.meta["broadcasts"]


def test_adaptive_dgd_divergence_reported(benchmark_setup):
    # unit-step DGD is unstable once alpha * max(a_i) is large
    w, inst = benchmark_setup
    tr = run_adaptive(inst, w, "ADGD", AdaptiveConfig(alpha0=1e-1), stop=StoppingRule(max_iter=2000))
    assert tr.status == "diverged"


def test_config_validation():
    with pytest.raises(ValueError):
        AdaptiveConfig(eta=1.0)
    with pytest.raises(ValueError):
        AdaptiveConfig(tol=0.0)
    with pytest.raises(ValueError):
        AdaptiveConfig(alpha0=1e-3, alpha_min=1e-2)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.lists(st.lists(st.integers(0, 11), max_size=5), max_size=12))
def test_signal_board_sync_and_stickiness(n, rounds):
    sig = SignalState.initial(n)
    seen = set()
    for senders in rounds:
        senders = sorted({s for s in senders if s < n} - seen)
        before = sig.bits.copy()
        sig = sig.deliver(senders)
        seen |= set(senders)
        assert sig.synchronous()
        assert np.all(sig.bits >= before)
        assert set(np.flatnonzero(sig.bits[0])) == seen
    assert sig.signal_msgs == len(seen) * (n - 1) <= n * (n - 1)
    assert not sig.reset().bits.any()
