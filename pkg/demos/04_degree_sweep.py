"""
Exchanges to reach e_t < 1e-2 across random realizations
========================================================

Each realization draws a new quadratic and a new even degree in [2, 10].
All four methods see the same instance. Realizations whose penalized
optimum sits above the target never get there; they are counted
separately.
"""

import sys

from netnewton.harness import ExperimentConfig, run_experiment, summarize_counts, sweep_counts

reals = int(sys.argv[1]) if len(sys.argv) > 1 else 10
cfg = ExperimentConfig(realizations=reals, degrees=[2, 4, 6, 8, 10],
                       target_e=1e-2, target_grad=1e-9, max_iter=20_000)
traces = run_experiment(cfg)

print(f"{'method':<6} {'reached':>8} {'mean':>8} {'median':>8} {'q1':>8} {'q3':>8}")
for method, counts in sweep_counts(traces, 1e-2).items():
    s = summarize_counts(counts)
    if s["reached"]:
        print(f"{method:<6} {s['reached']:>4}/{s['runs']:<3} {s['mean']:8.1f} {s['median']:8.1f} "
              f"{s['q1']:8.1f} {s['q3']:8.1f}")
    else:
        print(f"{method:<6} {0:>4}/{s['runs']:<3}")

# which realizations missed, and where they stalled
for tr in traces:
    if tr.method == "NN-1" and tr.stop_reason != "target_e":
        print(f"  realization {tr.meta['realization']} (d={tr.meta['d']}) stalls at e_t={tr.final_e:.3e}")
