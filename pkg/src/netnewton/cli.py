"""Command-line entry point: ``netnewton {validate,run,sweep,oracle}``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import harness
from .harness import ConfigError, ExperimentConfig, HarnessIOError
from .solver import DIVERGED
from .verify import equivalence_suite, setup_checks

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_IO = 3


def _line(c) -> str:
    return f"{'PASS' if c.passed else 'FAIL'} {c.name:<18} {c.violation:.3e} {c.detail}".rstrip()


def _load(args) -> ExperimentConfig:
    cfg = harness.load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    cfg.validate()
    return cfg


def _cmd_validate(args, say) -> int:
    cfg = harness.single_run(_load(args))
    w, inst = harness.build_realization(cfg, 0)
    checks = setup_checks(w, inst, cfg.alpha)
    for c in checks:
        say(_line(c))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CONFIG


def _write_traces(traces, args, say) -> None:
    if args.out:
        harness.emit_csv(traces, args.out)
        say(f"wrote {args.out}")
    elif not args.quiet:
        sys.stdout.write(harness.traces_to_csv(traces))


def _cmd_run(args, say) -> int:
    cfg = harness.single_run(_load(args))
    traces = harness.run_experiment(cfg)
    for tr in traces:
        say(f"# {tr.method:<6} status={tr.status} stop={tr.stop_reason} t={int(tr.t[-1])} "
            f"e={tr.final_e:.3e} exchanges={int(tr.comm[-1])}", err=bool(not args.out))
    _write_traces(traces, args, say)
    return EXIT_DIVERGED if any(tr.status == DIVERGED for tr in traces) else EXIT_OK


def _cmd_sweep(args, say) -> int:
    cfg = _load(args)
    if args.realizations is not None:
        cfg = replace(cfg, realizations=args.realizations)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    cfg.validate()
    traces = harness.run_experiment(cfg)
    target = cfg.sweep_target
    rows = ["realization,seed,d,method,K,exchanges"]
    for tr in traces:
        c = harness.exchanges_to_target(tr, target)
        rows.append(f"{tr.meta['realization']},{tr.seed},{tr.meta['d']},{tr.method},"
                    f"{'' if tr.K is None else tr.K},{'' if c is None else c}")
    counts_text = "\n".join(rows) + "\n"
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(counts_text)
        except OSError as exc:
            raise HarnessIOError(f"cannot write {args.out}: {exc.strerror}") from None
    elif not args.quiet:
        sys.stdout.write(counts_text)
    if args.traces:
        harness.emit_csv(traces, args.traces)
    for method, counts in harness.sweep_counts(traces, target).items():
        s = harness.summarize_counts(counts)
        if s["reached"]:
            say(f"# {method:<6} reached {s['reached']}/{s['runs']} mean={s['mean']:.1f} "
                f"median={s['median']:.1f} q1={s['q1']:.1f} q3={s['q3']:.1f}", err=True)
        else:
            say(f"# {method:<6} reached 0/{s['runs']}", err=True)
    return EXIT_DIVERGED if any(tr.status == DIVERGED for tr in traces) else EXIT_OK


def _cmd_oracle(args, say) -> int:
    checks = equivalence_suite(count=args.instances, seed=0 if args.seed is None else args.seed)
    for c in checks:
        say(_line(c))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_DIVERGED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netnewton", description="Network Newton consensus experiments.")
    ap.add_argument("--emit-default-config", action="store_true",
                    help="print a commented configuration template and exit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment configuration file")
    common.add_argument("--out", help="output path")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--quiet", action="store_true", help="suppress console output")
    sub = ap.add_subparsers(dest="command")
    sub.add_parser("validate", parents=[common], help="check topology, weights and instance")
    sub.add_parser("run", parents=[common], help="run every method on one realization, write CSV traces")
    sw = sub.add_parser("sweep", parents=[common], help="exchanges-to-target over many realizations")
    sw.add_argument("--realizations", type=int, help="override the number of realizations")
    sw.add_argument("--workers", type=int, help="threads running realizations in parallel")
    sw.add_argument("--traces", help="also write the full traces CSV here")
    orc = sub.add_parser("oracle", parents=[common], help="dense-oracle equivalence suite")
    orc.add_argument("--instances", type=int, default=100)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.emit_default_config:
        sys.stdout.write(harness.default_config_text())
        return EXIT_OK
    if args.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_CONFIG

    def say(msg: str, err: bool = False) -> None:
        if not args.quiet:
            print(msg, file=sys.stderr if err else sys.stdout)

    handlers = {"validate": _cmd_validate, "run": _cmd_run, "sweep": _cmd_sweep, "oracle": _cmd_oracle}
    try:
        # diverging runs overflow by design; the exit code reports it
        with np.errstate(over="ignore", invalid="ignore"):
            return handlers[args.command](args, say)
    except HarnessIOError as exc:
        print(f"netnewton: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"netnewton: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
