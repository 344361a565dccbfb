"""
Experiment runner, configuration files and CSV output.

Config files are flat ``key = value`` text; ``#`` starts a comment.
Lists are comma separated and edges are written ``i-j``. Unknown keys
are rejected.
"""

from __future__ import annotations

import configparser
import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .adaptive import AdaptiveConfig, run_adaptive
from .metrics import COLUMNS, MetricsTrace, StoppingRule, relative_error
from .objective import ObjectiveError, generate_quadratic_family, load_instance
from .solver import NNConfig, parse_method, run_fixed_alpha
from .topology import TopologyError, build_regular_cycle, build_weights, graph_from_edges

CSV_COLUMNS = ("run_id", "method", "K", "seed") + COLUMNS


class ConfigError(ValueError):
    pass


class HarnessIOError(OSError):
    pass


@dataclass
class ExperimentConfig:
    # topology
    n: int = 100
    d: int = 4
    edges: list | None = None
    # objective
    p: int = 4
    xi: int = 2
    seed: int = 0
    instance_file: str | None = None
    # methods: DGD, NN-K, ANN-K, ADGD
    methods: list = field(default_factory=lambda: ["DGD", "NN-0", "NN-1", "NN-2"])
    alpha: float = 1e-2
    epsilon: float = 1.0
    # adaptive schedule
    alpha0: float = 1e-2
    eta: float = 0.1
    tol: float = 1e-3
    alpha_min: float = 1e-8
    inner_loop: bool = False
    # stopping
    max_iter: int = 20_000
    target_e: float | None = None
    target_grad: float | None = None
    # sweeps
    realizations: int = 100
    degrees: list | None = None
    sweep_target: float = 1e-2
    workers: int = 1

    def stopping(self) -> StoppingRule:
        return StoppingRule(self.max_iter, self.target_e, self.target_grad)

    def adaptive(self) -> AdaptiveConfig:
        return AdaptiveConfig(self.alpha0, self.eta, self.tol, self.alpha_min,
                              epsilon=self.epsilon, inner_loop=self.inner_loop)

    def validate(self) -> None:
        """Check cross-module preconditions; raise :class:`ConfigError` naming the key."""
        for m in self.methods:
            try:
                parse_method(m)
            except ValueError as exc:
                raise ConfigError(f"methods: {exc}") from None
        checks = [
            ("alpha", self.alpha > 0, "must be positive"),
            ("max_iter", self.max_iter >= 0, "must be nonnegative"),
            ("realizations", self.realizations >= 1, "must be at least 1"),
            ("workers", self.workers >= 1, "must be at least 1"),
            ("sweep_target", self.sweep_target > 0, "must be positive"),
        ]
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(f"{key}: {msg}")
        try:
            NNConfig(0, self.epsilon)
        except ValueError as exc:
            raise ConfigError(f"epsilon: {exc}") from None
        if any(parse_method(m)[0] in ("ANN", "ADGD") for m in self.methods):
            try:
                self.adaptive()
            except ValueError as exc:
                raise ConfigError(f"alpha0/eta/tol/alpha_min: {exc}") from None
        if self.degrees is not None and self.edges is not None:
            raise ConfigError("degrees: cannot randomize the degree of an explicit edge list")
        if self.instance_file is not None and self.degrees is not None:
            raise ConfigError("degrees: a fixed instance cannot be combined with random degrees")
        for dd in self.degrees or [self.d]:
            try:
                if self.edges is None:
                    build_regular_cycle(self.n, dd)
            except TopologyError as exc:
                raise ConfigError(f"{'degrees' if self.degrees else 'd'}: {exc}") from None
        if self.edges is not None:
            try:
                graph_from_edges(self.n, self.edges)
            except TopologyError as exc:
                raise ConfigError(f"edges: {exc}") from None
        if self.instance_file is None:
            if self.p < 2 or self.p % 2:
                raise ConfigError(f"p: dimension must be a positive even integer, got {self.p}")
            if self.xi < 0:
                raise ConfigError(f"xi: must be nonnegative, got {self.xi}")


# --- config files -----------------------------------------------------------

def _as_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _as_list(conv):
    def parse(s: str):
        return [conv(x.strip()) for x in s.split(",") if x.strip()]
    return parse


def _as_edge(s: str) -> tuple[int, int]:
    i, j = s.split("-")
    return int(i), int(j)


def _optional(conv):
    def parse(s: str):
        return None if s.strip().lower() in ("", "none") else conv(s)
    return parse


_PARSERS = {
    "n": int, "d": int, "edges": _optional(_as_list(_as_edge)),
    "p": int, "xi": int, "seed": int, "instance_file": _optional(str),
    "methods": _as_list(str), "alpha": float, "epsilon": float,
    "alpha0": float, "eta": float, "tol": float, "alpha_min": float, "inner_loop": _as_bool,
    "max_iter": int, "target_e": _optional(float), "target_grad": _optional(float),
    "realizations": int, "degrees": _optional(_as_list(int)), "sweep_target": float, "workers": int,
}


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    values = {}
    for key, raw in cp["experiment"].items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise HarnessIOError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def default_config_text() -> str:
    c = ExperimentConfig()
    return f"""\
# netnewton experiment configuration (flat key = value)
# topology: d-regular cycle on n nodes, or an explicit regular edge list "0-1, 1-2, ..."
n = {c.n}
d = {c.d}
# edges = none
# objective: quadratic family with p/2 + p/2 split and condition exponent xi
p = {c.p}
xi = {c.xi}
seed = {c.seed}
# instance_file = none
# methods: DGD, NN-K, ANN-K, ADGD
methods = {", ".join(c.methods)}
alpha = {c.alpha}
epsilon = {c.epsilon}
# adaptive schedule (ANN-K, ADGD)
alpha0 = {c.alpha0}
eta = {c.eta}
tol = {c.tol}
alpha_min = {c.alpha_min}
inner_loop = false
# stopping rules; the first satisfied one ends a run
max_iter = {c.max_iter}
target_e = none
target_grad = none
# sweeps: realization r uses seed + r; degrees, if set, are drawn per realization.
# `run` always uses realization 0 with degree d.
realizations = {c.realizations}
degrees = 2, 4, 6, 8, 10
sweep_target = {c.sweep_target}
workers = {c.workers}
"""


# --- runs -------------------------------------------------------------------

def realization_degree(cfg: ExperimentConfig, seed: int) -> int:
    if cfg.degrees is None:
        return cfg.d
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(1,))))
    return int(rng.choice(cfg.degrees))


def build_realization(cfg: ExperimentConfig, r: int):
    """Weights and instance of realization ``r`` (seed ``cfg.seed + r``)."""
    seed = cfg.seed + r
    if cfg.edges is not None:
        w = build_weights(graph_from_edges(cfg.n, cfg.edges))
    else:
        w = build_weights(build_regular_cycle(cfg.n, realization_degree(cfg, seed)))
    try:
        if cfg.instance_file is not None:
            inst = load_instance(cfg.instance_file)
        else:
            inst = generate_quadratic_family(cfg.n, cfg.p, cfg.xi, seed)
    except OSError as exc:
        raise HarnessIOError(f"cannot read instance {cfg.instance_file}: {exc.strerror}") from None
    except (ObjectiveError, KeyError, ValueError) as exc:
        key = "instance_file" if cfg.instance_file else "p/xi"
        raise ConfigError(f"{key}: {exc}") from None
    if inst.n != w.n:
        raise ConfigError(f"instance_file: instance has {inst.n} nodes, topology has {w.n}")
    return w, inst


def run_method(method: str, inst, w, cfg: ExperimentConfig) -> MetricsTrace:
    family, K = parse_method(method)
    stop = cfg.stopping()
    if family in ("DGD", "NN"):
        return run_fixed_alpha(inst, w, method, cfg.alpha, NNConfig(0, cfg.epsilon), stop)
    return run_adaptive(inst, w, method, cfg.adaptive(), stop)


def _run_realization(cfg: ExperimentConfig, r: int) -> list[MetricsTrace]:
    w, inst = build_realization(cfg, r)
    out = []
    for m, method in enumerate(cfg.methods):
        tr = run_method(method, inst, w, cfg)
        tr.meta.update(run_id=r * len(cfg.methods) + m, realization=r)
        out.append(tr)
    return out


def single_run(cfg: ExperimentConfig) -> ExperimentConfig:
    """The one-realization, fixed-degree version of ``cfg``."""
    return replace(cfg, realizations=1, degrees=None)


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> list[MetricsTrace]:
    """One trace per (realization, method), ordered by run id.

    Within a realization every method sees the same graph and instance.
    Realizations may run on ``workers`` threads; the output does not
    depend on the thread count.
    """
    cfg.validate()
    if not cfg.methods:
        return []
    workers = workers or cfg.workers
    reals = range(cfg.realizations)
    if workers <= 1:
        batches = [_run_realization(cfg, r) for r in reals]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(lambda r: _run_realization(cfg, r), reals))
    return [tr for batch in batches for tr in batch]


def exchanges_to_target(trace: MetricsTrace, target_e: float) -> int | None:
    """Communication exchanges elapsed at the first record with ``e_t < target_e``."""
    hits = np.flatnonzero(trace.e < target_e)
    return int(trace.comm[hits[0]]) if hits.size else None


def sweep_counts(traces, target_e: float) -> dict[str, list]:
    """Exchanges-to-target per method, one entry per realization (None if never reached)."""
    out: dict[str, list] = {}
    for tr in traces:
        out.setdefault(tr.method, []).append(exchanges_to_target(tr, target_e))
    return out


def summarize_counts(counts: list) -> dict:
    reached = np.array([c for c in counts if c is not None], dtype=float)
    s = {"runs": len(counts), "reached": int(reached.size)}
    if reached.size:
        q1, med, q3 = np.percentile(reached, [25, 50, 75])
        s.update(mean=float(reached.mean()), median=float(med), q1=float(q1), q3=float(q3))
    return s


# --- CSV --------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def traces_to_csv(traces) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    for idx, tr in enumerate(traces):
        run_id = tr.meta.get("run_id", idx)
        for row in zip(*(tr.data[c] for c in COLUMNS)):
            wr.writerow([_fmt(v) for v in (run_id, tr.method, tr.K, tr.seed, *row)])
    return buf.getvalue()


def emit_csv(traces, path) -> None:
    """Write traces with the fixed column order of ``CSV_COLUMNS``.

    Floats are written with ``repr`` so they parse back to the same value.
    """
    text = traces_to_csv(traces)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise HarnessIOError(f"cannot write {path}: {exc.strerror}") from None


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


__all__ = [
    "CSV_COLUMNS", "ConfigError", "ExperimentConfig", "HarnessIOError", "MetricsTrace",
    "build_realization", "default_config_text", "emit_csv", "exchanges_to_target",
    "load_config", "parse_config", "read_csv", "relative_error", "run_experiment", "single_run",
    "summarize_counts", "sweep_counts", "traces_to_csv",
]
