"""Seeded Monte Carlo trials and parameter sweeps.

A trial generates memberships, a fine SBM graph and a coarsening map, runs
the PROM and learned estimators plus the random baseline, and scores all
three against the true group controllability vector.

Random streams
--------------
Trial ``seed`` under ``master_seed`` draws stream ``s`` (0 = fine graph,
1 = coarsening map, 2 = baseline) from
``np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, seed, s])))``.
The derivation is stateless, so trials can run in any order or process.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml
from threadpoolctl import threadpool_limits

from . import __version__
from .coarsening import coarse_adjacency, coarse_membership, sample_coarsening
from .controllability import normalize, theta_fine
from .errors import CoarseCtrlError, ConfigError
from .estimators import baseline_vector, learned_theta, mm_community_estimate, prom_estimate
from .metrics import (
    alpha_empirical,
    baseline_error,
    delta_learned,
    delta_prom,
    thm1_diagnostics,
    thm2_diagnostics,
)
from .sbm import BlockModel, generate_membership, sample_fine_graph

log = logging.getLogger(__name__)

STREAM_GRAPH, STREAM_COARSENING, STREAM_BASELINE = 0, 1, 2
SWEEP_VARIABLES = ("m", "rho_n", "omega")
DEFAULT_SWEEP_VALUES = {
    "m": [50, 100, 150, 200],
    "rho_n": [0.05, 0.1, 0.2, 0.4],
    "omega": [float(f"{x:.6g}") for x in np.geomspace(0.005, 0.5, 8)],
}
METRICS = (
    "delta_prom",
    "delta_learned",
    "baseline_error",
    "alpha_n",
    "epsilon",
    "epsilon_tilde",
    "sync_bias",
    "balancedness_gap",
    "e_phi_norm",
    "e_p_max",
    "e_d_max",
)
TRIAL_COLUMNS = ("sweep_var", "sweep_value", "seed") + METRICS + ("wall_ms_total", "status")
THREADS_ENV = "COARSECTRL_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 5000
    m: int = 100
    r: int = 10
    K: int = 4
    p: float = 0.5
    q: float = 0.1
    rho_n: float = 0.1
    omega: float = 0.05
    pi: tuple | None = None
    a_fine: float = 1.0
    a_coarse: float = 1.0
    delta_prob: float = 0.05
    master_seed: int = 0
    seeds: tuple = tuple(range(20))
    sweep_var: str | None = None
    sweep_values: tuple = ()
    prune_quantile: float = 1.0
    perfect_sync: bool = False
    record_timing: bool = False
    output_dir: str = "runs"

    def validate(self) -> "ExperimentConfig":
        if min(self.n, self.m, self.r, self.K) < 1:
            raise ConfigError("n, m, r, K must be positive integers")
        if self.m * self.r > self.n:
            raise ConfigError(f"m * r = {self.m * self.r} exceeds n = {self.n}")
        if not 0 < self.rho_n <= 1:
            raise ConfigError(f"rho_n must lie in (0, 1], got {self.rho_n}")
        if not self.perfect_sync and not 0 < self.omega < 1:
            raise ConfigError(f"omega must lie in (0, 1), got {self.omega}")
        if not (0 <= self.p <= 1 and 0 <= self.q <= 1):
            raise ConfigError("p and q must lie in [0, 1]")
        if self.a_fine <= 0 or self.a_coarse <= 0:
            raise ConfigError("normalization constants must be positive")
        if not 0 < self.delta_prob < 1:
            raise ConfigError("delta_prob must lie in (0, 1)")
        if not 0 < self.prune_quantile <= 1:
            raise ConfigError("prune_quantile must lie in (0, 1]")
        if len(self.seeds) == 0:
            raise ConfigError("seed list is empty")
        if self.pi is not None and len(self.pi) != self.K:
            raise ConfigError(f"pi has {len(self.pi)} entries, K = {self.K}")
        if self.sweep_var is not None:
            if self.sweep_var not in SWEEP_VARIABLES:
                raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {self.sweep_var!r}")
            if len(self.sweep_values) == 0:
                raise ConfigError("sweep has no values")
            for v in self.sweep_values:
                self.at(v)._validate_point()
        return self

    def _validate_point(self):
        if self.m * self.r > self.n:
            raise ConfigError(f"sweep point m={self.m}: m * r exceeds n")
        if not 0 < self.rho_n <= 1 or not (self.perfect_sync or 0 < self.omega < 1):
            raise ConfigError("sweep point outside the valid parameter range")

    def at(self, value) -> "ExperimentConfig":
        """Copy of the config with the sweep variable set to ``value``."""
        if self.sweep_var is None:
            return self
        if self.sweep_var == "m":
            value = int(value)
        return dataclasses.replace(self, **{self.sweep_var: value})

    def block_model(self) -> BlockModel:
        return BlockModel.planted(self.K, self.p, self.q, self.rho_n, pi=self.pi)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["seeds"] = list(self.seeds)
        d["sweep_values"] = list(self.sweep_values)
        d["pi"] = None if self.pi is None else list(self.pi)
        return d


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a config from the YAML schema (see ``configs/defaults.yaml``)."""
    raw = dict(raw or {})
    kwargs = {}
    seeds = raw.pop("seeds", None)
    if isinstance(seeds, dict):
        count = seeds.get("count")
        if count is None:
            raise ConfigError("seeds mapping needs a 'count'")
        kwargs["master_seed"] = int(seeds.get("master", 0))
        kwargs["seeds"] = tuple(range(int(count)))
    elif seeds is not None:
        if isinstance(seeds, int):
            seeds = [seeds]
        kwargs["seeds"] = tuple(int(s) for s in seeds)
    sweep = raw.pop("sweep", None)
    if sweep:
        var = sweep.get("variable")
        values = sweep.get("values")
        if values is None:
            values = DEFAULT_SWEEP_VALUES.get(var, [])
        kwargs["sweep_var"] = var
        kwargs["sweep_values"] = tuple(values)
    if raw.get("pi") is not None:
        raw["pi"] = tuple(float(x) for x in raw["pi"])
    unknown = set(raw) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs.update(raw)
    try:
        cfg = ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a YAML config; ``None`` or ``"defaults"`` selects the shipped defaults."""
    if path is None or str(path) == "defaults":
        text = resources.files("coarsectrl").joinpath("configs/defaults.yaml").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    for key, value in (overrides or {}).items():
        _set_dotted(raw, key, value)
    return config_from_dict(raw)


def _set_dotted(raw: dict, key: str, value) -> None:
    *parents, leaf = key.split(".")
    node = raw
    for part in parents:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[leaf] = value


def parse_override(item: str) -> tuple[str, object]:
    """``key=value`` with the value parsed as YAML (``seeds=[1,2]``, ``omega=0.1``).
    Dotted keys reach nested entries (``sweep.variable=m``)."""
    key, sep, value = item.partition("=")
    if not sep or not key:
        raise ConfigError(f"override must look like key=value, got {item!r}")
    try:
        return key.strip(), yaml.safe_load(value)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override {item!r}") from exc


def stream(master_seed: int, seed: int, stream_id: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(master_seed), int(seed), int(stream_id)])
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class TrialRecord:
    seed: int
    config: dict
    sweep_var: str | None = None
    sweep_value: object = None
    metrics: dict = field(default_factory=lambda: {k: math.nan for k in METRICS})
    wall_ms: dict = field(default_factory=dict)
    status: str = "ok"
    estimates: dict | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def __getattr__(self, name):
        metrics = self.__dict__.get("metrics", {})
        if name in metrics:
            return metrics[name]
        raise AttributeError(name)

    def row(self, record_timing: bool = False) -> dict:
        out = {"sweep_var": self.sweep_var or "none",
               "sweep_value": "" if self.sweep_value is None else self.sweep_value,
               "seed": self.seed}
        out.update(self.metrics)
        out["wall_ms_total"] = round(self.wall_ms.get("total", math.nan), 3) if record_timing else ""
        out["status"] = self.status
        return out


class _Timer:
    def __init__(self):
        self.marks = {}
        self._t0 = self._last = time.perf_counter()

    def lap(self, name):
        now = time.perf_counter()
        self.marks[name] = 1e3 * (now - self._last)
        self._last = now

    def done(self):
        self.marks["total"] = 1e3 * (time.perf_counter() - self._t0)
        return self.marks


def run_trial(cfg: ExperimentConfig, seed: int, keep_estimates: bool = False) -> TrialRecord:
    """One full pipeline realization; deterministic in ``(cfg, seed)``.

    Numerical failures are caught and reported through ``status``.
    """
    record = TrialRecord(seed=int(seed), config=cfg.to_dict())
    timer = _Timer()
    # single-threaded BLAS keeps results bit-identical between serial and pooled runs
    with threadpool_limits(limits=1):
        try:
            _pipeline(cfg, int(seed), record, timer, keep_estimates)
        except (CoarseCtrlError, np.linalg.LinAlgError) as exc:
            record.status = getattr(exc, "code", "linalg")
            log.warning("trial seed=%s failed: %s", seed, exc)
    record.wall_ms = timer.done()
    return record


_THETA_CACHE: dict = {}
_THETA_CACHE_SIZE = 64


def _cached_theta_fine(cfg, seed, a_mat):
    # sweeps over m and omega reuse the same fine graph for a given seed
    key = (cfg.n, cfg.K, cfg.p, cfg.q, cfg.rho_n, cfg.pi, cfg.a_fine, cfg.master_seed, seed)
    if key not in _THETA_CACHE:
        if len(_THETA_CACHE) >= _THETA_CACHE_SIZE:
            _THETA_CACHE.pop(next(iter(_THETA_CACHE)))
        theta = theta_fine(normalize(a_mat, cfg.a_fine))
        theta.flags.writeable = False
        _THETA_CACHE[key] = theta
    return _THETA_CACHE[key]


def _pipeline(cfg, seed, record, timer, keep_estimates):
    model = cfg.block_model()
    assign = generate_membership(cfg.n, model.pi)
    a_mat = sample_fine_graph(model, assign, stream(cfg.master_seed, seed, STREAM_GRAPH))
    cmap = sample_coarsening(assign, cfg.m, cfg.r, cfg.omega,
                             stream(cfg.master_seed, seed, STREAM_COARSENING), cfg.perfect_sync)
    a_tilde = coarse_adjacency(cmap, a_mat)
    phi = coarse_membership(cmap, assign)
    timer.lap("generate")

    th_fine = _cached_theta_fine(cfg, seed, a_mat)
    th_group = cmap.apply(th_fine) / cfg.r
    del a_mat
    timer.lap("truth")

    th_coarse = prom_estimate(a_tilde, cfg.a_coarse)
    timer.lap("prom")
    est = mm_community_estimate(a_tilde, cfg.K, cfg.prune_quantile)
    learned = learned_theta(est, cfg.a_fine, cfg.n)
    timer.lap("learned")
    mu = baseline_vector(cfg.m, stream(cfg.master_seed, seed, STREAM_BASELINE))

    D = np.diag(assign.relative_sizes)
    t1 = thm1_diagnostics(model, assign, phi, cfg.delta_prob, cfg.a_fine)
    t2 = thm2_diagnostics(est, learned, phi, model.P, D)
    record.metrics = {
        "delta_prom": delta_prom(th_group, th_coarse, cfg.r),
        "delta_learned": delta_learned(learned.theta_hat, th_group, cfg.r),
        "baseline_error": baseline_error(mu, th_group, cfg.r),
        "alpha_n": alpha_empirical(None, model, assign, cfg.a_fine, theta_a=th_fine),
        **dataclasses.asdict(t1),
        **dataclasses.asdict(t2),
    }
    timer.lap("metrics")
    if keep_estimates:
        record.estimates = {"phi_hat": est.phi_hat, "p_hat": est.p_hat}


def _run_point(args):
    cfg, value, seed, keep = args
    rec = run_trial(cfg.at(value), seed, keep_estimates=keep)
    rec.sweep_var, rec.sweep_value = cfg.sweep_var, value
    return rec


def worker_count(n_tasks: int, workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(THREADS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(int(workers), n_tasks))


def run_trials(cfg: ExperimentConfig, workers: int | None = None,
               keep_estimates: bool = False) -> list[TrialRecord]:
    """All (sweep value, seed) trials, ordered by (value index, seed index)."""
    cfg.validate()
    values = list(cfg.sweep_values) if cfg.sweep_var else [None]
    tasks = [(cfg, v, s, keep_estimates) for v in values for s in cfg.seeds]
    w = worker_count(len(tasks), workers)
    if w == 1:
        return [_run_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=w) as pool:
        # map preserves submission order regardless of completion order
        return list(pool.map(_run_point, tasks))


def aggregate(records: list[TrialRecord]) -> list[dict]:
    """Mean and sample standard deviation (ddof=1) per sweep value, over successful trials."""
    groups: dict = {}
    for rec in records:
        groups.setdefault(rec.sweep_value, []).append(rec)
    rows = []
    for value, recs in groups.items():
        ok = [r for r in recs if r.ok]
        row = {"sweep_var": recs[0].sweep_var or "none",
               "sweep_value": "" if value is None else value,
               "n_trials": len(recs), "n_failed": len(recs) - len(ok)}
        for key in METRICS:
            vals = np.array([r.metrics[key] for r in ok], dtype=float)
            row[f"{key}_mean"] = float(vals.mean()) if vals.size else math.nan
            row[f"{key}_std"] = float(vals.std(ddof=1)) if vals.size > 1 else math.nan
        rows.append(row)
    return rows


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def to_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def trials_csv(records: list[TrialRecord], record_timing: bool = False) -> str:
    return to_csv([r.row(record_timing) for r in records], TRIAL_COLUMNS)


def aggregate_csv(rows: list[dict]) -> str:
    columns = ["sweep_var", "sweep_value", "n_trials", "n_failed"]
    columns += [f"{k}_{s}" for k in METRICS for s in ("mean", "std")]
    return to_csv(rows, columns)


def manifest(cfg: ExperimentConfig) -> dict:
    return {
        "package": "coarsectrl",
        "version": __version__,
        "config": cfg.to_dict(),
        "seed_derivation": "PCG64(SeedSequence([master_seed, seed, stream])); "
                           "streams: 0=graph, 1=coarsening, 2=baseline",
        "trial_columns": list(TRIAL_COLUMNS),
    }


@dataclass
class SweepResult:
    records: list
    aggregate: list
    out_dir: Path | None = None

    @property
    def n_failed(self) -> int:
        return sum(not r.ok for r in self.records)


def write_outputs(out_dir, cfg: ExperimentConfig, records, dump_estimates: bool = False) -> list[dict]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = aggregate(records)
    (out / "trials.csv").write_text(trials_csv(records, cfg.record_timing))
    (out / "aggregate.csv").write_text(aggregate_csv(rows))
    (out / "manifest.json").write_text(json.dumps(manifest(cfg), indent=2, sort_keys=True) + "\n")
    if dump_estimates:
        for rec in records:
            if rec.estimates is None:
                continue
            sub = out if len(records) == 1 else out / "estimates" / f"{rec.sweep_value}_seed{rec.seed}"
            sub.mkdir(parents=True, exist_ok=True)
            np.savetxt(sub / "phi_hat.csv", rec.estimates["phi_hat"], delimiter=",", fmt="%.17g")
            np.savetxt(sub / "p_hat.csv", rec.estimates["p_hat"], delimiter=",", fmt="%.17g")
    return rows


def run_sweep(cfg: ExperimentConfig, out_dir=None, workers: int | None = None,
              dump_estimates: bool = False) -> SweepResult:
    """Run every trial of ``cfg`` and, if ``out_dir`` is given, write
    ``trials.csv``, ``aggregate.csv`` and ``manifest.json`` there."""
    records = run_trials(cfg, workers=workers, keep_estimates=dump_estimates)
    failed = sum(not r.ok for r in records)
    if failed:
        log.warning("%d of %d trials failed", failed, len(records))
    if out_dir is None:
        return SweepResult(records, aggregate(records))
    rows = write_outputs(out_dir, cfg, records, dump_estimates)
    return SweepResult(records, rows, Path(out_dir))
