"""Seeded multi-realization execution and tabular output.

Per-realization seeds derive from the master seed by a counter-based
SplitMix64 step, stable across versions:

    seed_i = mix64((master_seed + (i + 1) * 0x9E3779B97F4A7C15) mod 2^64)

where mix64 is the SplitMix64 finalizer (xor-shift/multiply chain). Each
realization owns a fresh numpy Generator seeded with seed_i and consumes it
in a fixed order: input sequence first, then the crystal Hamiltonians (two
per reservoir instance), then the network weight and coercion matrices, and
finally the per-step measurement sampling during the run. Structural draws
therefore coincide across cells that share seeds and differ only in the
ensemble size, which pairs the comparisons of the sweep presets.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .errors import ConfigError
from .esn import sample_esn
from .pipeline import (PhasePlan, ResultRecord, train_esn_only, train_hybrid,
                       train_qrc_only, train_qrc_single)
from .reservoir import sample_reservoir
from .tasks import TASKS, sample_inputs

__all__ = [
    "derive_seed",
    "run_realization",
    "run_experiment",
    "record_rows",
    "write_results_csv",
    "write_summary_csv",
    "write_results_json",
    "emit_input_series",
    "summarize",
]

RESULTS_SCHEMA = "hybridrc.results.v1"
SUMMARY_SCHEMA = "hybridrc.summary.v1"
INPUTS_SCHEMA = "hybridrc.inputs.v1"

RESULT_COLUMNS = ["task", "tau", "tau_prime", "N", "R", "p", "M", "N_esn",
                  "rho", "iota", "baseline", "realization", "seed", "metric",
                  "value", "excluded_count"]
SUMMARY_COLUMNS = ["task", "tau", "tau_prime", "N", "R", "p", "M", "N_esn",
                   "rho", "iota", "baseline", "metric", "mean", "stderr", "n"]

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """The index-th realization seed of a master seed (SplitMix64 output)."""
    return _mix64(master_seed + (index + 1) * _GOLDEN)


def run_realization(config: ExperimentConfig, seed: int) -> ResultRecord:
    """Execute one seeded realization of the configured experiment."""
    rng = np.random.default_rng(seed)
    spec = TASKS[config.task]
    phases = PhasePlan(config.washout, config.train_len, config.test_len)
    seq = sample_inputs(spec.input_kind, phases.total, rng)
    tau = config.tau
    if config.baseline == "hybrid":
        res = sample_reservoir(config.N, config.R, config.p, rng,
                               ensemble_size=config.M)
        esn = sample_esn(config.N_esn, spec.qrc_dim, config.rho_resolved,
                         config.iota_resolved, rng,
                         weight_scaling=config.esn_scaling)
        _, record = train_hybrid(seq, config.task, res, esn, phases, tau,
                                 config.tau_prime_resolved, rng,
                                 ridge=config.ridge)
    elif config.baseline == "qrc-only":
        reservoirs = tuple(
            sample_reservoir(config.N, config.R, config.p, rng,
                             ensemble_size=config.M)
            for _ in range(2))
        record = train_qrc_only(seq, config.task, reservoirs, phases, tau,
                                rng, ridge=config.ridge)
    elif config.baseline == "esn-only":
        input_dim = 1 if spec.input_kind == "single" else 3
        esn = sample_esn(config.N_esn, input_dim, config.rho_resolved,
                         config.iota_resolved, rng,
                         weight_scaling=config.esn_scaling)
        record = train_esn_only(seq, config.task, esn, config.M, phases, tau,
                                rng, ridge=config.ridge)
    elif config.baseline == "qrc-single":
        res = sample_reservoir(config.N, config.R, config.p, rng,
                               ensemble_size=config.M)
        record = train_qrc_single(seq, config.task, res, phases,
                                  range(tau + 1), rng, ridge=config.ridge)
    else:  # pragma: no cover - rejected by config validation
        raise ConfigError(f"unknown baseline {config.baseline!r}")
    record.seed = seed
    return record


def _worker(args):
    config, index = args
    seed = derive_seed(config.master_seed, index)
    return index, run_realization(config, seed)


def run_experiment(config: ExperimentConfig, threads: int = 1):
    """Run all realizations of a config.

    Returns the records ordered by realization index together with the
    (mean, stderr, n) summary of the metric values.
    """
    jobs = [(config, i) for i in range(config.realizations)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            indexed = list(pool.map(_worker, jobs))
    else:
        indexed = [_worker(job) for job in jobs]
    indexed.sort(key=lambda pair: pair[0])
    records = [rec for _, rec in indexed]
    return records, summarize(records)


@dataclass(frozen=True)
class Summary:
    mean: float
    stderr: float
    n: int


def summarize(records) -> Summary:
    """Mean and standard error over the finite metric values."""
    values = np.array([r.value for r in records], dtype=float)
    values = values[np.isfinite(values)]
    n = len(values)
    if n == 0:
        return Summary(float("nan"), float("nan"), 0)
    stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Summary(float(values.mean()), stderr, n)


def _fmt(value) -> str:
    if isinstance(value, float):
        if value == math.inf:
            return "inf"
        return repr(value)
    return str(value)


def record_rows(config: ExperimentConfig, records) -> list:
    """Flatten records into result-CSV rows (dicts keyed by RESULT_COLUMNS)."""
    rows = []
    for index, rec in enumerate(records):
        rows.append({
            "task": rec.task,
            "tau": rec.tau,
            "tau_prime": rec.tau_prime,
            "N": config.N,
            "R": config.R,
            "p": config.p,
            "M": "inf" if config.M == math.inf else int(config.M),
            "N_esn": config.N_esn,
            "rho": config.rho_resolved,
            "iota": config.iota_resolved,
            "baseline": rec.baseline,
            "realization": index,
            "seed": rec.seed,
            "metric": rec.metric,
            "value": rec.value,
            "excluded_count": rec.excluded_count,
        })
    return rows


def summary_row(config: ExperimentConfig, records, summary: Summary) -> dict:
    first = records[0]
    return {
        "task": first.task,
        "tau": first.tau,
        "tau_prime": first.tau_prime,
        "N": config.N,
        "R": config.R,
        "p": config.p,
        "M": "inf" if config.M == math.inf else int(config.M),
        "N_esn": config.N_esn,
        "rho": config.rho_resolved,
        "iota": config.iota_resolved,
        "baseline": first.baseline,
        "metric": first.metric,
        "mean": summary.mean,
        "stderr": summary.stderr,
        "n": summary.n,
    }


def _write_csv(path, schema: str, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema={schema}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def write_results_csv(path, rows):
    _write_csv(path, RESULTS_SCHEMA, RESULT_COLUMNS, rows)


def write_summary_csv(path, rows):
    _write_csv(path, SUMMARY_SCHEMA, SUMMARY_COLUMNS, rows)


def write_results_json(path, rows):
    """JSON mirror of the results table."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"schema": RESULTS_SCHEMA, "records": rows}, fh, indent=1,
                  default=_fmt)
        fh.write("\n")


def emit_input_series(config: ExperimentConfig, out_dir) -> list:
    """Dump the per-realization input parameter draws for replay.

    The input sequence is the first consumer of the realization stream, so
    re-deriving it from the seed reproduces exactly what the run saw.
    """
    os.makedirs(out_dir, exist_ok=True)
    spec = TASKS[config.task]
    phases = PhasePlan(config.washout, config.train_len, config.test_len)
    names = ["n_th", "r", "phi"] if spec.input_kind == "single" else ["n_th", "s"]
    paths = []
    for i in range(config.realizations):
        seed = derive_seed(config.master_seed, i)
        seq = sample_inputs(spec.input_kind, phases.total,
                            np.random.default_rng(seed))
        path = os.path.join(out_dir, f"inputs_{i:05d}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# schema={INPUTS_SCHEMA} seed={seed}\n")
            writer = csv.writer(fh)
            writer.writerow(["step"] + names)
            for t, row in enumerate(seq.params):
                writer.writerow([t] + [repr(float(v)) for v in row])
        paths.append(path)
    return paths
