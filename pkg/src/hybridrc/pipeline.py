"""Training and evaluation: phase handling, pseudoinverse readouts, the
two-step cascade protocol, metrics, and the shallow baselines.

Targets are kept in physical units throughout training; the readout always
includes a unit bias column, so centering only matters for the NMSE
denominator, where targets are shifted by their train-segment mean (test
means are unseen information). The quantum-layer output feeds the network
layer raw, with the input gain handling scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalFailure
from .esn import EsnConfig, run_esn
from .gaussian import fidelity_or_nan
from .reservoir import ReservoirConfig, run_reservoir, sample_measured_covariance
from .tasks import TASKS, InputSequence, build_targets, injection_series

__all__ = [
    "PhasePlan",
    "TrainedHybrid",
    "ResultRecord",
    "make_delayed_targets",
    "train_readout",
    "nmse",
    "state_estimation_metric",
    "train_hybrid",
    "train_qrc_only",
    "train_esn_only",
    "train_qrc_single",
]

PINV_CUTOFF = 1e-12


@dataclass(frozen=True)
class PhasePlan:
    """Wash-out / training / test segment lengths."""

    washout: int = 500
    train: int = 3000
    test: int = 1000

    def __post_init__(self):
        if min(self.washout, self.train, self.test) <= 0:
            raise ConfigError("all phase lengths must be positive")

    @property
    def total(self) -> int:
        return self.washout + self.train + self.test

    @property
    def train_slice(self) -> slice:
        return slice(self.washout, self.washout + self.train)

    @property
    def test_slice(self) -> slice:
        return slice(self.washout + self.train, self.total)


@dataclass(frozen=True)
class TrainedHybrid:
    """Trained readout matrices of the cascade."""

    w2: np.ndarray = field(repr=False)     # (d_qrc, K + 1)
    w_out: np.ndarray = field(repr=False)  # (d_final, K + N_esn + 1)
    qrc_delay: int = 0
    final_delay: int = 0


@dataclass
class ResultRecord:
    """One test-phase evaluation of one realization."""

    task: str
    tau: int
    tau_prime: int          # -1 where no quantum-layer delay applies
    baseline: str           # hybrid | qrc-only | esn-only | qrc-single
    metric: str             # fidelity | nmse
    value: float
    excluded_count: int = 0
    seed: int | None = None


def make_delayed_targets(raw: np.ndarray, delay: int,
                         washout_len: int | None = None) -> np.ndarray:
    """Shift a raw (T, d) target series so row t holds raw row t - delay.

    Rows with t < delay are zero-filled; they are only ever inside the
    wash-out segment and never reach a regression, which is enforced by
    passing the wash-out length.
    """
    if delay < 0:
        raise ConfigError(f"delay must be >= 0, got {delay}")
    if washout_len is not None and delay >= washout_len:
        raise ConfigError(f"delay {delay} must be smaller than the wash-out "
                          f"length {washout_len}")
    if delay == 0:
        return raw.copy()
    out = np.zeros_like(raw)
    out[delay:] = raw[:-delay]
    return out


def train_readout(features: np.ndarray, targets: np.ndarray,
                  ridge: float = 0.0) -> np.ndarray:
    """Least-squares readout weights for features that include a bias column.

    ridge=0 uses the SVD pseudoinverse with singular values below
    1e-12 * s_max discarded; ridge>0 solves the regularized normal
    equations. Returns weights of shape (d, K) so that predictions are
    features @ weights.T.
    """
    x = np.asarray(features, dtype=float)
    y = np.atleast_2d(np.asarray(targets, dtype=float).T).T
    if not np.any(x):
        raise NumericalFailure("all-zero feature matrix; nothing to train on")
    if ridge < 0:
        raise ConfigError("ridge must be >= 0")
    if ridge == 0.0:
        w, *_ = np.linalg.lstsq(x, y, rcond=PINV_CUTOFF)
    else:
        gram = x.T @ x + ridge * np.eye(x.shape[1])
        w = np.linalg.solve(gram, x.T @ y)
    return w.T


def nmse(output: np.ndarray, target: np.ndarray) -> float:
    """Normalized mean squared error on a zero-mean-shifted target."""
    output = np.asarray(output, dtype=float).ravel()
    target = np.asarray(target, dtype=float).ravel()
    if output.shape != target.shape:
        raise ValueError("output and target lengths differ")
    denom = float(np.sum(target ** 2))
    if denom == 0.0:
        raise ValueError("NMSE undefined: target is identically zero")
    return float(np.sum((output - target) ** 2)) / denom


def state_estimation_metric(predicted: np.ndarray, true_elements: np.ndarray,
                            physical_tol: float = 1e-12):
    """Mean fidelity between element-wise state predictions and the truth.

    Each row of `predicted` holds the 3 unique elements (xx, xp, pp) of a
    single-mode covariance matrix. Steps whose reconstructed matrix leaves
    the closed-form fidelity domain (unphysical beyond `physical_tol`) or
    whose fidelity falls outside [0, 1] are excluded from the mean; the
    exclusion count is reported alongside.

    Returns:
        (mean fidelity over non-excluded steps (nan if none), excluded count)
    """
    predicted = np.atleast_2d(predicted)
    true_elements = np.atleast_2d(true_elements)
    if predicted.shape[1] != 3:
        raise ValueError("only single-mode states (3 unique elements) are "
                         "supported by the fidelity metric")
    fids = []
    excluded = 0
    for pred, true in zip(predicted, true_elements):
        s1 = np.array([[pred[0], pred[1]], [pred[1], pred[2]]])
        s2 = np.array([[true[0], true[1]], [true[1], true[2]]])
        f = fidelity_or_nan(s1, s2)
        if math.isnan(f) or f < 0.0 or f > 1.0 + physical_tol:
            excluded += 1
        else:
            fids.append(min(f, 1.0))
    mean = float(np.mean(fids)) if fids else float("nan")
    return mean, excluded


def _evaluate(features: np.ndarray, final_aligned: np.ndarray, task: str,
              phases: PhasePlan, ridge: float):
    """Train the final readout and score the test segment.

    Returns (weights, value, excluded_count).
    """
    spec = TASKS[task]
    tr, te = phases.train_slice, phases.test_slice
    center = final_aligned[tr].mean(axis=0)
    weights = train_readout(features[tr], final_aligned[tr] - center, ridge)
    out = features[te] @ weights.T + center
    truth = final_aligned[te]
    if spec.metric == "fidelity":
        value, excluded = state_estimation_metric(out, truth)
        return weights, value, excluded
    if task == "entanglement":
        # Train on the raw -log2(d-) series; the max{0, .} is applied to
        # output and target separately before the NMSE.
        out = np.maximum(out, 0.0)
        truth = np.maximum(truth, 0.0)
        center = np.maximum(final_aligned[tr], 0.0).mean(axis=0)
    value = nmse(out - center, truth - center)
    return weights, value, 0


def _check_esn_dim(esn_config: EsnConfig, expected: int, context: str):
    if esn_config.input_dim != expected:
        raise ConfigError(f"{context}: coercion matrix expects input dimension "
                          f"{esn_config.input_dim}, task needs {expected}")


def _check_length(seq: InputSequence, phases: PhasePlan):
    if phases.total != len(seq):
        raise ConfigError(f"phase plan totals {phases.total} steps but the "
                          f"input series has {len(seq)}")


def train_hybrid(seq: InputSequence, task: str, reservoir: ReservoirConfig,
                 esn_config: EsnConfig, phases: PhasePlan, tau: int,
                 tau_prime: int, rng: np.random.Generator,
                 ridge: float = 0.0):
    """Two-step training of the cascade.

    The quantum layer runs over the full series and its readout is fitted
    at delay tau_prime; its output over the full series drives the network
    layer, and the final readout over [quantum features | network states |
    bias] is fitted at delay tau and scored on the test segment.

    Returns:
        (TrainedHybrid, ResultRecord)
    """
    if tau_prime > tau:
        raise ConfigError(f"tau_prime {tau_prime} must not exceed tau {tau}")
    spec = TASKS[task]
    _check_esn_dim(esn_config, spec.qrc_dim, "hybrid")
    _check_length(seq, phases)
    qrc_raw, final_raw = build_targets(seq, task)
    feats = run_reservoir(injection_series(seq, reservoir.n_modes), reservoir, rng)
    ones = np.ones((len(seq), 1))
    x_qrc = np.hstack([feats, ones])
    qrc_aligned = make_delayed_targets(qrc_raw, tau_prime, phases.washout)
    tr = phases.train_slice
    w2 = train_readout(x_qrc[tr], qrc_aligned[tr], ridge)
    qrc_out = x_qrc @ w2.T
    esn_states = run_esn(qrc_out, esn_config)
    x_all = np.hstack([feats, esn_states, ones])
    final_aligned = make_delayed_targets(final_raw, tau, phases.washout)
    w_out, value, excluded = _evaluate(x_all, final_aligned, task, phases, ridge)
    trained = TrainedHybrid(w2, w_out, tau_prime, tau)
    record = ResultRecord(task, tau, tau_prime, "hybrid", spec.metric,
                          value, excluded)
    return trained, record


def train_qrc_only(seq: InputSequence, task: str, reservoirs, phases: PhasePlan,
                   tau: int, rng: np.random.Generator,
                   ridge: float = 0.0) -> ResultRecord:
    """Purely quantum baseline: two independent reservoir instances.

    Their concatenated features (plus bias) give the final readout the same
    trained size as the hybrid; the readout is fitted directly at delay tau.
    """
    spec = TASKS[task]
    _check_length(seq, phases)
    feats = np.hstack([
        run_reservoir(injection_series(seq, res.n_modes), res, rng)
        for res in reservoirs
    ])
    x = np.hstack([feats, np.ones((len(seq), 1))])
    _, final_raw = build_targets(seq, task)
    final_aligned = make_delayed_targets(final_raw, tau, phases.washout)
    _, value, excluded = _evaluate(x, final_aligned, task, phases, ridge)
    return ResultRecord(task, tau, -1, "qrc-only", spec.metric, value, excluded)


def _measured_input_elements(seq: InputSequence, ensemble_size: float,
                             rng: np.random.Generator) -> np.ndarray:
    """Directly measured x-quadrature covariance of the raw input states.

    For each step, the x block of the single-copy input covariance is
    estimated at the configured ensemble size; the unique elements form the
    network-only baseline's input (1 value for single-mode inputs, 3 for
    two-mode ones, which is not informationally complete in general).
    """
    x_idx = np.arange(0, seq.sigmas.shape[-1], 2)
    iu = np.triu_indices(len(x_idx))
    out = np.empty((len(seq), len(iu[0])))
    for t in range(len(seq)):
        sx = seq.sigmas[t][np.ix_(x_idx, x_idx)]
        if ensemble_size != math.inf:
            sx = sample_measured_covariance(sx, ensemble_size, rng)
        out[t] = sx[iu]
    return out


def train_esn_only(seq: InputSequence, task: str, esn_config: EsnConfig,
                   ensemble_size: float, phases: PhasePlan, tau: int,
                   rng: np.random.Generator, ridge: float = 0.0) -> ResultRecord:
    """Purely classical baseline: the network driven by direct homodyne
    estimates of the input states, with doubled neuron count supplied by
    the caller so the readout size matches the hybrid."""
    spec = TASKS[task]
    _check_length(seq, phases)
    inputs = _measured_input_elements(seq, ensemble_size, rng)
    _check_esn_dim(esn_config, inputs.shape[1], "esn-only")
    states = run_esn(inputs, esn_config)
    x = np.hstack([states, np.ones((len(seq), 1))])
    _, final_raw = build_targets(seq, task)
    final_aligned = make_delayed_targets(final_raw, tau, phases.washout)
    _, value, excluded = _evaluate(x, final_aligned, task, phases, ridge)
    return ResultRecord(task, tau, -1, "esn-only", spec.metric, value, excluded)


def train_qrc_single(seq: InputSequence, task: str, reservoir: ReservoirConfig,
                     phases: PhasePlan, taus, rng: np.random.Generator,
                     ridge: float = 0.0) -> ResultRecord:
    """Single-instance quantum layer scored over a set of delays.

    Used by the hyperparameter sweeps: one reservoir run provides the
    features, a separate readout is fitted per delay, and the mean NMSE
    over the delays is reported.
    """
    spec = TASKS[task]
    if spec.metric != "nmse":
        raise ConfigError("train_qrc_single supports NMSE tasks only")
    _check_length(seq, phases)
    feats = run_reservoir(injection_series(seq, reservoir.n_modes), reservoir, rng)
    x = np.hstack([feats, np.ones((len(seq), 1))])
    _, final_raw = build_targets(seq, task)
    values = []
    for tau in taus:
        final_aligned = make_delayed_targets(final_raw, tau, phases.washout)
        _, value, _ = _evaluate(x, final_aligned, task, phases, ridge)
        values.append(value)
    return ResultRecord(task, max(taus), -1, "qrc-single", spec.metric,
                        float(np.mean(values)))
