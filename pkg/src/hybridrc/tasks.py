"""Input sequence generation and target construction for the benchmark tasks.

Single-mode inputs are squeezed thermal states with n_th ~ U(0, 5),
r ~ U(0, 0.75), phi ~ U(0, 2 pi); two-mode inputs are two-mode squeezed
thermal states with n_th ~ U(0, 1.25), s ~ U(0, 0.75). Draws are i.i.d.
per step, consumed from the realization stream in the fixed order
(n_th, r, phi) respectively (n_th, s).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gaussian import squeezed_thermal_matrix, two_mode_squeezed_thermal_matrix

__all__ = [
    "InputSequence",
    "TaskSpec",
    "TASKS",
    "sample_inputs",
    "assemble_injection",
    "injection_series",
    "build_targets",
]

SINGLE_MODE_RANGES = {"n_th": (0.0, 5.0), "r": (0.0, 0.75), "phi": (0.0, 2 * np.pi)}
TWO_MODE_RANGES = {"n_th": (0.0, 1.25), "s": (0.0, 0.75)}


@dataclass(frozen=True)
class InputSequence:
    """A drawn input time series: per-step parameters and covariances."""

    kind: str                     # "single" or "two"
    params: np.ndarray = field(repr=False)  # (T, 3) or (T, 2)
    sigmas: np.ndarray = field(repr=False)  # (T, 2, 2) or (T, 4, 4)

    def __len__(self) -> int:
        return len(self.sigmas)

    @property
    def mode_count(self) -> int:
        return 1 if self.kind == "single" else 2


@dataclass(frozen=True)
class TaskSpec:
    """Benchmark task identity and its target layout."""

    name: str
    input_kind: str   # which input ensemble the task runs on
    metric: str       # "fidelity" or "nmse"
    qrc_dim: int      # components of the intermediate (quantum-layer) target
    final_dim: int


# The intermediate target is the unique elements of the input covariance at
# the quantum-layer delay, except for the trace task where it is the traced
# series itself; offdiag is the single-layer hyperparameter-scan task.
TASKS = {
    "memory": TaskSpec("memory", "single", "fidelity", 3, 3),
    "trace": TaskSpec("trace", "single", "nmse", 1, 1),
    "determinant": TaskSpec("determinant", "single", "nmse", 3, 1),
    "entanglement": TaskSpec("entanglement", "two", "nmse", 10, 1),
    "offdiag": TaskSpec("offdiag", "single", "nmse", 1, 1),
}


def sample_inputs(kind: str, length: int, rng: np.random.Generator) -> InputSequence:
    """Draw an i.i.d. input sequence of the given kind and length."""
    if length < 0:
        raise ValueError("length must be >= 0")
    if kind == "single":
        n_th = rng.uniform(*SINGLE_MODE_RANGES["n_th"], size=length)
        r = rng.uniform(*SINGLE_MODE_RANGES["r"], size=length)
        phi = rng.uniform(*SINGLE_MODE_RANGES["phi"], size=length)
        params = np.stack([n_th, r, phi], axis=1) if length else np.empty((0, 3))
        sigmas = squeezed_thermal_matrix(n_th, r, phi)
    elif kind == "two":
        n_th = rng.uniform(*TWO_MODE_RANGES["n_th"], size=length)
        s = rng.uniform(*TWO_MODE_RANGES["s"], size=length)
        params = np.stack([n_th, s], axis=1) if length else np.empty((0, 2))
        sigmas = two_mode_squeezed_thermal_matrix(n_th, s)
    else:
        raise ValueError(f"unknown input kind {kind!r}")
    return InputSequence(kind, params, sigmas.reshape(length, *sigmas.shape[-2:]))


def assemble_injection(input_sigma: np.ndarray, n_modes: int) -> np.ndarray:
    """Product-state covariance injected into the N reservoir modes.

    Single-mode inputs are copied into all N modes. Two-mode inputs fill
    floor(N/2) copies; an odd leftover mode is set to vacuum.
    """
    dim = input_sigma.shape[0]
    if dim == 2:
        copies = n_modes
    elif dim == 4:
        if n_modes < 2:
            raise ValueError("two-mode inputs need at least 2 reservoir modes; "
                             "the task is not defined for N = 1")
        copies = n_modes // 2
    else:
        raise ValueError(f"unsupported input dimension {dim}")
    out = np.eye(2 * n_modes)  # an odd leftover mode stays vacuum
    for k in range(copies):
        j = k * dim
        out[j:j + dim, j:j + dim] = input_sigma
    return out


def injection_series(seq: InputSequence, n_modes: int) -> np.ndarray:
    """(T, 2N, 2N) stack of injected covariances for a whole sequence."""
    dim = seq.sigmas.shape[-1]
    if dim == 4 and n_modes < 2:
        raise ValueError("two-mode inputs need at least 2 reservoir modes; "
                         "the task is not defined for N = 1")
    steps = len(seq)
    out = np.zeros((steps, 2 * n_modes, 2 * n_modes))
    idx = np.arange(2 * n_modes)
    out[:, idx, idx] = 1.0
    copies = n_modes if dim == 2 else n_modes // 2
    for k in range(copies):
        j = k * dim
        out[:, j:j + dim, j:j + dim] = seq.sigmas
    return out


def _unique_elements(sigmas: np.ndarray) -> np.ndarray:
    """Row-major upper triangle of each covariance in a (T, d, d) stack."""
    d = sigmas.shape[-1]
    iu = np.triu_indices(d)
    return sigmas[:, iu[0], iu[1]]


def _neg_log2_d_minus(seq: InputSequence) -> np.ndarray:
    # For the two-mode squeezed thermal family the partially transposed
    # minimum symplectic eigenvalue is (1 + 2 n_th) exp(-2 s), read off the
    # x block: sigma_x1x1 - sigma_x1x2.
    d_minus = seq.sigmas[:, 0, 0] - seq.sigmas[:, 0, 2]
    return -np.log2(d_minus)


def build_targets(seq: InputSequence, task: str):
    """Undelayed target series for a task.

    Returns:
        (qrc_targets, final_targets): (T, d_qrc) and (T, d_final) arrays in
        physical units. Delay alignment and any zero-mean shifting are
        applied by the training pipeline.
    """
    spec = TASKS[task]
    if spec.input_kind != seq.kind:
        raise ValueError(f"task {task!r} expects {spec.input_kind}-mode inputs, "
                         f"got {seq.kind}")
    elements = _unique_elements(seq.sigmas)
    if task == "memory":
        return elements, elements
    if task == "trace":
        trace = np.einsum("tii->t", seq.sigmas)[:, None]
        return trace, trace
    if task == "determinant":
        det = np.linalg.det(seq.sigmas)[:, None]
        return elements, det
    if task == "entanglement":
        return elements, _neg_log2_d_minus(seq)[:, None]
    if task == "offdiag":
        off = seq.sigmas[:, 0, 1][:, None]
        return off, off
    raise ValueError(f"unknown task {task!r}")
