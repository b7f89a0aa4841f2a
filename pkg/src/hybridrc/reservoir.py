"""The real-time quantum layer: random crystal Hamiltonians, symplectic
propagation of the loop, and finite-ensemble homodyne measurement.

One time step conjugates the joint (reservoir + fresh input) covariance by
the 4N x 4N step matrix

    S = [[ sqrt(R) S1, -sqrt(1-R) S1 ],
         [ sqrt(1-R) S2,  sqrt(R) S2 ]]

where S1, S2 are the single-crystal propagators and R the beam-splitter
reflectivity. The x-quadrature covariance of the output block is then
estimated from an ensemble of M copies, which is equivalent to drawing from
a scaled Wishart distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import GenerationFailure, NumericalFailure
from .gaussian import symplectic_form

__all__ = [
    "CrystalHamiltonian",
    "ReservoirConfig",
    "make_crystal",
    "sample_crystal",
    "is_stable",
    "symplectic_propagator",
    "build_step_matrix",
    "sample_reservoir",
    "reservoir_step",
    "sample_measured_covariance",
    "run_reservoir",
    "feature_dim",
]

G_RANGE = (0.1, 0.3)
H_RANGE = (0.2, 0.4)
STABILITY_TOL = 1e-9
MAX_CRYSTAL_TRIES = 1000


@dataclass(frozen=True)
class CrystalHamiltonian:
    """Frequencies and coupling matrices of one nonlinear crystal.

    `m_form` is the real symmetric matrix of the quadratic form generating
    the quadrature dynamics: per-mode diagonal blocks omega_j * I2 and
    off-diagonal blocks [[g_jl, h_jl], [h_jl, g_jl]], so that the
    single-step propagator is exp(Omega m_form dt). An uncoupled mode with
    omega = 1 then rotates in phase space at angle 2 dt (eigenvalues of
    Omega m_form are +-2i).
    """

    n_modes: int
    omega: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)
    m_form: np.ndarray = field(repr=False)


def _quadratic_form(omega: np.ndarray, g: np.ndarray, h: np.ndarray) -> np.ndarray:
    n = len(omega)
    m = np.zeros((2 * n, 2 * n))
    for j in range(n):
        m[2 * j, 2 * j] = omega[j]
        m[2 * j + 1, 2 * j + 1] = omega[j]
    for j in range(n):
        for l in range(n):
            if j == l:
                continue
            m[2 * j, 2 * l] = g[j, l]
            m[2 * j + 1, 2 * l + 1] = g[j, l]
            m[2 * j, 2 * l + 1] = h[j, l]
            m[2 * j + 1, 2 * l] = h[j, l]
    return m


def make_crystal(g: np.ndarray, h: np.ndarray, omega=None) -> CrystalHamiltonian:
    """Build a crystal from explicit coupling matrices (mostly for tests)."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    n = g.shape[0]
    if g.shape != (n, n) or h.shape != (n, n):
        raise ValueError("g and h must be square matrices of equal size")
    if not np.allclose(g, g.T) or not np.allclose(h, h.T):
        raise ValueError("g and h must be symmetric")
    omega = np.ones(n) if omega is None else np.asarray(omega, dtype=float)
    return CrystalHamiltonian(n, omega, g, h, _quadratic_form(omega, g, h))


def is_stable(crystal: CrystalHamiltonian, tol: float = STABILITY_TOL) -> bool:
    """True iff all eigenvalues of Omega M are (numerically) imaginary,
    i.e. the quadratic dynamics stays bounded."""
    gen = symplectic_form(crystal.n_modes) @ crystal.m_form
    return bool(np.abs(np.linalg.eigvals(gen).real).max() <= tol)


def sample_crystal(n_modes: int, sparsity: float, rng: np.random.Generator,
                   max_tries: int = MAX_CRYSTAL_TRIES) -> CrystalHamiltonian:
    """Draw a random crystal, rejecting unstable ones.

    Couplings of each unordered mode pair are uniform on G_RANGE / H_RANGE
    and individually kept with probability `sparsity` (else zeroed),
    preserving symmetry. Unstable draws are resampled in full.

    Raises:
        GenerationFailure: after `max_tries` consecutive unstable draws.
    """
    if not 0.0 <= sparsity <= 1.0:
        raise ValueError(f"sparsity must be in [0, 1], got {sparsity}")
    n_pairs = n_modes * (n_modes - 1) // 2
    iu = np.triu_indices(n_modes, 1)
    for _ in range(max_tries):
        g = np.zeros((n_modes, n_modes))
        h = np.zeros((n_modes, n_modes))
        g_vals = rng.uniform(*G_RANGE, size=n_pairs)
        h_vals = rng.uniform(*H_RANGE, size=n_pairs)
        g_vals *= rng.random(n_pairs) < sparsity
        h_vals *= rng.random(n_pairs) < sparsity
        g[iu] = g_vals
        g.T[iu] = g_vals
        h[iu] = h_vals
        h.T[iu] = h_vals
        crystal = make_crystal(g, h)
        if is_stable(crystal):
            return crystal
    raise GenerationFailure(
        f"no stable crystal in {max_tries} draws (n_modes={n_modes}, "
        f"sparsity={sparsity}); configuration looks pathological")


def symplectic_propagator(crystal: CrystalHamiltonian, dt: float = 1.0) -> np.ndarray:
    """Single-crystal propagator S = exp(Omega M dt)."""
    return expm(symplectic_form(crystal.n_modes) @ crystal.m_form * dt)


def build_step_matrix(s1: np.ndarray, s2: np.ndarray, reflectivity: float) -> np.ndarray:
    """Combine the two crystal propagators and the beam splitter into the
    4N x 4N single-step matrix. The first block row acts on the reservoir
    modes, the second on the ancillary input/output modes."""
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError(f"reflectivity must be in [0, 1], got {reflectivity}")
    rt = math.sqrt(reflectivity)
    tr = math.sqrt(1.0 - reflectivity)
    return np.block([[rt * s1, -tr * s1], [tr * s2, rt * s2]])


@dataclass(frozen=True)
class ReservoirConfig:
    """Sampled quantum layer: two crystals and the derived step matrix."""

    n_modes: int
    reflectivity: float
    sparsity: float
    ensemble_size: float  # positive int or math.inf
    dt: float
    crystals: tuple
    step_matrix: np.ndarray = field(repr=False)


def sample_reservoir(n_modes: int, reflectivity: float, sparsity: float,
                     rng: np.random.Generator, ensemble_size: float = math.inf,
                     dt: float = 1.0) -> ReservoirConfig:
    """Sample the two crystals independently and assemble the step matrix."""
    if not (ensemble_size == math.inf or
            (ensemble_size == int(ensemble_size) and ensemble_size >= n_modes)):
        raise ValueError(
            f"ensemble_size must be an integer >= n_modes or inf, got {ensemble_size}")
    c1 = sample_crystal(n_modes, sparsity, rng)
    c2 = sample_crystal(n_modes, sparsity, rng)
    step = build_step_matrix(symplectic_propagator(c1, dt),
                             symplectic_propagator(c2, dt), reflectivity)
    return ReservoirConfig(n_modes, reflectivity, sparsity, ensemble_size,
                           dt, (c1, c2), step)


def reservoir_step(sigma_r: np.ndarray, input_sigma: np.ndarray,
                   config: ReservoirConfig):
    """One loop round trip.

    Forms the joint covariance (reservoir) + (fresh input) as a direct sum,
    conjugates it by the step matrix, and returns the new reservoir block
    together with the exact x-quadrature covariance of the output block.
    Correlation blocks between reservoir and output are discarded, which is
    where the measured modes get replaced by fresh ones.

    Returns:
        (new reservoir covariance 2N x 2N, output x-covariance N x N)
    """
    n = config.n_modes
    joint = np.zeros((4 * n, 4 * n))
    joint[: 2 * n, : 2 * n] = sigma_r
    joint[2 * n:, 2 * n:] = input_sigma
    s = config.step_matrix
    out = s @ joint @ s.T
    new_r = out[: 2 * n, : 2 * n]
    new_r = 0.5 * (new_r + new_r.T)
    x_rows = 2 * n + 2 * np.arange(n)
    sigma_x = out[np.ix_(x_rows, x_rows)]
    sigma_x = 0.5 * (sigma_x + sigma_x.T)
    _check_reservoir_block(new_r)
    return new_r, sigma_x


def _check_reservoir_block(sigma_r: np.ndarray, tol: float = 1e-6):
    """Cheap per-step guard: every single-mode reduction of a physical state
    has det >= 1, so a violation beyond tolerance flags numerical failure."""
    xx = sigma_r[::2, ::2].diagonal()
    pp = sigma_r[1::2, 1::2].diagonal()
    xp = sigma_r[::2, 1::2].diagonal()
    dets = xx * pp - xp * xp
    if not np.all(np.isfinite(dets)):
        raise NumericalFailure("reservoir covariance became non-finite")
    if np.any(dets < 1.0 - tol):
        raise NumericalFailure(
            f"reservoir covariance unphysical: single-mode determinant "
            f"{dets.min():.6g} < 1")


def sample_measured_covariance(sigma_x: np.ndarray, ensemble_size: float,
                               rng: np.random.Generator) -> np.ndarray:
    """Maximum-likelihood estimate of sigma_x from a finite ensemble.

    The estimate is distributed as W(sigma_x, M) / M; a draw is produced by
    Bartlett's construction: with sigma_x = L L^T and A lower triangular,
    A_ii = sqrt(chi2_{M-i}) (i = 0..N-1) and standard normal below the
    diagonal, the sample is (L A)(L A)^T / M. With M = inf the exact
    sigma_x is returned and no random numbers are consumed.
    """
    if ensemble_size == math.inf:
        return sigma_x
    n = sigma_x.shape[0]
    m = int(ensemble_size)
    if m < n:
        raise ValueError(f"ensemble_size {m} < matrix dimension {n}: the "
                         "Wishart draw would be singular")
    try:
        chol = np.linalg.cholesky(sigma_x)
    except np.linalg.LinAlgError as exc:
        raise ValueError("sigma_x must be symmetric positive-definite") from exc
    bart = np.zeros((n, n))
    bart[np.diag_indices(n)] = np.sqrt(rng.chisquare(m - np.arange(n)))
    bart[np.tril_indices(n, -1)] = rng.standard_normal(n * (n - 1) // 2)
    root = chol @ bart
    return (root @ root.T) / m


def feature_dim(n_modes: int) -> int:
    """Number of computational nodes: unique elements of sigma_x."""
    return n_modes * (n_modes + 1) // 2


def run_reservoir(inputs: np.ndarray, config: ReservoirConfig,
                  rng: np.random.Generator,
                  initial_covariance: np.ndarray | None = None) -> np.ndarray:
    """Drive the reservoir with a sequence of injected covariance matrices.

    Args:
        inputs: (T, 2N, 2N) stack of injected product-state covariances.
        config: sampled reservoir.
        rng: consumed only by the per-step measurement sampling (not at all
            when ensemble_size is inf).
        initial_covariance: reservoir start, vacuum identity by default.

    Returns:
        (T, N(N+1)/2) feature matrix; row t is the row-major upper triangle
        of the measured output x-covariance at step t.
    """
    n = config.n_modes
    steps = len(inputs)
    sigma_r = np.eye(2 * n) if initial_covariance is None \
        else np.array(initial_covariance, dtype=float)
    iu = np.triu_indices(n)
    features = np.empty((steps, feature_dim(n)))
    for t in range(steps):
        sigma_r, sigma_x = reservoir_step(sigma_r, inputs[t], config)
        if config.ensemble_size != math.inf:
            sigma_x = sample_measured_covariance(sigma_x, config.ensemble_size, rng)
        features[t] = sigma_x[iu]
    return features
