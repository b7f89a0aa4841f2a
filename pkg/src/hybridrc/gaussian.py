"""Covariance-matrix algebra for zero-mean Gaussian states.

Conventions used throughout the package:

* quadratures x = a + a^dag, p = (a - a^dag)/i, interleaved per mode as
  (x1, p1, x2, p2, ...);
* the vacuum covariance matrix is the identity;
* the symplectic form has per-mode blocks [[0, 2], [-2, 0]] since [x, p] = 2i;
* symplectic eigenvalues are |eig(i Omega sigma)| / 2, so physical states
  satisfy nu >= 1 and the vacuum gives exactly 1 in every mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CovarianceMatrix",
    "symplectic_form",
    "vacuum_covariance",
    "squeezed_thermal_covariance",
    "two_mode_squeezed_thermal_covariance",
    "direct_sum",
    "symplectic_eigenvalues",
    "is_physical",
    "fidelity",
    "fidelity_or_nan",
    "log_negativity",
    "trace_energy",
    "determinant",
    "purity",
]


@dataclass(frozen=True)
class CovarianceMatrix:
    """A 2n x 2n real symmetric covariance matrix of an n-mode Gaussian state.

    The matrix is symmetrized and frozen on construction, so equality of
    sigma[j, l] and sigma[l, j] is exact.
    """

    n_modes: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be positive, got {self.n_modes}")
        mat = np.asarray(self.data, dtype=float)
        dim = 2 * self.n_modes
        if mat.shape != (dim, dim):
            raise ValueError(f"expected shape {(dim, dim)}, got {mat.shape}")
        mat = 0.5 * (mat + mat.T)
        mat.flags.writeable = False
        object.__setattr__(self, "data", mat)

    @property
    def dim(self) -> int:
        return 2 * self.n_modes


def _as_matrix(sigma) -> np.ndarray:
    """Accept a CovarianceMatrix or a bare 2n x 2n array."""
    if isinstance(sigma, CovarianceMatrix):
        return sigma.data
    mat = np.asarray(sigma, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
        raise ValueError(f"not a 2n x 2n matrix: shape {mat.shape}")
    return mat


def symplectic_form(n_modes: int) -> np.ndarray:
    """Antisymmetric form Omega with Omega_jl = -i [x_j, x_l].

    With x = a + a^dag and p = (a - a^dag)/i the per-mode block is
    [[0, 2], [-2, 0]]; Omega^2 = -4 I.
    """
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for j in range(n_modes):
        omega[2 * j, 2 * j + 1] = 2.0
        omega[2 * j + 1, 2 * j] = -2.0
    return omega


def vacuum_covariance(n_modes: int) -> CovarianceMatrix:
    """Vacuum state of n modes: the 2n x 2n identity."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    return CovarianceMatrix(n_modes, np.eye(2 * n_modes))


def squeezed_thermal_matrix(n_th, r, phi) -> np.ndarray:
    """Single-mode squeezed thermal covariance, vectorized over parameters.

    Returns (..., 2, 2) for broadcast parameter arrays; used by the input
    samplers. `squeezed_thermal_covariance` wraps the scalar case.
    """
    n_th = np.asarray(n_th, dtype=float)
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    y_cosh = np.cosh(2 * r)
    z_cos = np.cos(phi) * np.sinh(2 * r)
    z_sin = np.sin(phi) * np.sinh(2 * r)
    pref = 1 + 2 * n_th
    out = np.empty(np.broadcast(n_th, r, phi).shape + (2, 2))
    out[..., 0, 0] = pref * (y_cosh + z_cos)
    out[..., 0, 1] = pref * z_sin
    out[..., 1, 0] = pref * z_sin
    out[..., 1, 1] = pref * (y_cosh - z_cos)
    return out


def squeezed_thermal_covariance(n_th: float, r: float, phi: float) -> CovarianceMatrix:
    """Single-mode squeezed thermal state with n_th thermal photons,
    squeezing parameter r and squeezing phase phi."""
    if n_th < 0 or r < 0:
        raise ValueError("n_th and r must be non-negative")
    return CovarianceMatrix(1, squeezed_thermal_matrix(n_th, r, phi))


def two_mode_squeezed_thermal_matrix(n_th, s) -> np.ndarray:
    """Two-mode squeezed thermal covariance, vectorized over parameters."""
    n_th = np.asarray(n_th, dtype=float)
    s = np.asarray(s, dtype=float)
    y_cosh = np.cosh(2 * s)
    y_sinh = np.sinh(2 * s)
    pref = 1 + 2 * n_th
    out = np.zeros(np.broadcast(n_th, s).shape + (4, 4))
    for j in range(4):
        out[..., j, j] = pref * y_cosh
    out[..., 0, 2] = out[..., 2, 0] = pref * y_sinh
    out[..., 1, 3] = out[..., 3, 1] = -pref * y_sinh
    return out


def two_mode_squeezed_thermal_covariance(n_th: float, s: float) -> CovarianceMatrix:
    """Two-mode squeezed thermal state with squeezing parameter s."""
    if n_th < 0 or s < 0:
        raise ValueError("n_th and s must be non-negative")
    return CovarianceMatrix(2, two_mode_squeezed_thermal_matrix(n_th, s))


def direct_sum(a: CovarianceMatrix, b: CovarianceMatrix) -> CovarianceMatrix:
    """Block-diagonal concatenation of two states (product state)."""
    da, db = a.data, b.data
    out = np.zeros((da.shape[0] + db.shape[0], da.shape[0] + db.shape[0]))
    out[: da.shape[0], : da.shape[0]] = da
    out[da.shape[0]:, da.shape[0]:] = db
    return CovarianceMatrix(a.n_modes + b.n_modes, out)


def symplectic_eigenvalues(sigma, pair_tol: float = 1e-8) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix, ascending.

    Computed as the magnitudes of the eigenvalues of i Omega sigma divided
    by 2; the 2n magnitudes come in equal pairs which are averaged down to
    n values. Pairs disagreeing by more than `pair_tol` (relative) indicate
    a malformed input and raise.
    """
    mat = _as_matrix(sigma)
    if not np.all(np.isfinite(mat)):
        raise ValueError("covariance matrix contains non-finite entries")
    n = mat.shape[0] // 2
    eigs = np.linalg.eigvals(1j * symplectic_form(n) @ mat)
    mags = np.sort(np.abs(eigs)) / 2.0
    lo, hi = mags[0::2], mags[1::2]
    gap = np.abs(hi - lo) / np.maximum(np.maximum(lo, hi), 1e-300)
    if np.any(gap > pair_tol):
        raise ValueError("symplectic spectrum does not pair up; input is not "
                         "a valid symmetric covariance matrix")
    return 0.5 * (lo + hi)


def is_physical(sigma, tol: float = 1e-9) -> bool:
    """True iff the minimum symplectic eigenvalue is >= 1 - tol."""
    return bool(symplectic_eigenvalues(sigma).min() >= 1.0 - tol)


def _fidelity_parts(m1: np.ndarray, m2: np.ndarray):
    big = float(np.linalg.det(m1 + m2))
    small = float((np.linalg.det(m1) - 1.0) * (np.linalg.det(m2) - 1.0))
    return big, small


def fidelity(sigma1, sigma2) -> float:
    """Uhlmann fidelity of two zero-mean single-mode Gaussian states.

    Uses the determinant closed form F = 2 / (sqrt(D + d) - sqrt(d)) with
    D = det(sigma1 + sigma2) and d = (det sigma1 - 1)(det sigma2 - 1).
    The formula is validated in the test suite against a truncated
    number-basis evaluation of F = (Tr sqrt(sqrt(rho) tau sqrt(rho)))^2.

    Raises:
        ValueError: for multi-mode or unphysical inputs.
    """
    m1, m2 = _as_matrix(sigma1), _as_matrix(sigma2)
    if m1.shape != (2, 2) or m2.shape != (2, 2):
        raise ValueError("fidelity supports single-mode (2x2) states only")
    for m in (m1, m2):
        if not is_physical(m, tol=1e-9):
            raise ValueError("fidelity requires physical states "
                             "(min symplectic eigenvalue >= 1)")
    big, small = _fidelity_parts(m1, m2)
    small = max(small, 0.0)  # physical inputs guarantee small >= 0 up to rounding
    return min(2.0 / (np.sqrt(big + small) - np.sqrt(small)), 1.0)


def fidelity_or_nan(m1: np.ndarray, m2: np.ndarray) -> float:
    """Closed-form single-mode fidelity without physicality gating.

    Returns nan whenever the formula leaves its real domain (negative
    determinant factor, non-positive denominator); callers treat nan and
    values outside [0, 1] as exclusions rather than errors.
    """
    big, small = _fidelity_parts(m1, m2)
    if small < 0.0 or big + small < 0.0:
        return float("nan")
    den = np.sqrt(big + small) - np.sqrt(small)
    if den <= 0.0:
        return float("nan")
    return 2.0 / den


def log_negativity(sigma, clamp: bool = True) -> float:
    """Logarithmic negativity of a two-mode state.

    Partially transposes the second mode (sign flip on p2), takes the
    smaller symplectic eigenvalue d of the result and returns
    max(0, -log2 d). With clamp=False the raw -log2 d is returned, which is
    the training target of the entanglement task.
    """
    mat = _as_matrix(sigma)
    if mat.shape != (4, 4):
        raise ValueError("log_negativity is defined for two-mode (4x4) states")
    pt = np.diag([1.0, 1.0, 1.0, -1.0])
    d_minus = symplectic_eigenvalues(pt @ mat @ pt).min()
    raw = -np.log2(d_minus)
    return max(0.0, raw) if clamp else float(raw)


def trace_energy(sigma) -> float:
    """Trace of the covariance matrix; equals 4<H> for zero-mean states."""
    return float(np.trace(_as_matrix(sigma)))


def determinant(sigma) -> float:
    """Determinant of the covariance matrix; (1 + 2 n_th)^2 = 1/mu^2 for
    single-mode squeezed thermal states, independent of the squeezing."""
    return float(np.linalg.det(_as_matrix(sigma)))


def purity(sigma) -> float:
    """Purity mu = 1/sqrt(det sigma) of a single-mode state."""
    mat = _as_matrix(sigma)
    if mat.shape != (2, 2):
        raise ValueError("purity supports single-mode (2x2) states only")
    return float(1.0 / np.sqrt(np.linalg.det(mat)))
