"""Cascade of a Gaussian multimode optical reservoir into an echo state
network, with the benchmark tasks, baselines and sweep harness."""

from .config import ExperimentConfig, load_config
from .errors import ConfigError, GenerationFailure, NumericalFailure
from .esn import EsnConfig, esn_step, run_esn, sample_esn, softplus
from .gaussian import (CovarianceMatrix, direct_sum, determinant, fidelity,
                       is_physical, log_negativity, purity,
                       squeezed_thermal_covariance, symplectic_eigenvalues,
                       symplectic_form, trace_energy,
                       two_mode_squeezed_thermal_covariance, vacuum_covariance)
from .pipeline import (PhasePlan, ResultRecord, TrainedHybrid,
                       make_delayed_targets, nmse, state_estimation_metric,
                       train_esn_only, train_hybrid, train_qrc_only,
                       train_readout)
from .reservoir import (CrystalHamiltonian, ReservoirConfig, build_step_matrix,
                        is_stable, make_crystal, reservoir_step, run_reservoir,
                        sample_crystal, sample_measured_covariance,
                        sample_reservoir, symplectic_propagator)
from .runner import derive_seed, run_experiment, run_realization
from .tasks import (InputSequence, TaskSpec, TASKS, assemble_injection,
                    build_targets, sample_inputs)

__version__ = "0.1.0"
