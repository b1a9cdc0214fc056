"""Variational diagonalization of 1D spin-1/2 chains.

The full eigenspectrum is encoded as a matrix product state over bitstring
labels and the eigenbasis as a brick-wall circuit of two-site unitaries;
both are trained jointly against the Hamiltonian's matrix product operator.
"""

from .analysis import (DOSHistogram, EEDistribution, FitResult, SpacingRatio,
                       dense_state_entropy, dos_histogram, ee_deviation_stats,
                       ee_energy_distribution, ee_energy_exhaustive,
                       entanglement_entropy, fit_gaussian, fit_shifted_poisson,
                       level_spacing_ratio, mean_abs_error)
from .checkpoint import CheckpointError, TrainingCheckpoint, load_checkpoint, save_checkpoint
from .circuit import BrickwallCircuit, LatentGate, build_brickwall, eigenstate_mps
from .config import (ConfigError, RunConfig, config_from_dict, config_to_dict,
                     default_config_yaml, default_run_config, load_config,
                     save_config)
from .ed import EDResult, full_spectrum
from .estimator import TNVDiagonalizer
from .evolution import TruncationPolicy, conjugate_mpo
from .hamiltonian import (HamiltonianMPO, IsingSpec, build_dense,
                          build_ising_mpo, trace_h_squared)
from .mps import MPS, SpectrumMPS, entanglement_entropy_bits, schmidt_values
from .objective import LossBreakdown, dense_loss, loss
from .runner import (SpectralReport, analyze_models, analyze_run_dir,
                     run_disorder, run_experiment, run_single, run_sweep)
from .schemas import (SCHEMAS, SchemaError, read_csv, read_summary,
                      validate_csv, write_csv, write_summary)
from .trainer import (TrainConfig, TrainingDivergedError, TrainResult,
                      evaluate_loss, models_from_checkpoint, resume, train)

__version__ = "0.1.0"

__all__ = [
    "BrickwallCircuit", "CheckpointError", "ConfigError", "DOSHistogram",
    "EDResult", "EEDistribution", "FitResult", "HamiltonianMPO", "IsingSpec",
    "LatentGate", "LossBreakdown", "MPS", "RunConfig", "SCHEMAS",
    "SchemaError", "SpacingRatio", "SpectralReport", "SpectrumMPS",
    "TNVDiagonalizer", "TrainConfig", "TrainResult", "TrainingCheckpoint",
    "TrainingDivergedError", "TruncationPolicy", "analyze_models",
    "analyze_run_dir", "build_brickwall", "build_dense", "build_ising_mpo",
    "config_from_dict", "config_to_dict", "conjugate_mpo", "default_config_yaml",
    "default_run_config", "dense_loss", "dense_state_entropy", "dos_histogram",
    "ee_deviation_stats", "ee_energy_distribution", "ee_energy_exhaustive",
    "eigenstate_mps", "entanglement_entropy", "entanglement_entropy_bits",
    "evaluate_loss", "fit_gaussian", "fit_shifted_poisson", "full_spectrum",
    "level_spacing_ratio", "load_checkpoint", "load_config", "loss",
    "mean_abs_error", "models_from_checkpoint", "read_csv", "read_summary",
    "resume", "run_disorder", "run_experiment", "run_single", "run_sweep",
    "save_checkpoint", "save_config", "schmidt_values", "trace_h_squared",
    "train", "validate_csv", "write_csv", "write_summary",
]
