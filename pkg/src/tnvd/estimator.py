"""Scikit-learn style front end for variational diagonalization."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .circuit import eigenstate_mps
from .hamiltonian import IsingSpec
from .trainer import TrainConfig, train


class TNVDiagonalizer(BaseEstimator):
    """Fit a spectrum MPS and brick-wall circuit to a spin-chain Hamiltonian.

    ``fit`` takes the problem definition (an IsingSpec or a dict of its
    fields) and trains the factorized eigendecomposition.  Bitstrings label
    eigenstates: ``predict`` maps them to eigenenergy estimates and
    ``eigenstate`` to the corresponding MPS.

    Attributes set by ``fit``: ``spectrum_``, ``circuit_``, ``log_``,
    ``best_F_``, ``result_``, ``spec_``.
    """

    def __init__(self, n_layers: int = 10, chi_a: int = 8, chi_t: int = 16,
                 optimizer: str = "adam", learning_rate: float = 1e-3,
                 max_steps: int = 1000, tol: float = 0.0,
                 validation_chi_t: int | None = None, seed: int = 0,
                 alternating: bool = False, gate_noise: float = 0.01,
                 mps_scale: float | None = None,
                 checkpoint_interval: int = 0, checkpoint_dir=None):
        self.n_layers = n_layers
        self.chi_a = chi_a
        self.chi_t = chi_t
        self.optimizer = optimizer
        self.learning_rate = learning_rate
        self.max_steps = max_steps
        self.tol = tol
        self.validation_chi_t = validation_chi_t
        self.seed = seed
        self.alternating = alternating
        self.gate_noise = gate_noise
        self.mps_scale = mps_scale
        self.checkpoint_interval = checkpoint_interval
        self.checkpoint_dir = checkpoint_dir

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            optimizer=self.optimizer,
            learning_rate=self.learning_rate,
            max_steps=self.max_steps,
            tol=self.tol,
            checkpoint_interval=self.checkpoint_interval,
            chi_t=self.chi_t,
            validation_chi_t=self.validation_chi_t,
            seed=self.seed,
            alternating=self.alternating,
            gate_noise=self.gate_noise,
            mps_scale=self.mps_scale,
        )

    def fit(self, X, y=None):
        """Train on a problem definition; ``y`` is ignored."""
        spec = X if isinstance(X, IsingSpec) else IsingSpec(**dict(X))
        result = train(spec, self.n_layers, self.chi_a, self._train_config(),
                       checkpoint_dir=self.checkpoint_dir)
        self.spec_ = spec
        self.result_ = result
        self.spectrum_ = result.spectrum
        self.circuit_ = result.circuit
        self.log_ = result.log
        self.best_F_ = result.best_F
        return self

    def predict(self, X) -> np.ndarray:
        """Eigenenergies for bitstring labels, shape (M, N) or (N,)."""
        check_is_fitted(self, "spectrum_")
        bits = np.atleast_2d(np.asarray(X))
        if bits.shape[1] != self.spec_.n_sites:
            raise ValueError(
                f"bitstrings have {bits.shape[1]} sites, model has {self.spec_.n_sites}")
        return np.array([self.spectrum_.evaluate_entry(row) for row in bits])

    def sample(self, n_samples: int, seed: int = 0):
        """Uniform eigenstate labels with their energies: (bits, values)."""
        check_is_fitted(self, "spectrum_")
        return self.spectrum_.sample_entries(n_samples, seed=seed)

    def eigenstate(self, bits, chi: int = 64):
        """MPS of the eigenstate labeled by ``bits``."""
        check_is_fitted(self, "circuit_")
        return eigenstate_mps(self.circuit_, bits, chi=chi)

    def score(self, X=None, y=None) -> float:
        """Negative best loss; higher means a tighter factorization."""
        check_is_fitted(self, "best_F_")
        return -self.best_F_
