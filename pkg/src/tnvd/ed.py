"""Exact diagonalization reference for small chains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .hamiltonian import DENSE_SITE_LIMIT, IsingSpec, build_dense


@dataclass(frozen=True)
class EDResult:
    eigenvalues: np.ndarray            # ascending, float64
    eigenvectors: np.ndarray | None    # columns match eigenvalues when requested

    @property
    def n_levels(self) -> int:
        return self.eigenvalues.shape[0]


def full_spectrum(spec: IsingSpec, want_vectors: bool = False) -> EDResult:
    """All eigenvalues (and optionally eigenvectors) of the dense Hamiltonian.

    The Hamiltonian is real symmetric in the S^z product basis, so the solve
    runs in float64.  Guarded to DENSE_SITE_LIMIT sites.
    """
    if spec.n_sites > DENSE_SITE_LIMIT:
        raise ValueError(
            f"exact diagonalization limited to {DENSE_SITE_LIMIT} sites, got {spec.n_sites}")
    ham = build_dense(spec).data
    assert np.abs(ham.imag).max() == 0.0
    sym = np.asarray(ham.real, order="C")
    if want_vectors:
        vals, vecs = scipy.linalg.eigh(sym, driver="evd")
        return EDResult(vals, vecs)
    vals = scipy.linalg.eigh(sym, driver="evd", eigvals_only=True)
    return EDResult(vals, None)
