"""Exact diagonalization sanity: spectra, symmetries, eigenvector residuals."""

import numpy as np
import pytest

from tnvd.ed import full_spectrum
from tnvd.hamiltonian import IsingSpec, build_dense


def test_single_site():
    res = full_spectrum(IsingSpec(n_sites=1, h=0.5))
    assert np.allclose(res.eigenvalues, [-0.25, 0.25])


def test_two_site_no_field():
    res = full_spectrum(IsingSpec(n_sites=2, h=0.0))
    assert np.allclose(np.sort(res.eigenvalues), [-0.25, -0.25, 0.25, 0.25])


def test_sorted_and_sized():
    res = full_spectrum(IsingSpec(n_sites=8, h=0.5))
    assert res.n_levels == 256
    assert np.all(np.diff(res.eigenvalues) >= 0)
    assert abs(res.eigenvalues.sum()) < 1e-10  # traceless


def test_field_sign_symmetry():
    # flipping all longitudinal fields is a basis relabeling: same spectrum
    w = (0.3, -0.1, 0.2, 0.4, -0.5)
    a = full_spectrum(IsingSpec(n_sites=5, h=0.7, fields_w=w))
    b = full_spectrum(IsingSpec(n_sites=5, h=0.7, fields_w=tuple(-x for x in w)))
    assert np.allclose(a.eigenvalues, b.eigenvalues, atol=1e-12)


def test_eigenvectors_residual():
    spec = IsingSpec(n_sites=6, h=0.5, disorder_w=0.35, seed=3)
    res = full_spectrum(spec, want_vectors=True)
    ham = build_dense(spec).data.real
    residual = ham @ res.eigenvectors - res.eigenvectors * res.eigenvalues[None, :]
    assert np.max(np.abs(residual)) < 1e-10
    gram = res.eigenvectors.T @ res.eigenvectors
    assert np.max(np.abs(gram - np.eye(64))) < 1e-10


def test_ground_state_vs_power_iteration():
    spec = IsingSpec(n_sites=6, h=0.9)
    res = full_spectrum(spec)
    ham = build_dense(spec).data.real
    # inverse-free check: power iteration on (c*I - H) converges to the
    # ground state for large enough shift c
    shift = 10.0
    v = np.ones(64) / 8.0
    for _ in range(3000):
        v = (shift * v) - ham @ v
        v /= np.linalg.norm(v)
    e0 = float(v @ ham @ v)
    assert abs(e0 - res.eigenvalues[0]) < 1e-6


def test_site_limit_guard():
    with pytest.raises(ValueError):
        full_spectrum(IsingSpec(n_sites=15))
