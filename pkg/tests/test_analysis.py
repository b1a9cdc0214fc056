"""Diagnostics tests: error metric, DOS fits, level statistics, EE."""

import numpy as np
import pytest

from tnvd.analysis import (DOSHistogram, dos_histogram, ee_deviation_stats,
                           ee_energy_distribution, ee_energy_exhaustive,
                           entanglement_entropy, fit_gaussian,
                           fit_shifted_poisson, level_spacing_ratio,
                           mean_abs_error)
from tnvd.circuit import build_brickwall
from tnvd.mps import MPS, SpectrumMPS
from tnvd.tensor import DenseTensor


def dense_ee_bits(vec: np.ndarray, cut: int, n: int) -> float:
    """Oracle: Schmidt entropy from the dense state vector."""
    mat = vec.reshape(2**cut, 2**(n - cut))
    sv = np.linalg.svd(mat, compute_uv=False)
    p = sv**2
    p = p[p > 1e-16]
    p = p / p.sum()
    return float(-(p * np.log2(p)).sum())


def product_mps(n: int, bits) -> MPS:
    tensors = []
    for b in bits:
        t = np.zeros((2, 1, 1), dtype=np.complex128)
        t[b, 0, 0] = 1.0
        tensors.append(DenseTensor(t))
    return MPS(tensors)


def bell_pair_mps() -> MPS:
    # (|00> + |11>)/sqrt(2) on two sites with bond dimension 2
    left = np.zeros((2, 1, 2), dtype=np.complex128)
    left[0, 0, 0] = left[1, 0, 1] = 1.0 / np.sqrt(2)
    right = np.zeros((2, 2, 1), dtype=np.complex128)
    right[0, 0, 0] = right[1, 1, 0] = 1.0
    return MPS([DenseTensor(left), DenseTensor(right)])


def ghz_mps(n: int) -> MPS:
    tensors = []
    for k in range(n):
        l = 1 if k == 0 else 2
        r = 1 if k == n - 1 else 2
        t = np.zeros((2, l, r), dtype=np.complex128)
        t[0, 0, 0] = 1.0
        t[1, l - 1, r - 1] = 1.0
        tensors.append(DenseTensor(t))
    tensors[0] = DenseTensor(tensors[0].data / np.sqrt(2))
    return MPS(tensors)


def random_normalized_mps(n: int, chi: int, rng) -> MPS:
    tensors = []
    dl = 1
    for k in range(n):
        dr = 1 if k == n - 1 else min(chi, 2**min(k + 1, n - k - 1))
        data = rng.standard_normal((2, dl, dr)) + 1j * rng.standard_normal((2, dl, dr))
        tensors.append(DenseTensor(data))
        dl = dr
    state = MPS(tensors)
    state.tensors[0] = DenseTensor(state.tensors[0].data / state.norm())
    return MPS(state.tensors)


# ---------------------------------------------------------------------------
# mean absolute eigenvalue error
# ---------------------------------------------------------------------------

def test_mean_abs_error_basics():
    vals = np.linspace(-3, 3, 16)
    assert mean_abs_error(vals, vals) == 0.0
    assert mean_abs_error(vals, vals + 0.25) == pytest.approx(0.25)
    rng = np.random.default_rng(0)
    shuffled = rng.permutation(vals)
    assert mean_abs_error(vals, shuffled) == 0.0  # sorted internally
    with pytest.raises(ValueError, match="length"):
        mean_abs_error(vals, vals[:-1])


# ---------------------------------------------------------------------------
# DOS histogram and gaussian fit
# ---------------------------------------------------------------------------

def test_dos_histogram_counts_and_modes():
    rng = np.random.default_rng(1)
    vals = rng.standard_normal(5000)
    hist = dos_histogram(vals)
    assert hist.counts.sum() == pytest.approx(5000)
    assert hist.n_samples == 5000
    assert hist.normalization == "raw"
    # default binning matches numpy's Freedman-Diaconis edges
    assert np.array_equal(hist.edges, np.histogram_bin_edges(vals, bins="fd"))
    normed = dos_histogram(vals, normalization="max")
    assert normed.counts.max() == pytest.approx(1.0)
    fixed = dos_histogram(vals, bins=12)
    assert fixed.counts.size == 12
    with pytest.raises(ValueError):
        dos_histogram(vals, normalization="area")
    with pytest.raises(ValueError):
        dos_histogram([])


def test_fit_gaussian_recovers_synthetic_sigma():
    rng = np.random.default_rng(2)
    vals = rng.standard_normal(1_000_000)
    fit = fit_gaussian(dos_histogram(vals))
    assert fit.model == "gaussian"
    assert 0.99 <= fit.params["sigma"] <= 1.01
    assert fit.params["mu"] == 0.0
    assert np.isfinite(fit.residual_norm)


def test_fit_gaussian_guards():
    with pytest.raises(ValueError, match="100 samples"):
        fit_gaussian(dos_histogram(np.zeros(50) + 1.0))
    # single occupied bin
    with pytest.raises(ValueError, match="degenerate"):
        fit_gaussian(dos_histogram(np.full(200, 3.7)))


def test_fit_gaussian_collapsed_scale():
    # spectra concentrated at E ~ 0 give a warm-start sigma below the
    # solver's lower bound; the fit must still run instead of raising
    rng = np.random.default_rng(5)
    vals = rng.normal(0.0, 1e-13, size=400)
    fit = fit_gaussian(dos_histogram(vals))
    assert np.isfinite(fit.params["A"])
    assert np.isfinite(fit.params["sigma"])
    assert fit.params["sigma"] >= 1e-12


# ---------------------------------------------------------------------------
# shifted-poisson fit on EE histograms
# ---------------------------------------------------------------------------

def synthetic_ee_hist(omega, s_tilde, n_bins=22, width=0.2):
    # max-normalization pins the model to 1 at the peak bin, so consistent
    # synthetic data must place its peak count exactly at s_tilde
    if omega >= 0:
        centers = s_tilde - width * np.arange(n_bins - 1, -1, -1)
    else:
        centers = s_tilde + width * np.arange(n_bins)
    edges = np.concatenate([centers - width / 2, [centers[-1] + width / 2]])
    counts = 80.0 * np.exp(-omega * (s_tilde - centers) / width)
    return DOSHistogram(edges=edges, counts=counts, normalization="raw",
                        n_samples=1000)


@pytest.mark.parametrize("omega,s_tilde", [(2.9, 4.2), (-3.0, 0.0)])
def test_fit_shifted_poisson_recovers_synthetic(omega, s_tilde):
    fit = fit_shifted_poisson(synthetic_ee_hist(omega, s_tilde))
    assert fit.model == "shifted-poisson"
    assert fit.params["omega"] == pytest.approx(omega, rel=0.05)
    assert fit.params["s_tilde"] == pytest.approx(s_tilde, abs=0.05 * 0.2)
    assert fit.params["delta"] == pytest.approx(0.2)


def test_fit_shifted_poisson_flat_and_guards():
    edges = np.linspace(0, 5, 21)
    flat = DOSHistogram(edges=edges, counts=np.full(20, 7.0),
                        normalization="raw", n_samples=140)
    fit = fit_shifted_poisson(flat)
    assert abs(fit.params["omega"]) < 1e-8
    with pytest.raises(ValueError, match="50 samples"):
        fit_shifted_poisson(DOSHistogram(edges=edges, counts=np.ones(20),
                                         normalization="raw", n_samples=20))
    with pytest.raises(ValueError, match="positive counts"):
        fit_shifted_poisson(DOSHistogram(edges=edges, counts=np.zeros(20),
                                         normalization="raw", n_samples=100))


# ---------------------------------------------------------------------------
# level-spacing ratio
# ---------------------------------------------------------------------------

def test_level_spacing_ratio_hand_cases():
    assert level_spacing_ratio(np.arange(10.0)).r == pytest.approx(1.0)
    # spacings alternate 1, 2: every ratio is 1/2
    vals = np.cumsum([0, 1, 2, 1, 2, 1, 2])
    res = level_spacing_ratio(vals)
    assert res.r == pytest.approx(0.5)
    assert res.skipped == 0
    # a duplicated level knocks out the two ratios touching it
    dup = level_spacing_ratio([0.0, 0.0, 1.0, 2.0, 3.0])
    assert dup.r == pytest.approx(1.0)
    assert dup.skipped == 1
    with pytest.raises(ValueError, match="distinct"):
        level_spacing_ratio([1.0, 1.0, 1.0, 1.0, 2.0, 3.0])


def test_level_spacing_ratio_permutation_invariant():
    rng = np.random.default_rng(3)
    vals = rng.standard_normal(40)
    a = level_spacing_ratio(vals)
    b = level_spacing_ratio(rng.permutation(vals))
    assert a.r == b.r


# ---------------------------------------------------------------------------
# entanglement entropy
# ---------------------------------------------------------------------------

def test_entropy_product_and_bell():
    assert entanglement_entropy(product_mps(4, [0, 1, 1, 0]), 2) == 0.0
    assert entanglement_entropy(bell_pair_mps(), 1) == pytest.approx(1.0, abs=1e-12)


def test_entropy_requires_normalized_state():
    state = bell_pair_mps()
    state.tensors[0] = DenseTensor(state.tensors[0].data * 1.001)
    with pytest.raises(ValueError, match="norm"):
        entanglement_entropy(MPS(state.tensors), 1)


def test_entropy_matches_dense_rdm_oracle():
    rng = np.random.default_rng(4)
    n = 8
    for trial in range(5):
        state = random_normalized_mps(n, 4, rng)
        vec = state.enumerate_dense()
        for cut in (2, n // 2, n - 2):
            mine = entanglement_entropy(state, cut)
            assert mine == pytest.approx(dense_ee_bits(vec, cut, n), abs=1e-9)


def test_entropy_symmetric_under_cut_reflection():
    state = ghz_mps(6)
    for cut in range(1, 6):
        left = entanglement_entropy(state, cut)
        right = entanglement_entropy(state, 6 - cut)
        assert left == pytest.approx(right, abs=1e-12)
        assert left == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# EE against energy
# ---------------------------------------------------------------------------

def test_ee_distribution_identity_circuit_is_flat_zero():
    s = SpectrumMPS.init_random(6, 4, seed=5)
    c = build_brickwall(6, 2, init="identity")
    dist = ee_energy_distribution(s, c, n_samples=32, seed=1, chi=16)
    assert np.all(dist.entropies == 0.0)
    assert dist.normalized_energies.max() <= 1.0 + 1e-12
    # deterministic under a fixed seed
    again = ee_energy_distribution(s, c, n_samples=32, seed=1, chi=16)
    assert np.array_equal(dist.energies, again.energies)
    assert np.array_equal(dist.entropies, again.entropies)


def test_ee_exhaustive_matches_dense_circuit_columns():
    """Every eigenstate EE agrees with the dense-unitary oracle."""
    n = 4
    rng = np.random.default_rng(6)
    s = SpectrumMPS.init_random(n, 4, seed=7)
    c = build_brickwall(n, 3, init="near-identity", noise=0.3, seed=8)
    dist = ee_energy_exhaustive(s, c, chi=2**(n // 2))
    u = c.to_dense().data
    for k in range(2**n):
        code = int("".join(str(b) for b in dist.bits[k]), 2)
        oracle = dense_ee_bits(u[:, code], n // 2, n)
        assert dist.entropies[k] == pytest.approx(oracle, abs=1e-9)
    assert np.array_equal(dist.energies, s.enumerate_entries())


def test_ee_deviation_stats_selects_levels():
    energies = np.array([-2.0, -1.0, 0.1, 3.0])
    ref = np.array([1.0, 1.0, 1.0, 1.0])
    fit = np.array([1.5, 1.0, 0.0, 9.0])
    stats = ee_deviation_stats(energies, ref, fit, n_avg=2)
    assert stats["dS_ground"] == pytest.approx(0.25)   # levels -2, -1
    assert stats["dS_zero"] == pytest.approx(0.5)      # levels 0.1, -1
    with pytest.raises(ValueError):
        ee_deviation_stats(energies, ref, fit[:-1])


def test_dense_state_entropy_hand_values():
    from tnvd import dense_state_entropy
    product = np.zeros(4)
    product[0] = 1.0
    assert dense_state_entropy(product, 1) == 0.0
    bell = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)
    assert dense_state_entropy(bell, 1) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError, match="norm"):
        dense_state_entropy(2.0 * bell, 1)
    with pytest.raises(ValueError, match="power of 2"):
        dense_state_entropy(np.ones(3) / np.sqrt(3.0), 1)
    with pytest.raises(ValueError, match="cut"):
        dense_state_entropy(bell, 2)


def test_dense_state_entropy_matches_mps_route():
    from tnvd import dense_state_entropy
    from tnvd.circuit import eigenstate_mps
    from tnvd.mps import entanglement_entropy_bits
    n = 6
    c = build_brickwall(n, 4, init="near-identity", noise=0.4, seed=11)
    bits = np.array([1, 0, 1, 1, 0, 0], dtype=np.uint8)
    psi = eigenstate_mps(c, bits, chi=2**(n // 2))
    dense = psi.enumerate_dense()
    for cut in range(1, n):
        assert dense_state_entropy(dense, cut) == pytest.approx(
            entanglement_entropy_bits(psi, cut), abs=1e-9)
