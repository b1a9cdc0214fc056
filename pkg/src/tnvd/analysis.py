"""Spectrum diagnostics: eigenvalue error, density of states with fits,
level-spacing statistics, and entanglement-entropy distributions.

Everything here is pure over immutable inputs.  Fits return a FitResult
with the model tag, parameters, and residual norm; histograms carry their
sample count so fit preconditions can be checked downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .circuit import BrickwallCircuit, eigenstate_mps
from .mps import MPS, SpectrumMPS, entanglement_entropy_bits


# ---------------------------------------------------------------------------
# eigenvalue error
# ---------------------------------------------------------------------------

def mean_abs_error(exact, fitted) -> float:
    """Mean |E - Etilde| after sorting both spectra ascending.

    Sorting makes the measure permutation-invariant; the pairing of levels
    is by rank, the only convention stable under relabeling.
    """
    exact = np.sort(np.asarray(exact, dtype=np.float64))
    fitted = np.sort(np.asarray(fitted, dtype=np.float64))
    if exact.shape != fitted.shape:
        raise ValueError(
            f"spectra differ in length: {exact.shape[0]} vs {fitted.shape[0]}")
    return float(np.abs(exact - fitted).mean())


# ---------------------------------------------------------------------------
# density of states
# ---------------------------------------------------------------------------

@dataclass
class DOSHistogram:
    edges: np.ndarray           # K+1 bin edges, energy units
    counts: np.ndarray          # K counts; raw or max-normalized
    normalization: str          # "raw" | "max"
    n_samples: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def bin_width(self) -> float:
        return float(self.edges[1] - self.edges[0])


@dataclass
class FitResult:
    model: str                  # "gaussian" | "shifted-poisson"
    params: dict
    residual_norm: float
    meta: dict = field(default_factory=dict)


def dos_histogram(values, bins=None, normalization: str = "raw") -> DOSHistogram:
    """Histogram of eigenvalues; Freedman-Diaconis bin count by default."""
    if normalization not in ("raw", "max"):
        raise ValueError(f"unknown normalization {normalization!r}")
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("cannot histogram an empty sample")
    edges = np.histogram_bin_edges(values, bins="fd" if bins is None else bins)
    counts, edges = np.histogram(values, bins=edges)
    counts = counts.astype(np.float64)
    if normalization == "max":
        peak = counts.max()
        if peak > 0:
            counts = counts / peak
    return DOSHistogram(edges=edges, counts=counts,
                        normalization=normalization, n_samples=values.size)


def fit_gaussian(hist: DOSHistogram) -> FitResult:
    """Least-squares A*exp(-E^2 / 2 sigma^2) over bin centers, mu fixed at 0."""
    if hist.n_samples < 100:
        raise ValueError(f"need >= 100 samples to fit, got {hist.n_samples}")
    occupied = hist.counts > 0
    if occupied.sum() < 2:
        raise ValueError("degenerate histogram: fewer than two occupied bins")
    centers = hist.centers
    counts = hist.counts
    total = counts.sum()
    sigma0 = float(np.sqrt(np.sum(counts * centers**2) / total))
    if not np.isfinite(sigma0) or sigma0 < 1e-9:
        # all occupied mass sits at E ~ 0; fall back to the bin scale so
        # the warm start stays inside the bounds handed to the solver
        sigma0 = max(float(hist.bin_width), 1e-9)

    def model(e, a, sigma):
        return a * np.exp(-e**2 / (2.0 * sigma**2))

    popt, _ = curve_fit(model, centers, counts,
                        p0=(float(counts.max()), sigma0),
                        bounds=([0.0, 1e-12], [np.inf, np.inf]), maxfev=10000)
    resid = float(np.linalg.norm(counts - model(centers, *popt)))
    return FitResult(model="gaussian",
                     params={"A": float(popt[0]), "sigma": float(popt[1]),
                             "mu": 0.0},
                     residual_norm=resid)


def fit_shifted_poisson(hist: DOSHistogram) -> FitResult:
    """Least-squares exp(-omega (s_tilde - S) / delta) on max-normalized counts.

    delta is fixed to the bin width.  omega may come out negative (pure
    decay from S = 0); s_tilde is only identified when omega is nonzero.
    """
    if hist.n_samples < 50:
        raise ValueError(f"need >= 50 samples to fit, got {hist.n_samples}")
    counts = hist.counts
    peak = counts.max()
    if peak <= 0:
        raise ValueError("no positive counts to fit")
    y = counts / peak
    centers = hist.centers
    delta = hist.bin_width

    # log-linear warm start on the occupied bins
    pos = y > 0
    slope, intercept = np.polyfit(centers[pos], np.log(y[pos]), 1) \
        if pos.sum() >= 2 else (0.0, 0.0)
    omega0 = float(slope * delta)
    st0 = float(-intercept / slope) if abs(slope) > 1e-12 else float(centers.mean())

    def model(s, omega, s_tilde):
        return np.exp(-omega * (s_tilde - s) / delta)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OptimizeWarning)  # flat data has no curvature
        popt, _ = curve_fit(model, centers, y, p0=(omega0, st0), maxfev=10000)
    resid = float(np.linalg.norm(y - model(centers, *popt)))
    return FitResult(model="shifted-poisson",
                     params={"omega": float(popt[0]), "s_tilde": float(popt[1]),
                             "delta": float(delta)},
                     residual_norm=resid)


# ---------------------------------------------------------------------------
# level statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpacingRatio:
    r: float
    used: int        # interior points that contributed a ratio
    skipped: int     # interior points dropped for a zero adjacent spacing


def level_spacing_ratio(values) -> SpacingRatio:
    """r = mean_n min(d_n, d_{n-1}) / max(d_n, d_{n-1}) over interior levels.

    Zero spacings (degenerate adjacent levels) are skipped and counted.
    """
    vals = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if np.unique(vals).size < 4:
        raise ValueError("need at least 4 distinct levels")
    deltas = np.diff(vals)
    ratios = []
    skipped = 0
    for n in range(1, deltas.size):
        lo, hi = deltas[n - 1], deltas[n]
        if lo == 0.0 or hi == 0.0:
            skipped += 1
            continue
        ratios.append(min(lo, hi) / max(lo, hi))
    if not ratios:
        raise ValueError("every interior level pair was degenerate")
    return SpacingRatio(r=float(np.mean(ratios)), used=len(ratios),
                        skipped=skipped)


# ---------------------------------------------------------------------------
# entanglement entropy
# ---------------------------------------------------------------------------

def entanglement_entropy(state: MPS, cut: int) -> float:
    """Bipartite von Neumann entropy in bits; the state must be normalized."""
    norm = state.norm()
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"state norm {norm:.8f} is not 1 within 1e-6")
    return entanglement_entropy_bits(state, cut)


def dense_state_entropy(state, cut: int) -> float:
    """Bipartite EE in bits of a dense state vector; site 0 is the leading bit."""
    vec = np.asarray(state).ravel()
    n = int(round(np.log2(vec.size)))
    if 2**n != vec.size:
        raise ValueError(f"state length {vec.size} is not a power of 2")
    if not 0 < cut < n:
        raise ValueError(f"cut {cut} outside open range (0, {n})")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"state norm {norm:.8f} is not 1 within 1e-6")
    sing = np.linalg.svd(vec.reshape(2**cut, -1), compute_uv=False)
    p = sing**2
    p = p[p > 1e-300]
    return float(-(p * np.log2(p)).sum())


@dataclass
class EEDistribution:
    bits: np.ndarray                 # (M, N) uint8 eigenstate labels
    energies: np.ndarray             # (M,) raw eigenenergies
    normalized_energies: np.ndarray  # (M,) energies / max |energy| in the set
    entropies: np.ndarray            # (M,) mid-cut EE in bits


def _ee_rows(c: BrickwallCircuit, bits: np.ndarray, energies: np.ndarray,
             chi: int, cutoff: float) -> EEDistribution:
    n = c.n_sites
    cut = n // 2
    entropies = np.empty(bits.shape[0], dtype=np.float64)
    for k in range(bits.shape[0]):
        psi = eigenstate_mps(c, bits[k], chi=chi, cutoff=cutoff)
        entropies[k] = entanglement_entropy_bits(psi, cut)
    scale = float(np.max(np.abs(energies))) if energies.size else 0.0
    ebar = energies / scale if scale > 0 else np.zeros_like(energies)
    return EEDistribution(bits=bits, energies=energies,
                          normalized_energies=ebar, entropies=entropies)


def ee_energy_distribution(s: SpectrumMPS, c: BrickwallCircuit,
                           n_samples: int, seed: int = 0, chi: int = 64,
                           cutoff: float = 1e-14) -> EEDistribution:
    """Mid-cut EE against normalized eigenenergy for M uniform bitstrings.

    Energies are normalized by the largest |E| in the sampled set.  The
    eigenstate bond dimension is capped at ``chi``; raise it when the
    circuit is deep enough to saturate the cap.
    """
    if s.n_sites != c.n_sites:
        raise ValueError(f"site count mismatch: {s.n_sites} vs {c.n_sites}")
    bits, energies = s.sample_entries(n_samples, seed=seed)
    return _ee_rows(c, bits, energies, chi, cutoff)


def ee_energy_exhaustive(s: SpectrumMPS, c: BrickwallCircuit, chi: int = 64,
                         cutoff: float = 1e-14) -> EEDistribution:
    """All 2^N eigenstates in bitstring order; small N only."""
    n = s.n_sites
    if s.n_sites != c.n_sites:
        raise ValueError(f"site count mismatch: {s.n_sites} vs {c.n_sites}")
    if n > 14:
        raise ValueError(f"exhaustive enumeration limited to 14 sites, got {n}")
    codes = np.arange(2**n, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1).astype(np.uint8)
    energies = s.enumerate_entries()
    return _ee_rows(c, bits, energies, chi, cutoff)


def ee_deviation_stats(energies, reference, fitted, n_avg: int = 100) -> dict:
    """Mean |dS| over the lowest-energy levels and over those nearest E = 0.

    Inputs are aligned per level.  ``n_avg`` caps at the number of levels.
    """
    energies = np.asarray(energies, dtype=np.float64)
    d = np.abs(np.asarray(reference, dtype=np.float64)
               - np.asarray(fitted, dtype=np.float64))
    if energies.shape != d.shape:
        raise ValueError("energies and entropy arrays differ in length")
    k = min(n_avg, energies.size)
    ground = np.argsort(energies)[:k]
    near_zero = np.argsort(np.abs(energies))[:k]
    return {"dS_ground": float(d[ground].mean()),
            "dS_zero": float(d[near_zero].mean())}
