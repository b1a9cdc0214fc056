"""Loss assembly against dense oracles, gradients against finite differences."""

import warnings

import numpy as np
import pytest

from tnvd import tensor
from tnvd.circuit import BrickwallCircuit, LatentGate, build_brickwall
from tnvd.ed import full_spectrum
from tnvd.evolution import TruncationPolicy
from tnvd.hamiltonian import IsingSpec, build_dense, build_ising_mpo
from tnvd.mps import SpectrumMPS
from tnvd.objective import LossBreakdown, dense_ansatz, dense_loss, loss
from tnvd.tensor import DenseTensor, GradTape

from conftest import rel_err


def full_rank(n):
    return TruncationPolicy(chi_t=4 ** (n // 2))


def test_perfect_ansatz_two_sites():
    spec = IsingSpec(n_sites=2, h=0.5)
    res = full_spectrum(spec, want_vectors=True)
    # gate columns = eigenvectors, so U|r_a> is the a-th eigenstate
    gate = LatentGate(DenseTensor(res.eigenvectors))
    c = BrickwallCircuit(2, [gate], 1)
    s, fit_err = SpectrumMPS.fit_from_dense(res.eigenvalues, chi_a=2)
    assert fit_err < 1e-12
    lb = loss(build_ising_mpo(spec), s, c, full_rank(2))
    assert lb.pre_log <= 1e-10
    assert lb.F <= np.log2(1e-10) - 2
    assert not lb.saturated or lb.F == float("-inf")


def test_zero_mps_identity_circuit():
    n = 5
    spec = IsingSpec(n_sites=n, h=0.5)
    mpo = build_ising_mpo(spec)
    zeros = SpectrumMPS([DenseTensor(np.zeros((2, 1, 1))) for _ in range(n)], chi_a=1)
    c = build_brickwall(n, 2, init="identity")
    lb = loss(mpo, zeros, c, full_rank(n))
    from tnvd.hamiltonian import mpo_trace_product

    want_hh = mpo_trace_product(mpo, mpo).real
    assert abs(lb.term_tt) < 1e-14
    assert abs(lb.term_cross) < 1e-12
    assert abs(lb.F - (np.log2(want_hh) - n)) < 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_loss_dense_oracle_random_ansatz(seed):
    n = 6
    rng = np.random.default_rng(seed)
    spec = IsingSpec(n_sites=n, h=float(rng.uniform(0.2, 1.0)),
                     disorder_w=float(rng.uniform(0, 0.5)), seed=seed)
    mpo = build_ising_mpo(spec)
    c = build_brickwall(n, 4, init="random", seed=seed)
    s = SpectrumMPS.init_random(n, chi_a=4, scale=0.5, seed=seed, requires_grad=False)
    lb = loss(mpo, s, c, full_rank(n))
    want = dense_loss(build_dense(spec).data, s, c)
    assert abs(lb.F - want) < 1e-8
    assert lb.term_hh >= 0 and lb.term_tt >= 0


def test_term_values_match_definitions():
    n = 4
    spec = IsingSpec(n_sites=n, h=0.7)
    mpo = build_ising_mpo(spec)
    c = build_brickwall(n, 2, init="random", seed=5)
    s = SpectrumMPS.init_random(n, chi_a=2, scale=1.0, seed=5, requires_grad=False)
    lb = loss(mpo, s, c, full_rank(n))
    h_dense = build_dense(spec).data
    ht = dense_ansatz(s, c).data
    assert abs(lb.term_hh - np.trace(h_dense @ h_dense.conj().T).real) < 1e-9
    assert abs(lb.term_tt - np.sum(s.enumerate_entries() ** 2)) < 1e-9
    assert abs(lb.term_cross - np.trace(h_dense @ ht.conj().T).real) < 1e-8


def test_loss_site_mismatch():
    mpo = build_ising_mpo(IsingSpec(n_sites=4))
    c = build_brickwall(4, 1)
    s = SpectrumMPS.init_random(5, 2)
    with pytest.raises(ValueError):
        loss(mpo, s, c, full_rank(4))


def test_saturation_sentinel():
    # force a nonpositive argument: Ht == H exactly and term_hh slightly
    # understated through the cached-term override
    spec = IsingSpec(n_sites=2, h=0.5)
    res = full_spectrum(spec, want_vectors=True)
    c = BrickwallCircuit(2, [LatentGate(DenseTensor(res.eigenvectors))], 1)
    s, _ = SpectrumMPS.fit_from_dense(res.eigenvalues, chi_a=2)
    mpo = build_ising_mpo(spec)
    lb = loss(mpo, s, c, full_rank(2), term_hh=0.0)
    assert lb.saturated
    assert lb.F == float("-inf")


def test_permutation_invariance_dense():
    # flipping bits 0,1 in the spectrum labels while folding X(x)X into the
    # first-layer gate leaves the ansatz operator unchanged
    n = 4
    spec = IsingSpec(n_sites=n, h=0.5)
    mpo = build_ising_mpo(spec)
    c = build_brickwall(n, 2, init="random", seed=7)
    s = SpectrumMPS.init_random(n, chi_a=2, scale=0.8, seed=7, requires_grad=False)

    xx = np.kron(np.array([[0, 1], [1, 0]]), np.array([[0, 1], [1, 0]]))
    gates2 = [LatentGate(g.latent) for g in c.gates]
    # placements: layer0 -> bonds 0,2; the bond-0 gate is gates[0]
    gates2[0] = LatentGate(DenseTensor(c.gates[0].latent.data @ xx))
    c2 = BrickwallCircuit(n, gates2, 2)

    flipped = [DenseTensor(s.tensors[k].data[::-1] if k < 2 else s.tensors[k].data)
               for k in range(n)]
    s2 = SpectrumMPS(flipped, chi_a=s.chi_a)

    assert rel_err(dense_ansatz(s2, c2).data, dense_ansatz(s, c).data) < 1e-12
    lb1 = loss(mpo, s, c, full_rank(n))
    lb2 = loss(mpo, s2, c2, full_rank(n))
    assert abs(lb1.F - lb2.F) < 1e-10


# ---------------------------------------------------------------------------
# dense_ansatz examples
# ---------------------------------------------------------------------------

def test_dense_ansatz_identity_circuit_is_diagonal():
    rng = np.random.default_rng(8)
    values = rng.standard_normal(2**4)
    s, _ = SpectrumMPS.fit_from_dense(values, chi_a=4)
    c = build_brickwall(4, 2, init="identity")
    ht = dense_ansatz(s, c).data
    assert rel_err(ht, np.diag(values)) < 1e-12


def test_dense_ansatz_zero_mps():
    zeros = SpectrumMPS([DenseTensor(np.zeros((2, 1, 1))) for _ in range(4)], chi_a=1)
    c = build_brickwall(4, 1, init="random", seed=9)
    assert np.allclose(dense_ansatz(zeros, c).data, 0)


def test_dense_ansatz_eigenvalues_and_hermiticity():
    n = 8
    rng = np.random.default_rng(10)
    values = rng.standard_normal(2**n)
    s, _ = SpectrumMPS.fit_from_dense(values, chi_a=16)
    c = build_brickwall(n, 3, init="random", seed=10)
    ht = dense_ansatz(s, c).data
    assert np.max(np.abs(ht - ht.conj().T)) < 1e-10
    got = np.linalg.eigvalsh(ht)
    assert rel_err(got, np.sort(values)) < 1e-10


def test_dense_ansatz_site_guard():
    s = SpectrumMPS.init_random(13, 2)
    c = build_brickwall(13, 1)
    with pytest.raises(ValueError):
        dense_ansatz(s, c)


# ---------------------------------------------------------------------------
# gradients through the full pipeline
# ---------------------------------------------------------------------------

def _pipeline_F(spec, s_arrays, latents, policy):
    """Loss pre-log as a plain function of raw parameter arrays, for FD.

    Imaginary-direction probes make the spectrum MPS complex, which the
    cross-term realness tripwire flags; that is intentional here.
    """
    n = spec.n_sites
    s = SpectrumMPS([DenseTensor(a) for a in s_arrays], chi_a=max(
        max(a.shape[2] for a in s_arrays), 1))
    gates = [LatentGate(DenseTensor(l)) for l in latents]
    layers = 2
    c = BrickwallCircuit(n, gates, layers)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        lb = loss(build_ising_mpo(spec), s, c, policy)
    return lb.pre_log


def test_gradient_vs_fd_probes():
    n = 6
    spec = IsingSpec(n_sites=n, h=0.5)
    policy = full_rank(n)
    rng = np.random.default_rng(11)
    s = SpectrumMPS.init_random(n, chi_a=4, scale=0.3, seed=11)
    c = build_brickwall(n, 2, init="near-identity", noise=0.05, seed=11)
    mpo = build_ising_mpo(spec)

    with GradTape() as tape:
        lb = loss(mpo, s, c, policy)
        grads = tape.backward(tensor.real_part(lb.objective))

    s_arrays = [t.data for t in s.tensors]
    latents = [g.latent.data for g in c.gates]
    h = 1e-5

    def probe(kind, which, idx):
        def value(delta):
            sa = [a.copy() for a in s_arrays]
            la = [a.copy() for a in latents]
            if kind == "mps":
                sa[which][idx] += delta
            else:
                la[which][idx] += delta
            return _pipeline_F(spec, sa, la, policy)

        re = (value(h) - value(-h)) / (2 * h)
        im = (value(1j * h) - value(-1j * h)) / (2 * h)
        return re + 1j * im

    checked = 0
    for kind, pool in (("mps", s.tensors), ("gate", [g.latent for g in c.gates])):
        for _ in range(5):
            which = int(rng.integers(len(pool)))
            leaf = pool[which]
            idx = tuple(int(rng.integers(d)) for d in leaf.shape)
            fd = probe(kind, which, idx)
            got = grads[leaf].data[idx]
            denom = max(abs(fd), 1e-8)
            assert abs(got - fd) / denom < 1e-3, (kind, which, idx, got, fd)
            checked += 1
    assert checked == 10


def test_gradient_descent_step_decreases_loss():
    n = 4
    spec = IsingSpec(n_sites=n, h=0.5)
    policy = full_rank(n)
    mpo = build_ising_mpo(spec)
    s = SpectrumMPS.init_random(n, chi_a=2, scale=0.1, seed=12)
    c = build_brickwall(n, 2, init="near-identity", seed=12)

    with GradTape() as tape:
        lb = loss(mpo, s, c, policy)
        grads = tape.backward(tensor.real_part(lb.objective))
    lr = 1e-3
    s2 = SpectrumMPS([DenseTensor(t.data - lr * grads[t].data.real)
                      for t in s.tensors], chi_a=s.chi_a)
    gates2 = [LatentGate(DenseTensor(g.latent.data - lr * grads[g.latent].data))
              for g in c.gates]
    c2 = BrickwallCircuit(n, gates2, 2)
    lb2 = loss(mpo, s2, c2, policy)
    assert lb2.pre_log < lb.pre_log
