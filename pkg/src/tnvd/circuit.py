"""Brick-wall circuits of two-site gates parameterized by latent matrices.

Each gate stores an unconstrained 4x4 latent; the unitary actually applied
is its polar factor U Vh, recomputed through the tape on every forward pass
so gradients reach the latent.  Layer 0 acts on bonds (0,1), (2,3), ...,
layer 1 on (1,2), (3,4), ..., alternating.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import tensor
from .tensor import DenseTensor

DENSE_CIRCUIT_LIMIT = 12


def project_to_unitary(latent: DenseTensor) -> DenseTensor:
    """Closest unitary in Frobenius norm: the polar factor of the latent.

    A numerically singular latent is nudged by 1e-12 on the diagonal first
    (with a warning); the projection of an exactly singular matrix is not
    unique.
    """
    if latent.ndim != 2 or latent.shape[0] != latent.shape[1]:
        raise ValueError(f"latent must be square, got shape {latent.shape}")
    probe = np.linalg.svd(latent.data, compute_uv=False)
    if probe[-1] <= 1e-14 * max(probe[0], 1.0):
        warnings.warn("singular latent regularized before polar projection",
                      RuntimeWarning, stacklevel=2)
        eye = DenseTensor(1e-12 * np.eye(latent.shape[0]))
        latent = tensor.add(latent, eye)
    return tensor.polar(latent)


class LatentGate:
    """One two-site gate. ``unitary()`` projects on the tape when one is open."""

    def __init__(self, latent: DenseTensor):
        if latent.shape != (4, 4):
            raise ValueError(f"latent must be 4x4, got {latent.shape}")
        self.latent = latent
        self._cache: DenseTensor | None = None
        self._cache_key: int | None = None

    def unitary(self) -> DenseTensor:
        from .tensor import _open_tapes  # cache only valid outside recording

        if _open_tapes and self.latent.requires_grad:
            return project_to_unitary(self.latent)
        if self._cache is None or self._cache_key != id(self.latent):
            self._cache = project_to_unitary(self.latent)
            self._cache_key = id(self.latent)
        return self._cache

    def replace_latent(self, latent: DenseTensor):
        self.latent = latent
        self._cache = None
        self._cache_key = None


class BrickwallCircuit:
    """Alternating layers of two-site gates on an open chain."""

    def __init__(self, n_sites: int, gates: list[LatentGate], n_layers: int):
        if n_sites < 2:
            raise ValueError(f"need at least 2 sites, got {n_sites}")
        if n_layers < 1:
            raise ValueError(f"need at least 1 layer, got {n_layers}")
        expected = sum(len(layer_bonds(n_sites, l)) for l in range(n_layers))
        if len(gates) != expected:
            raise ValueError(f"{len(gates)} gates for layout needing {expected}")
        self.n_sites = n_sites
        self.n_layers = n_layers
        self.gates = list(gates)

    def placements(self) -> list[tuple[int, int, LatentGate]]:
        """(layer, bond, gate) triples in application order (layer 0 first)."""
        out = []
        k = 0
        for layer in range(self.n_layers):
            for bond in layer_bonds(self.n_sites, layer):
                out.append((layer, bond, self.gates[k]))
                k += 1
        return out

    def parameters(self) -> list[DenseTensor]:
        return [g.latent for g in self.gates]

    def to_dense(self) -> DenseTensor:
        """Compose all gates into the full 2^N x 2^N matrix (small N only)."""
        n = self.n_sites
        if n > DENSE_CIRCUIT_LIMIT:
            raise ValueError(f"dense composition limited to {DENSE_CIRCUIT_LIMIT} sites")
        dim = 1 << n
        mat = np.eye(dim, dtype=np.complex128)
        for _, bond, gate in self.placements():
            u4 = gate.unitary().data
            # apply on rows: reshape rows to (prefix, pair, suffix)
            pre = 1 << bond
            suf = dim >> (bond + 2)
            block = mat.reshape(pre, 4, suf * dim)
            block = np.tensordot(u4, block, axes=[(1,), (1,)])  # (4, pre, rest)
            mat = block.transpose(1, 0, 2).reshape(dim, dim)
        return DenseTensor(mat)


def layer_bonds(n_sites: int, layer: int) -> list[int]:
    """Bonds covered by a layer: even layers start at bond 0, odd at bond 1."""
    return list(range(layer % 2, n_sites - 1, 2))


def build_brickwall(n_sites: int, n_layers: int, init: str = "near-identity",
                    noise: float = 0.01, seed: int = 0,
                    requires_grad: bool = True) -> BrickwallCircuit:
    """Fresh circuit with identity, near-identity or fully random latents."""
    rng = np.random.default_rng(seed)
    gates = []
    total = sum(len(layer_bonds(n_sites, l)) for l in range(n_layers))
    for _ in range(total):
        if init == "identity":
            latent = np.eye(4, dtype=np.complex128)
        elif init == "near-identity":
            latent = np.eye(4) + noise * (rng.standard_normal((4, 4))
                                          + 1j * rng.standard_normal((4, 4)))
        elif init == "random":
            latent = (rng.standard_normal((4, 4))
                      + 1j * rng.standard_normal((4, 4))) / 2.0
        else:
            raise ValueError(f"unknown init mode {init!r}")
        gates.append(LatentGate(DenseTensor(latent, requires_grad=requires_grad)))
    return BrickwallCircuit(n_sites, gates, n_layers)


def eigenstate_mps(circuit: BrickwallCircuit, bits, chi: int, cutoff: float = 1e-14):
    """Apply the circuit to the product state |bits> and return the MPS."""
    from .evolution import TruncationPolicy, evolve_product_state

    policy = TruncationPolicy(chi_t=chi, cutoff=cutoff)
    state, _ = evolve_product_state(bits, circuit, policy)
    return state
