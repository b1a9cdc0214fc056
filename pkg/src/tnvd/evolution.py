"""TEBD engines: conjugate an MPO by the circuit, or evolve a product state.

Gate bookkeeping: the circuit unitary is U = G_K ... G_2 G_1 with G_1 the
first placement (layer 0, leftmost bond).  Evolving a ket applies the
placements in circuit order; conjugation M -> U^dag M U applies them in
reverse order as M -> g^dag M g.  Every two-site update is re-split by a
bond_split capped at chi_t with a relative cutoff, singular values absorbed
into the right factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor
from .circuit import BrickwallCircuit
from .hamiltonian import HamiltonianMPO
from .mps import MPS, inner_product
from .tensor import DenseTensor

# delta_abc = 1 iff a = b = c; fuses the MPO's two physical legs with the
# spectrum MPS leg when reading out diagonal matrix elements
_delta = np.zeros((2, 2, 2))
_delta[0, 0, 0] = _delta[1, 1, 1] = 1.0
SUPER_DIAGONAL = DenseTensor(_delta)
del _delta


@dataclass(frozen=True)
class TruncationPolicy:
    chi_t: int
    cutoff: float = 1e-14
    record_discard: bool = True

    def __post_init__(self):
        if self.chi_t < 1:
            raise ValueError(f"chi_t must be >= 1, got {self.chi_t}")
        if not 0.0 <= self.cutoff < 1.0:
            raise ValueError(f"cutoff must be in [0, 1), got {self.cutoff}")


def _gate_4legs(gate) -> DenseTensor:
    """Unitary as (out1, out2, in1, in2)."""
    return tensor.reshape(gate.unitary(), (2, 2, 2, 2))


def conjugate_mpo(h: HamiltonianMPO, c: BrickwallCircuit,
                  policy: TruncationPolicy) -> tuple[HamiltonianMPO, float]:
    """U^dag H U as an MPO, plus the cumulative discarded weight.

    Layers run in reverse circuit order so each step is M <- g^dag M g;
    within a layer the disjoint bonds are processed left to right.
    """
    if h.n_sites != c.n_sites:
        raise ValueError(f"site count mismatch: MPO {h.n_sites} vs circuit {c.n_sites}")
    tensors = list(h.tensors)
    discarded = 0.0
    placements = c.placements()
    by_layer: dict[int, list] = {}
    for layer, bond, gate in placements:
        by_layer.setdefault(layer, []).append((bond, gate))
    for layer in sorted(by_layer, reverse=True):
        for bond, gate in by_layer[layer]:
            g4 = _gate_4legs(gate)
            left, right, dw = _conjugate_pair(tensors[bond], tensors[bond + 1], g4, policy)
            tensors[bond] = left
            tensors[bond + 1] = right
            if policy.record_discard:
                discarded += dw
    return HamiltonianMPO(tensors), discarded


def _conjugate_pair(m1: DenseTensor, m2: DenseTensor, g4: DenseTensor,
                    policy: TruncationPolicy):
    """g^dag (m1 m2) g on one bond, re-split at chi_t."""
    block = tensor.contract(m1, m2, [(3, 0)])              # (l,o1,i1,o2,i2,r)
    ket = tensor.contract(block, g4, [(2, 0), (4, 1)])     # (l,o1,o2,r,y1,y2)
    both = tensor.contract(ket, tensor.conj(g4), [(1, 0), (2, 1)])  # (l,r,y1,y2,x1,x2)
    ordered = tensor.permute(both, (0, 4, 2, 5, 3, 1))     # (l,x1,y1,x2,y2,r)
    split = tensor.bond_split(ordered, left_axes=(0, 1, 2),
                              max_dim=policy.chi_t, cutoff=policy.cutoff)
    return split.left, split.right, split.discarded_weight


def evolve_product_state(bits, c: BrickwallCircuit,
                         policy: TruncationPolicy) -> tuple[MPS, float]:
    """Normalized MPS for U|bits>, with cumulative discarded weight."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape != (c.n_sites,):
        raise ValueError(f"expected {c.n_sites} bits, got shape {bits.shape}")
    if np.any((bits < 0) | (bits > 1)):
        raise ValueError("bits must be 0 or 1")
    tensors = []
    for b in bits:
        t = np.zeros((2, 1, 1))
        t[b, 0, 0] = 1.0
        tensors.append(DenseTensor(t))
    discarded = 0.0
    for _, bond, gate in c.placements():
        g4 = _gate_4legs(gate)
        a1, a2 = tensors[bond], tensors[bond + 1]
        block = tensor.contract(a1, a2, [(2, 1)])          # (p1,l,p2,r)
        acted = tensor.contract(block, g4, [(0, 2), (2, 3)])  # (l,r,x1,x2)
        ordered = tensor.permute(acted, (2, 0, 3, 1))      # (x1,l,x2,r)
        split = tensor.bond_split(ordered, left_axes=(0, 1),
                                  max_dim=policy.chi_t, cutoff=policy.cutoff)
        tensors[bond] = split.left                         # (x1,l,k)
        tensors[bond + 1] = tensor.permute(split.right, (1, 0, 2))  # (x2,k,r)
        if policy.record_discard:
            discarded += split.discarded_weight
    state = MPS(tensors)
    norm = state.norm()
    if norm > 0 and abs(norm - 1.0) > 1e-15:
        last = state.tensors[-1]
        state.tensors[-1] = tensor.scale(last, 1.0 / norm)
    return state, discarded


def mpo_diagonal_overlap(m: HamiltonianMPO, s) -> DenseTensor:
    """sum_alpha <r_alpha| M |r_alpha> * s_alpha, contracted through deltas.

    Tape-recorded, so gradients reach both the MPO route (circuit latents)
    and the spectrum tensors.
    """
    if m.n_sites != s.n_sites:
        raise ValueError(f"site count mismatch: MPO {m.n_sites} vs MPS {s.n_sites}")
    env = DenseTensor(np.ones((1, 1)))  # (mpo bond, mps bond)
    for mt, st in zip(m.tensors, s.tensors):
        fused = tensor.contract(mt, SUPER_DIAGONAL, [(1, 0), (2, 1)])  # (l,r,c)
        site = tensor.contract(fused, st, [(2, 0)])                    # (l,r,a,b)
        env = tensor.contract(env, site, [(0, 0), (1, 2)])             # (r,b)
    return tensor.reshape(env, ())
