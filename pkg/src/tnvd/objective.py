"""Training loss: the logarithmic Schmidt distance between H and the ansatz.

F = log2( Tr(H H^dag) + Tr(Ht Ht^dag) - 2 Tr(H Ht^dag) ) - N, assembled from
three trace terms: an MPO-MPO contraction (constant during training), the
spectrum-MPS self-overlap, and the TEBD-conjugated diagonal overlap.  The
pre-log argument is what optimizers should minimize; F is the reported
figure of merit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import tensor
from .circuit import BrickwallCircuit, DENSE_CIRCUIT_LIMIT
from .evolution import TruncationPolicy, conjugate_mpo, mpo_diagonal_overlap
from .hamiltonian import HamiltonianMPO, mpo_trace_product
from .mps import SpectrumMPS, inner_product_taped
from .tensor import DenseTensor

CROSS_IMAG_WARN = 1e-8


@dataclass
class LossBreakdown:
    term_hh: float            # Tr(H H^dag)
    term_tt: float            # Tr(Ht Ht^dag) = sum of squared entries
    term_cross: float         # Re Tr(H Ht^dag)
    F: float                  # log2(pre-log) - N, or -inf when saturated
    discarded_weight: float
    saturated: bool = False   # pre-log argument was nonpositive
    objective: DenseTensor | None = None  # pre-log node when a tape is open

    @property
    def pre_log(self) -> float:
        return self.term_hh + self.term_tt - 2.0 * self.term_cross


def loss(h: HamiltonianMPO, s: SpectrumMPS, c: BrickwallCircuit,
         policy: TruncationPolicy, term_hh: float | None = None) -> LossBreakdown:
    """Full loss pipeline; recorded on the active tape when one is open.

    ``term_hh`` never changes during training and can be passed in to skip
    the MPO-MPO contraction.  A nonpositive log argument (possible from
    truncation error once Ht is very close to H) yields F = -inf with the
    ``saturated`` flag instead of raising.
    """
    n = h.n_sites
    if s.n_sites != n or c.n_sites != n:
        raise ValueError(
            f"site counts differ: MPO {h.n_sites}, spectrum {s.n_sites}, circuit {c.n_sites}")
    if term_hh is None:
        term_hh = mpo_trace_product(h, h).real

    tt_node = tensor.real_part(inner_product_taped(s, s))
    evolved, discarded = conjugate_mpo(h, c, policy)
    cross_node = mpo_diagonal_overlap(evolved, s)
    cross_val = cross_node.item()
    # judge the residue against the contraction scale, not the (possibly
    # cancelled) real part: sqrt(hh * tt) bounds |cross| from above
    cross_scale = float(np.sqrt(max(term_hh, 0.0) * max(tt_node.item().real, 0.0)))
    if abs(cross_val.imag) > CROSS_IMAG_WARN * max(1.0, abs(cross_val.real), cross_scale):
        warnings.warn(
            f"Tr(H Ht^dag) has imaginary residue {cross_val.imag:.3e}; "
            "TEBD pass may be corrupted", RuntimeWarning, stacklevel=2)
    cross_re = tensor.real_part(cross_node)

    pre_log = tensor.add(
        tensor.add(DenseTensor(np.array(term_hh)), tt_node),
        tensor.scale(cross_re, -2.0))
    arg = pre_log.item().real
    if arg > 0.0:
        f_val = float(np.log2(arg) - n)
        saturated = False
    else:
        f_val = float("-inf")
        saturated = True
    return LossBreakdown(
        term_hh=float(term_hh),
        term_tt=float(tt_node.item().real),
        term_cross=float(cross_val.real),
        F=f_val,
        discarded_weight=float(discarded),
        saturated=saturated,
        objective=pre_log,
    )


def dense_ansatz(s: SpectrumMPS, c: BrickwallCircuit) -> DenseTensor:
    """Ht = U diag(entries) U^dag as a dense matrix (small N only)."""
    if s.n_sites != c.n_sites:
        raise ValueError(f"site count mismatch: {s.n_sites} vs {c.n_sites}")
    if s.n_sites > DENSE_CIRCUIT_LIMIT:
        raise ValueError(f"dense ansatz limited to {DENSE_CIRCUIT_LIMIT} sites")
    u = c.to_dense().data
    entries = s.enumerate_dense()  # complex; real for real-parameterized MPS
    return DenseTensor((u * entries[None, :]) @ u.conj().T)


def dense_loss(h_dense: np.ndarray, s: SpectrumMPS, c: BrickwallCircuit) -> float:
    """Oracle F from fully dense matrices; no tensor networks involved."""
    diff = np.asarray(h_dense) - dense_ansatz(s, c).data
    arg = float(np.linalg.norm(diff) ** 2)
    if arg <= 0.0:
        return float("-inf")
    return float(np.log2(arg) - s.n_sites)
