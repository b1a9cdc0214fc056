"""Transverse-field Ising chains as dense matrices and bond-dimension-3 MPOs.

Conventions: spin operators are S = sigma/2, site 0 is the leftmost site
and the most significant bit of a basis index, boundaries are open.  MPO
site tensors are indexed (left, phys_out, phys_in, right).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import DenseTensor

IDENTITY_2 = np.eye(2, dtype=np.complex128)
S_X = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=np.complex128)
S_Z = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=np.complex128)

DENSE_SITE_LIMIT = 14


@dataclass(frozen=True)
class IsingSpec:
    """Problem definition: H = -sum S^z_n S^z_{n+1} - h sum S^x_n + sum w_n S^z_n.

    With ``disorder_w > 0`` the per-site fields w_n are drawn uniformly from
    [-disorder_w, disorder_w] using ``seed``; otherwise ``fields_w`` is used
    as given (all zero by default).
    """

    n_sites: int
    h: float = 0.5
    fields_w: tuple = ()
    disorder_w: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be >= 1, got {self.n_sites}")
        if self.disorder_w < 0:
            raise ValueError(f"disorder_w must be >= 0, got {self.disorder_w}")
        if self.fields_w and len(self.fields_w) != self.n_sites:
            raise ValueError(
                f"fields_w has {len(self.fields_w)} entries for {self.n_sites} sites")
        object.__setattr__(self, "fields_w", tuple(float(x) for x in self.fields_w))

    def longitudinal_fields(self) -> np.ndarray:
        if self.disorder_w > 0:
            rng = np.random.default_rng(self.seed)
            return rng.uniform(-self.disorder_w, self.disorder_w, self.n_sites)
        if self.fields_w:
            return np.array(self.fields_w, dtype=np.float64)
        return np.zeros(self.n_sites)


class HamiltonianMPO:
    """Matrix product operator: site tensors (left, phys_out, phys_in, right)."""

    def __init__(self, tensors: list[DenseTensor]):
        if not tensors:
            raise ValueError("empty MPO")
        for k, t in enumerate(tensors):
            if t.ndim != 4 or t.shape[1] != 2 or t.shape[2] != 2:
                raise ValueError(f"site {k}: bad MPO tensor shape {t.shape}")
            if k and tensors[k - 1].shape[3] != t.shape[0]:
                raise ValueError(f"bond mismatch between sites {k - 1} and {k}")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[3] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        self.tensors = list(tensors)

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    def bond_dims(self) -> list[int]:
        return [t.shape[3] for t in self.tensors[:-1]]

    @classmethod
    def identity(cls, n_sites: int) -> "HamiltonianMPO":
        site = IDENTITY_2.reshape(1, 2, 2, 1)
        return cls([DenseTensor(site) for _ in range(n_sites)])

    def to_dense(self) -> DenseTensor:
        """Contract the full operator; guarded to small chains."""
        if self.n_sites > DENSE_SITE_LIMIT:
            raise ValueError(f"dense reconstruction limited to {DENSE_SITE_LIMIT} sites")
        acc = self.tensors[0].data[0]  # (2, 2, D)
        for t in self.tensors[1:]:
            nxt = np.tensordot(acc, t.data, axes=[(2,), (0,)])  # (o,i, o',i',D')
            d_out = acc.shape[0] * 2
            d_in = acc.shape[1] * 2
            acc = nxt.transpose(0, 2, 1, 3, 4).reshape(d_out, d_in, t.shape[3])
        return DenseTensor(acc[:, :, 0])

    def trace(self) -> complex:
        env = np.ones(1, dtype=np.complex128)
        for t in self.tensors:
            env = env @ np.trace(t.data, axis1=1, axis2=2)
        return complex(env[0])


def build_ising_mpo(spec: IsingSpec) -> HamiltonianMPO:
    """Assemble the chain MPO from a left-to-right automaton.

    Internal states: 0 = no coupling started, 1 = S^z placed on the previous
    site, 2 = this term is complete.  All interior bonds have dimension 3.
    """
    if spec.n_sites < 2:
        raise ValueError(f"MPO construction needs at least 2 sites, got {spec.n_sites}")
    w = spec.longitudinal_fields()
    sites = []
    for wn in w:
        block = np.zeros((3, 2, 2, 3), dtype=np.complex128)
        block[0, :, :, 0] = IDENTITY_2
        block[0, :, :, 1] = S_Z
        block[0, :, :, 2] = -spec.h * S_X + wn * S_Z
        block[1, :, :, 2] = -S_Z
        block[2, :, :, 2] = IDENTITY_2
        sites.append(block)
    sites[0] = sites[0][:1]          # start in state 0
    sites[-1] = sites[-1][:, :, :, 2:]  # end in state 2
    return HamiltonianMPO([DenseTensor(s) for s in sites])


def build_dense(spec: IsingSpec) -> DenseTensor:
    """Dense Hamiltonian built directly from bit arithmetic (no MPO involved).

    Kept independent of build_ising_mpo so the two construction routes can
    cross-check each other.
    """
    n = spec.n_sites
    if n > DENSE_SITE_LIMIT:
        raise ValueError(f"dense build limited to {DENSE_SITE_LIMIT} sites, got {n}")
    w = spec.longitudinal_fields()
    dim = 1 << n
    # site k occupies bit (n-1-k); bit value 0 means S^z = +1/2
    bits = (np.arange(dim)[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    sz = 0.5 - bits
    diag = sz @ w
    if n > 1:
        diag = diag - np.sum(sz[:, :-1] * sz[:, 1:], axis=1)
    ham = np.zeros((dim, dim), dtype=np.complex128)
    idx = np.arange(dim)
    ham[idx, idx] = diag
    for k in range(n):
        ham[idx, idx ^ (1 << (n - 1 - k))] += -spec.h / 2.0
    return DenseTensor(ham)


def mpo_trace_product(a: HamiltonianMPO, b: HamiltonianMPO) -> complex:
    """Tr(A B^dagger) contracted site by site in O(N) transfer steps."""
    if a.n_sites != b.n_sites:
        raise ValueError(f"site count mismatch: {a.n_sites} vs {b.n_sites}")
    env = np.ones((1, 1), dtype=np.complex128)
    for ta, tb in zip(a.tensors, b.tensors):
        site = np.einsum("lpqr,kpqs->lkrs", ta.data, tb.data.conj())
        env = np.tensordot(env, site, axes=[(0, 1), (0, 1)])
    return complex(env[0, 0])


def trace_h_squared(spec: IsingSpec) -> float:
    """Closed form for Tr(H H^dagger) of the Ising chain.

    Pauli strings are trace-orthogonal, so each term contributes its squared
    coefficient times 2^N: (N-1) bonds at 1/16, N transverse fields at h^2/4
    and the longitudinal fields at w_n^2/4.
    """
    n = spec.n_sites
    w = spec.longitudinal_fields()
    bonds = max(n - 1, 0)
    return (2.0**n) * (bonds / 16.0 + n * spec.h**2 / 4.0 + float(np.sum(w**2)) / 4.0)
