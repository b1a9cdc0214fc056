"""Matrix product states over qubit chains.

Site tensors are indexed (phys, left, right) with dimension-1 boundary
bonds; site 0 is the most significant bit of a basis index.  The same
container serves quantum states and the spectrum tensor, whose entry at
bitstring (r_1 .. r_N) is the eigenvalue assigned to that label.
"""

from __future__ import annotations

import numpy as np

from . import tensor
from .tensor import DenseTensor

ENUMERATION_SITE_LIMIT = 20


class MPS:
    """Chain of (phys=2, left, right) tensors."""

    def __init__(self, tensors: list[DenseTensor]):
        if not tensors:
            raise ValueError("empty MPS")
        for k, t in enumerate(tensors):
            if t.ndim != 3 or t.shape[0] != 2:
                raise ValueError(f"site {k}: bad MPS tensor shape {t.shape}")
            if k and tensors[k - 1].shape[2] != t.shape[1]:
                raise ValueError(f"bond mismatch between sites {k - 1} and {k}")
        if tensors[0].shape[1] != 1 or tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        self.tensors = list(tensors)

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def evaluate(self, bits) -> complex:
        """Single entry by chain of bond-vector products."""
        bits = _check_bits(bits, self.n_sites)
        vec = np.ones(1, dtype=np.complex128)
        for b, t in zip(bits, self.tensors):
            vec = vec @ t.data[b]
        return complex(vec[0])

    def enumerate_dense(self) -> np.ndarray:
        """All 2^N entries, index ordered with site 0 as the leading bit."""
        n = self.n_sites
        if n > ENUMERATION_SITE_LIMIT:
            raise ValueError(f"enumeration limited to {ENUMERATION_SITE_LIMIT} sites, got {n}")
        block = self.tensors[0].data.transpose(1, 0, 2).reshape(2, -1)  # (2, D)
        for t in self.tensors[1:]:
            block = np.tensordot(block, t.data, axes=[(1,), (1,)])  # (x, p, r)
            block = block.reshape(block.shape[0] * 2, t.shape[2])
        return block[:, 0]

    def norm(self) -> float:
        val = inner_product(self, self)
        return float(np.sqrt(max(val.real, 0.0)))


def _check_bits(bits, n: int) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.int64)
    if arr.shape != (n,):
        raise ValueError(f"expected {n} bits, got shape {arr.shape}")
    if np.any((arr < 0) | (arr > 1)):
        raise ValueError("bits must be 0 or 1")
    return arr


def inner_product(a: MPS, b: MPS) -> complex:
    """<a|b> = sum over entries of conj(a) * b, via transfer contractions."""
    if a.n_sites != b.n_sites:
        raise ValueError(f"site count mismatch: {a.n_sites} vs {b.n_sites}")
    env = np.ones((1, 1), dtype=np.complex128)  # (bond of conj(a), bond of b)
    for ta, tb in zip(a.tensors, b.tensors):
        # (la', l) x conj (p, la', ra') -> (l, p, ra'), then close with (p, l, r)
        half = np.tensordot(env, ta.data.conj(), axes=[(0,), (1,)])
        env = np.tensordot(half, tb.data, axes=[(0, 1), (1, 0)])
    return complex(env[0, 0])


def inner_product_taped(a: MPS, b: MPS) -> DenseTensor:
    """Same contraction phrased in recorded primitives, for gradient flow."""
    if a.n_sites != b.n_sites:
        raise ValueError(f"site count mismatch: {a.n_sites} vs {b.n_sites}")
    env = DenseTensor(np.ones((1, 1)))
    for ta, tb in zip(a.tensors, b.tensors):
        half = tensor.contract(env, tensor.conj(ta), [(0, 1)])   # (l, p, ra')
        env = tensor.contract(half, tb, [(0, 1), (1, 0)])        # (ra', r)
    return tensor.reshape(env, ())


def canonicalize_left(mps: MPS) -> MPS:
    """Left-canonical gauge: every site satisfies sum_p A_p^dag A_p = 1.

    The accumulated bond matrix is pushed to the right end, so the state
    itself is unchanged (up to float roundoff).
    """
    out = []
    carry = np.eye(1, dtype=np.complex128)
    for k, t in enumerate(mps.tensors):
        block = np.tensordot(carry, t.data, axes=[(1,), (1,)])  # (l, p, r)
        p, l, r = 2, block.shape[0], block.shape[2]
        mat = block.transpose(1, 0, 2).reshape(p * l, r)
        q, carry = np.linalg.qr(mat)
        out.append(DenseTensor(q.reshape(p, l, q.shape[1])))
    # absorb the leftover 1x1 scale into the last site
    out[-1] = DenseTensor(out[-1].data * carry[0, 0])
    return MPS(out)


def schmidt_values(mps: MPS, cut: int) -> np.ndarray:
    """Schmidt coefficients across the bond after site ``cut-1``.

    ``cut`` counts sites in the left block, 1 <= cut <= N-1.  For a state of
    norm w the squared coefficients sum to w^2.
    """
    n = mps.n_sites
    if not 1 <= cut <= n - 1:
        raise ValueError(f"cut must be in [1, {n - 1}], got {cut}")
    carry_l = np.eye(1, dtype=np.complex128)
    for t in mps.tensors[:cut]:
        block = np.tensordot(carry_l, t.data, axes=[(1,), (1,)])
        mat = block.transpose(1, 0, 2).reshape(-1, block.shape[2])
        _, carry_l = np.linalg.qr(mat)
    carry_r = np.eye(1, dtype=np.complex128)
    for t in mps.tensors[:cut - 1:-1]:
        block = np.tensordot(t.data, carry_r, axes=[(2,), (0,)])  # (p, l, r)
        mat = block.transpose(1, 0, 2).reshape(block.shape[1], -1)
        q, rr = np.linalg.qr(mat.conj().T)
        carry_r = rr.conj().T
    vals = np.linalg.svd(carry_l @ carry_r, compute_uv=False)
    return vals


def entanglement_entropy_bits(mps: MPS, cut: int) -> float:
    """Bipartite von Neumann entropy in bits from squared Schmidt values."""
    sv = schmidt_values(mps, cut)
    p = sv * sv
    total = p.sum()
    if total <= 0:
        return 0.0
    p = p / total
    p = p[p > 1e-16]
    return float(-(p * np.log2(p)).sum())


class SpectrumMPS(MPS):
    """MPS encoding of the 2^N candidate eigenvalues, max bond dim chi_a."""

    def __init__(self, tensors, chi_a: int | None = None):
        super().__init__(tensors)
        bonds = self.bond_dims()
        inferred = max(bonds) if bonds else 1
        self.chi_a = int(chi_a) if chi_a is not None else inferred
        if self.chi_a < 1:
            raise ValueError(f"chi_a must be >= 1, got {self.chi_a}")
        if inferred > self.chi_a:
            raise ValueError(f"bond dims {bonds} exceed chi_a={self.chi_a}")

    @classmethod
    def init_random(cls, n_sites: int, chi_a: int, scale: float | None = None,
                    seed: int = 0, requires_grad: bool = True) -> "SpectrumMPS":
        """Small random real entries; default scale 0.1/sqrt(chi_a)."""
        if n_sites < 1:
            raise ValueError(f"n_sites must be >= 1, got {n_sites}")
        if chi_a < 1:
            raise ValueError(f"chi_a must be >= 1, got {chi_a}")
        if scale is None:
            scale = 0.1 / np.sqrt(chi_a)
        rng = np.random.default_rng(seed)
        dims = _capped_bond_dims(n_sites, chi_a)
        tensors = [
            DenseTensor(scale * rng.standard_normal((2, dims[k], dims[k + 1])),
                        requires_grad=requires_grad)
            for k in range(n_sites)
        ]
        return cls(tensors, chi_a=chi_a)

    @classmethod
    def fit_from_dense(cls, values, chi_a: int,
                       requires_grad: bool = False) -> tuple["SpectrumMPS", float]:
        """Compress a dense spectrum by sweeping truncated SVDs left to right.

        Returns the MPS and the relative L2 reconstruction error, measured
        against the input after an exact re-enumeration.
        """
        values = np.asarray(values, dtype=np.float64)
        size = values.shape[0]
        n = int(np.log2(size))
        if 2**n != size:
            raise ValueError(f"spectrum length {size} is not a power of two")
        if chi_a < 1:
            raise ValueError(f"chi_a must be >= 1, got {chi_a}")
        tensors = []
        block = values.reshape(1, size)  # (bond, rest)
        for k in range(n - 1):
            mat = block.reshape(block.shape[0] * 2, -1)
            u, s, vh = np.linalg.svd(mat, full_matrices=False)
            r = min(chi_a, int(np.count_nonzero(s > s[0] * 1e-15)) or 1)
            tensors.append(u[:, :r].reshape(block.shape[0], 2, r).transpose(1, 0, 2))
            block = s[:r, None] * vh[:r]
        tensors.append(block.reshape(block.shape[0], 2, 1).transpose(1, 0, 2))
        mps = cls([DenseTensor(t, requires_grad=requires_grad) for t in tensors],
                  chi_a=chi_a)
        norm = np.linalg.norm(values)
        if norm == 0.0:
            return mps, 0.0
        err = np.linalg.norm(mps.enumerate_dense().real - values) / norm
        return mps, float(err)

    def evaluate_entry(self, bits) -> float:
        return self.evaluate(bits).real

    def enumerate_entries(self) -> np.ndarray:
        return self.enumerate_dense().real

    def sample_entries(self, n_samples: int, seed: int = 0,
                       chunk: int = 65536) -> tuple[np.ndarray, np.ndarray]:
        """Uniform random bitstrings with their entries, batched per site.

        Returns (bits, values) with bits of shape (n_samples, N).  Sampling
        is with replacement; entries repeat for colliding bitstrings.
        """
        if n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {n_samples}")
        rng = np.random.default_rng(seed)
        n = self.n_sites
        bits_out = np.empty((n_samples, n), dtype=np.uint8)
        vals_out = np.empty(n_samples, dtype=np.float64)
        for start in range(0, n_samples, chunk):
            stop = min(start + chunk, n_samples)
            bits = rng.integers(0, 2, size=(stop - start, n), dtype=np.uint8)
            vec = np.ones((stop - start, 1), dtype=np.complex128)
            for k, t in enumerate(self.tensors):
                site = t.data[bits[:, k]]                     # (m, l, r)
                vec = np.einsum("ml,mlr->mr", vec, site)
            bits_out[start:stop] = bits
            vals_out[start:stop] = vec[:, 0].real
        return bits_out, vals_out


def _capped_bond_dims(n: int, chi: int) -> list[int]:
    # bond k sits after site k-1; exact rank can never exceed 2^min(k, n-k)
    dims = [1]
    for k in range(1, n):
        dims.append(int(min(chi, 2**min(k, n - k))))
    dims.append(1)
    return dims


def spectrum_inner(a: SpectrumMPS, b: SpectrumMPS):
    """sum_alpha conj(a_alpha) b_alpha on the gradient tape."""
    return inner_product_taped(a, b)
