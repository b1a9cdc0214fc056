"""Shared oracles: loop-based contraction, dense spin operators, finite differences."""

import itertools

import numpy as np

from tnvd import tensor


def loop_contract(a: np.ndarray, b: np.ndarray, axes) -> np.ndarray:
    """Brute-force tensordot by explicit index loops. Slow, obviously correct."""
    ax_a = [p[0] for p in axes]
    ax_b = [p[1] for p in axes]
    free_a = [i for i in range(a.ndim) if i not in ax_a]
    free_b = [i for i in range(b.ndim) if i not in ax_b]
    out_shape = [a.shape[i] for i in free_a] + [b.shape[i] for i in free_b]
    out = np.zeros(out_shape, dtype=np.complex128)
    sum_ranges = [range(a.shape[i]) for i in ax_a]
    for out_idx in itertools.product(*(range(d) for d in out_shape)):
        acc = 0.0 + 0.0j
        for ks in itertools.product(*sum_ranges):
            ia = [0] * a.ndim
            ib = [0] * b.ndim
            for pos, i in enumerate(free_a):
                ia[i] = out_idx[pos]
            for pos, i in enumerate(free_b):
                ib[i] = out_idx[len(free_a) + pos]
            for k, (pa, pb) in zip(ks, zip(ax_a, ax_b)):
                ia[pa] = k
                ib[pb] = k
            acc += a[tuple(ia)] * b[tuple(ib)]
        out[tuple(out_idx)] = acc
    return out


def numeric_gradient(f, arrays: dict, h: float = 1e-5) -> dict:
    """Central-difference gradients of a real scalar f(arrays).

    Returns, per entry, dL/dx + 1j*dL/dy so it is directly comparable with
    tape cotangents of complex leaves (take .real for real-valued leaves).
    """
    grads = {}
    for name, base in arrays.items():
        base = np.asarray(base, dtype=np.complex128)
        g = np.zeros(base.shape, dtype=np.complex128)
        flat = base.reshape(-1)
        for k in range(flat.size):
            for part, step in ((1.0, h), (1.0j, h)):
                plus = flat.copy()
                minus = flat.copy()
                plus[k] += part * step
                minus[k] -= part * step
                d = dict(arrays)
                d[name] = plus.reshape(base.shape)
                fp = f(d)
                d[name] = minus.reshape(base.shape)
                fm = f(d)
                comp = (fp - fm) / (2 * step)
                g.reshape(-1)[k] += comp if part == 1.0 else 1j * comp
        grads[name] = g
    return grads


def rel_err(approx, exact) -> float:
    approx = np.asarray(approx)
    exact = np.asarray(exact)
    scale = max(np.linalg.norm(exact), 1e-12)
    return float(np.linalg.norm(approx - exact) / scale)


# dense spin-1/2 operators, used for independent Hamiltonian builds
ID2 = np.eye(2, dtype=np.complex128)
SX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=np.complex128)
SZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=np.complex128)


def embed_site(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """kron-embed a one-site operator at `site` of an n-site chain (site 0 leftmost)."""
    out = np.eye(1, dtype=np.complex128)
    for k in range(n):
        out = np.kron(out, op if k == site else ID2)
    return out


def embed_pair(op1: np.ndarray, op2: np.ndarray, site: int, n: int) -> np.ndarray:
    out = np.eye(1, dtype=np.complex128)
    for k in range(n):
        if k == site:
            out = np.kron(out, op1)
        elif k == site + 1:
            out = np.kron(out, op2)
        else:
            out = np.kron(out, ID2)
    return out


def ising_dense_kron(n: int, h: float, w=None) -> np.ndarray:
    """Transverse-field Ising chain with longitudinal fields, by plain krons."""
    if w is None:
        w = np.zeros(n)
    dim = 2 ** n
    ham = np.zeros((dim, dim), dtype=np.complex128)
    for k in range(n - 1):
        ham -= embed_pair(SZ, SZ, k, n)
    for k in range(n):
        ham -= h * embed_site(SX, k, n)
        ham += w[k] * embed_site(SZ, k, n)
    return ham


def random_tensor(rng, shape, requires_grad=False, real=False):
    data = rng.standard_normal(shape)
    if not real:
        data = data + 1j * rng.standard_normal(shape)
    return tensor.DenseTensor(data, requires_grad=requires_grad)
