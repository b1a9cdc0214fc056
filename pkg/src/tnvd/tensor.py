"""Dense complex tensors with a reverse-mode gradient tape.

Everything downstream (MPO evolution, overlaps, the loss) is phrased in a
small set of primitives recorded here: contract, permute, reshape, add,
scale, conj, real_part, diag, a truncated SVD, a bond split and a polar
projection.  Recording happens only while a :class:`GradTape` is active and
at least one operand requires gradients.

Gradient convention for complex leaves: for a real scalar output L and a
leaf z = x + iy, ``backward`` returns g = dL/dx + i*dL/dy.  For holomorphic
chains this equals conj(dL/dz), and the update z -> z - lr*g descends L.
For leaves holding real data the descent direction is g.real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Lorentzian broadening of singular-value gaps in the SVD adjoint.  Keeps
# the backward pass finite through (near-)degenerate spectra at the price
# of a biased gradient near the degeneracy; bond_split and polar avoid the
# gap denominators entirely and should be preferred when they apply.
EPS_GAP = 1e-12

_open_tapes: list["GradTape"] = []


class ContractionError(ValueError):
    """Raised when contraction axes disagree in length or range."""


class TapeError(RuntimeError):
    """Raised on invalid tape operations (bad seed, foreign tensor)."""


class DenseTensor:
    """Immutable dense complex128 tensor.

    Arbitrary nested sequences / numpy arrays are accepted and copied; the
    underlying buffer is frozen so recorded values can never drift under a
    later backward pass.
    """

    __slots__ = ("data", "requires_grad", "_ref")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.array(data, dtype=np.complex128, order="C", copy=True)
        arr.flags.writeable = False
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self._ref = None  # (tape, node index, output slot) when recorded

    @classmethod
    def _wrap(cls, arr: np.ndarray, requires_grad: bool) -> "DenseTensor":
        # internal fast path: takes ownership of a fresh array, no copy
        t = cls.__new__(cls)
        arr = np.asarray(arr, order="C", dtype=np.complex128)
        arr.flags.writeable = False
        t.data = arr
        t.requires_grad = requires_grad
        t._ref = None
        return t

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> complex:
        if self.data.size != 1:
            raise ValueError(f"item() on tensor of shape {self.shape}")
        return complex(self.data.reshape(()))

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"DenseTensor(shape={self.shape}{flag})"


@dataclass(frozen=True)
class SvdSplit:
    """Result of splitting a tensor across a bond by truncated SVD.

    ``left`` carries the chosen axes plus a new trailing bond index,
    ``right`` the new leading bond plus the remaining axes.  ``singulars``
    holds the kept singular values (real data in a complex container so it
    can be absorbed back into the network on the tape).
    """

    left: DenseTensor
    singulars: DenseTensor
    right: DenseTensor
    discarded_weight: float
    degenerate: bool = False

    @property
    def spectrum(self) -> np.ndarray:
        return np.ascontiguousarray(self.singulars.data.real)


@dataclass(frozen=True)
class BondSplit:
    """Result of bond_split: t ~ left @ right, singular values absorbed right.

    Axis conventions are those of :class:`SvdSplit`.  ``singulars`` is kept
    for diagnostics only and carries no gradient.
    """

    left: DenseTensor
    right: DenseTensor
    singulars: DenseTensor
    discarded_weight: float
    degenerate: bool = False

    @property
    def spectrum(self) -> np.ndarray:
        return np.ascontiguousarray(self.singulars.data.real)


class _Node:
    __slots__ = ("op", "inputs", "payload", "outputs")

    def __init__(self, op, inputs, payload, outputs):
        self.op = op              # str
        self.inputs = inputs      # tuple of (node index, slot)
        self.payload = payload    # op-specific constants
        self.outputs = outputs    # tuple of ndarray


class GradTape:
    """Records tensor operations for reverse-mode differentiation.

    Use as a context manager; every primitive executed inside with at least
    one grad-requiring operand appends a node.  ``backward(seed)`` walks the
    recording once and returns cotangents for every grad-requiring leaf.
    """

    def __init__(self):
        self._nodes: list[_Node] = []
        self._leaves: dict[int, int] = {}       # id(tensor) -> node index
        self._leaf_tensors: dict[int, DenseTensor] = {}
        self._closed = False

    # -- context management -------------------------------------------------
    def __enter__(self) -> "GradTape":
        _open_tapes.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        _open_tapes.remove(self)
        self._closed = True
        return False

    # -- recording -----------------------------------------------------------
    def _source(self, t: DenseTensor) -> tuple:
        """Node reference for an operand, registering leaves on first use."""
        if t._ref is not None and t._ref[0] is self:
            return t._ref[1], t._ref[2]
        idx = self._leaves.get(id(t))
        if idx is None:
            idx = len(self._nodes)
            self._nodes.append(_Node("leaf", (), None, (t.data,)))
            self._leaves[id(t)] = idx
            self._leaf_tensors[id(t)] = t
        return idx, 0

    def _record(self, op, operands, payload, outputs, grad_flags):
        inputs = tuple(self._source(t) for t in operands)
        node_idx = len(self._nodes)
        self._nodes.append(_Node(op, inputs, payload, tuple(outputs)))
        wrapped = []
        for slot, (arr, rg) in enumerate(zip(outputs, grad_flags)):
            t = DenseTensor._wrap(arr, rg)
            t._ref = (self, node_idx, slot)
            wrapped.append(t)
        return wrapped

    def replay(self) -> bool:
        """Re-execute every node from recorded leaf values.

        Returns True when all outputs are reproduced bitwise; a mismatch
        raises TapeError.  Mainly a determinism check.
        """
        values: dict[tuple, np.ndarray] = {}
        for idx, node in enumerate(self._nodes):
            if node.op == "leaf":
                values[(idx, 0)] = node.outputs[0]
                continue
            args = [values[src] for src in node.inputs]
            fresh = _FORWARD[node.op](args, node.payload)
            for slot, arr in enumerate(fresh):
                if not np.array_equal(arr, node.outputs[slot]):
                    raise TapeError(f"replay mismatch at node {idx} ({node.op})")
                values[(idx, slot)] = arr
        return True

    # -- reverse pass ----------------------------------------------------------
    def backward(self, seed: DenseTensor) -> dict[DenseTensor, DenseTensor]:
        """Cotangents of a real scalar ``seed`` w.r.t. every grad leaf.

        The seed must be a scalar recorded on this tape with (numerically)
        vanishing imaginary part; wrap objectives in ``real_part`` first.
        """
        if seed._ref is None or seed._ref[0] is not self:
            raise TapeError("seed was not recorded on this tape")
        if seed.data.shape != ():
            raise TapeError(f"seed must be scalar, got shape {seed.data.shape}")
        val = complex(seed.data)
        if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
            raise TapeError(f"seed has non-negligible imaginary part {val.imag:g}")

        cot: dict[tuple, np.ndarray] = {(seed._ref[1], seed._ref[2]): np.ones((), dtype=np.complex128)}
        for idx in range(seed._ref[1], -1, -1):
            node = self._nodes[idx]
            if node.op == "leaf":
                continue
            gs = [cot.pop((idx, slot), None) for slot in range(len(node.outputs))]
            if all(g is None for g in gs):
                continue
            contribs = _BACKWARD[node.op](gs, node, self._nodes)
            for src, contrib in zip(node.inputs, contribs):
                if contrib is None:
                    continue
                prev = cot.get(src)
                cot[src] = contrib if prev is None else prev + contrib

        grads: dict[DenseTensor, DenseTensor] = {}
        for tid, idx in self._leaves.items():
            leaf = self._leaf_tensors[tid]
            if not leaf.requires_grad:
                continue
            g = cot.get((idx, 0))
            if g is None:
                g = np.zeros(leaf.shape, dtype=np.complex128)
            grads[leaf] = DenseTensor._wrap(np.asarray(g, dtype=np.complex128), False)
        return grads


def backward(tape: GradTape, seed: DenseTensor) -> dict[DenseTensor, DenseTensor]:
    return tape.backward(seed)


def _active_tape(*operands) -> GradTape | None:
    if _open_tapes and any(t.requires_grad for t in operands):
        return _open_tapes[-1]
    return None


# ---------------------------------------------------------------------------
# forward kernels (shared by execution and replay)
# ---------------------------------------------------------------------------

def _fw_contract(args, payload):
    a, b = args
    ax_a, ax_b = payload["ax_a"], payload["ax_b"]
    return (np.tensordot(a, b, axes=(ax_a, ax_b)),)


def _fw_permute(args, payload):
    return (np.asarray(np.transpose(args[0], payload), order="C"),)


def _fw_reshape(args, payload):
    return (np.asarray(args[0].reshape(payload["out"]), order="C"),)


def _fw_add(args, payload):
    return (args[0] + args[1],)


def _fw_scale(args, payload):
    return (args[0] * payload,)


def _fw_conj(args, payload):
    return (np.conj(args[0]),)


def _fw_real(args, payload):
    return (args[0].real.astype(np.complex128),)


def _fw_diag(args, payload):
    (v,) = args
    return (np.diag(v).astype(np.complex128),)


def _fw_svd(args, payload):
    (a,) = args
    max_dim, cutoff = payload["max_dim"], payload["cutoff"]
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    total = float(np.sum(s * s))
    if total == 0.0:
        r = 0
    else:
        keep = s > cutoff * s[0]
        r = int(np.count_nonzero(keep))
        if max_dim is not None:
            r = min(r, int(max_dim))
        r = max(r, 1)
    kept = float(np.sum(s[:r] * s[:r]))
    dw = 0.0 if total == 0.0 else max(0.0, (total - kept) / total)
    return (
        np.ascontiguousarray(u[:, :r]),
        s[:r].astype(np.complex128),
        np.ascontiguousarray(vh[:r]),
        np.array(dw),
    )


def _fw_bond(args, payload):
    u, s, vh, dw = _fw_svd(args, payload)
    payload["u"], payload["s"], payload["vh"] = u, s.real, vh
    return (u, s.real[:, None] * vh, s, dw)


def _fw_polar(args, payload):
    (a,) = args
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    payload["u"], payload["s"], payload["vh"] = u, s, vh
    return (np.ascontiguousarray(u @ vh),)


_FORWARD = {
    "contract": _fw_contract,
    "permute": _fw_permute,
    "reshape": _fw_reshape,
    "add": _fw_add,
    "scale": _fw_scale,
    "conj": _fw_conj,
    "real": _fw_real,
    "diag": _fw_diag,
    "svd": _fw_svd,
    "bond": _fw_bond,
    "polar": _fw_polar,
}


# ---------------------------------------------------------------------------
# public primitives
# ---------------------------------------------------------------------------

def _normalize_axes(a, b, axes):
    pairs = [(int(ia) % a.ndim if -a.ndim <= int(ia) < a.ndim else int(ia),
              int(ib) % b.ndim if -b.ndim <= int(ib) < b.ndim else int(ib))
             for ia, ib in axes]
    ax_a = [p[0] for p in pairs]
    ax_b = [p[1] for p in pairs]
    if len(set(ax_a)) != len(ax_a) or len(set(ax_b)) != len(ax_b):
        raise ContractionError(f"repeated contraction axis in {axes}")
    for ia, ib in pairs:
        if not (0 <= ia < a.ndim) or not (0 <= ib < b.ndim):
            raise ContractionError(f"axis pair ({ia},{ib}) out of range for shapes {a.shape}, {b.shape}")
        if a.shape[ia] != b.shape[ib]:
            raise ContractionError(
                f"dimension mismatch on pair ({ia},{ib}): {a.shape[ia]} vs {b.shape[ib]}")
    return ax_a, ax_b


def contract(a: DenseTensor, b: DenseTensor, axes) -> DenseTensor:
    """Pairwise tensor contraction over the given (axis_a, axis_b) pairs.

    An empty axes list is an outer product.  Axis lengths must match
    pairwise; violations raise ContractionError.
    """
    ax_a, ax_b = _normalize_axes(a.data, b.data, axes)
    payload = {"ax_a": ax_a, "ax_b": ax_b}
    out = _fw_contract((a.data, b.data), payload)
    tape = _active_tape(a, b)
    rg = a.requires_grad or b.requires_grad
    if tape is None:
        return DenseTensor._wrap(out[0], rg)
    payload["a"] = a.data
    payload["b"] = b.data
    return tape._record("contract", (a, b), payload, out, (rg,))[0]


def permute(a: DenseTensor, order) -> DenseTensor:
    order = tuple(int(i) for i in order)
    if sorted(order) != list(range(a.ndim)):
        raise ValueError(f"{order} is not a permutation of {a.ndim} axes")
    out = _fw_permute((a.data,), order)
    tape = _active_tape(a)
    if tape is None:
        return DenseTensor._wrap(out[0], a.requires_grad)
    return tape._record("permute", (a,), order, out, (a.requires_grad,))[0]


def reshape(a: DenseTensor, shape) -> DenseTensor:
    shape = tuple(int(s) for s in shape)
    payload = {"in": a.data.shape, "out": shape}
    out = _fw_reshape((a.data,), payload)
    tape = _active_tape(a)
    if tape is None:
        return DenseTensor._wrap(out[0], a.requires_grad)
    return tape._record("reshape", (a,), payload, out, (a.requires_grad,))[0]


def add(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    if a.shape != b.shape:
        raise ValueError(f"add shape mismatch: {a.shape} vs {b.shape}")
    out = _fw_add((a.data, b.data), None)
    tape = _active_tape(a, b)
    rg = a.requires_grad or b.requires_grad
    if tape is None:
        return DenseTensor._wrap(out[0], rg)
    return tape._record("add", (a, b), None, out, (rg,))[0]


def scale(a: DenseTensor, c) -> DenseTensor:
    c = complex(c)
    out = _fw_scale((a.data,), c)
    tape = _active_tape(a)
    if tape is None:
        return DenseTensor._wrap(out[0], a.requires_grad)
    return tape._record("scale", (a,), c, out, (a.requires_grad,))[0]


def conj(a: DenseTensor) -> DenseTensor:
    out = _fw_conj((a.data,), None)
    tape = _active_tape(a)
    if tape is None:
        return DenseTensor._wrap(out[0], a.requires_grad)
    return tape._record("conj", (a,), None, out, (a.requires_grad,))[0]


def real_part(a: DenseTensor) -> DenseTensor:
    out = _fw_real((a.data,), None)
    tape = _active_tape(a)
    if tape is None:
        return DenseTensor._wrap(out[0], a.requires_grad)
    return tape._record("real", (a,), None, out, (a.requires_grad,))[0]


def diag(v: DenseTensor) -> DenseTensor:
    """Embed a vector on the diagonal of a square matrix."""
    if v.ndim != 1:
        raise ValueError(f"diag expects a vector, got shape {v.shape}")
    out = _fw_diag((v.data,), None)
    tape = _active_tape(v)
    if tape is None:
        return DenseTensor._wrap(out[0], v.requires_grad)
    return tape._record("diag", (v,), None, out, (v.requires_grad,))[0]


def svd(a: DenseTensor, max_dim: int | None = None, cutoff: float = 0.0):
    """Truncated SVD of a matrix: returns (U, S, Vh, discarded_weight).

    Truncation keeps at most ``max_dim`` singular values and drops those
    below ``cutoff`` relative to the largest.  ``discarded_weight`` is the
    dropped fraction of sum(s^2).  An all-zero matrix yields rank-0 factors
    and is flagged degenerate by svd_split.
    """
    if a.ndim != 2:
        raise ValueError(f"svd expects a matrix, got shape {a.shape}")
    if max_dim is not None and max_dim < 1:
        raise ValueError(f"max_dim must be >= 1, got {max_dim}")
    payload = {"max_dim": max_dim, "cutoff": float(cutoff), "m": a.shape[0], "n": a.shape[1]}
    out = _fw_svd((a.data,), payload)
    tape = _active_tape(a)
    rg = a.requires_grad
    if tape is None:
        u = DenseTensor._wrap(out[0], rg)
        s = DenseTensor._wrap(out[1], rg)
        vh = DenseTensor._wrap(out[2], rg)
        return u, s, vh, float(out[3])
    payload["u"] = out[0]
    payload["s"] = out[1].real
    payload["vh"] = out[2]
    u, s, vh, dw = tape._record("svd", (a,), payload, out, (rg, rg, rg, False))
    return u, s, vh, float(dw.item().real)


def _partition_axes(t: DenseTensor, left_axes):
    left_axes = [int(i) % t.ndim for i in left_axes]
    if len(set(left_axes)) != len(left_axes):
        raise ValueError(f"repeated axis in left_axes {left_axes}")
    right_axes = [i for i in range(t.ndim) if i not in left_axes]
    if not left_axes or not right_axes:
        raise ValueError("split needs at least one axis on each side")
    return left_axes, right_axes


def svd_split(t: DenseTensor, left_axes, max_dim: int | None = None,
              cutoff: float = 0.0) -> SvdSplit:
    """Split a tensor across a bond: t ~ left @ diag(singulars) @ right.

    ``left_axes`` selects which tensor legs go to the left factor; the rest
    go right, both keeping their original relative order.  The new bond is
    appended as the last axis of ``left`` and the first axis of ``right``.
    """
    left_axes, right_axes = _partition_axes(t, left_axes)
    ldims = [t.shape[i] for i in left_axes]
    rdims = [t.shape[i] for i in right_axes]
    mat = reshape(permute(t, left_axes + right_axes),
                  (int(np.prod(ldims)), int(np.prod(rdims))))
    u, s, vh, dw = svd(mat, max_dim=max_dim, cutoff=cutoff)
    r = u.shape[1]
    left = reshape(u, tuple(ldims) + (r,))
    right = reshape(vh, (r,) + tuple(rdims))
    return SvdSplit(left, s, right, dw, degenerate=(r == 0))


def bond_split(t: DenseTensor, left_axes, max_dim: int | None = None,
               cutoff: float = 0.0) -> BondSplit:
    """Split a tensor across a bond with singular values absorbed right.

    Axis conventions match svd_split, but the factors come back ready to use
    as network sites: t ~ left @ right.  The backward pass treats the pair
    as the single operator they reconstruct, which is exact whenever the
    downstream computation rejoins the factors through the bond (any
    insertion of G, G^-1 on the bond leaves it unchanged).  Unlike the svd
    adjoint it has no singular-gap denominators, so it stays unbiased on
    degenerate spectra.  Use svd / svd_split when the factors feed the loss
    individually.
    """
    left_axes, right_axes = _partition_axes(t, left_axes)
    ldims = [t.shape[i] for i in left_axes]
    rdims = [t.shape[i] for i in right_axes]
    mat = reshape(permute(t, left_axes + right_axes),
                  (int(np.prod(ldims)), int(np.prod(rdims))))
    if max_dim is not None and max_dim < 1:
        raise ValueError(f"max_dim must be >= 1, got {max_dim}")
    payload = {"max_dim": max_dim, "cutoff": float(cutoff),
               "m": mat.shape[0], "n": mat.shape[1]}
    out = _fw_bond((mat.data,), payload)
    tape = _active_tape(mat)
    rg = mat.requires_grad
    if tape is None:
        lmat = DenseTensor._wrap(out[0], rg)
        rmat = DenseTensor._wrap(out[1], rg)
        s = DenseTensor._wrap(out[2], False)
        dw = float(out[3])
    else:
        lmat, rmat, s, dw_t = tape._record("bond", (mat,), payload, out,
                                           (rg, rg, False, False))
        dw = float(dw_t.item().real)
    r = lmat.shape[1]
    left = reshape(lmat, tuple(ldims) + (r,))
    right = reshape(rmat, (r,) + tuple(rdims))
    return BondSplit(left, right, s, dw, degenerate=(r == 0))


def polar(a: DenseTensor) -> DenseTensor:
    """Unitary polar factor U Vh, the closest unitary in Frobenius norm.

    The backward pass uses the closed-form polar adjoint, finite and exact
    for any nonsingular input including degenerate singular values (the
    plain svd adjoint is biased there).  Exactly singular inputs have no
    unique projection; regularize before calling.
    """
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"polar expects a square matrix, got shape {a.shape}")
    payload = {}
    out = _fw_polar((a.data,), payload)
    tape = _active_tape(a)
    if tape is None:
        return DenseTensor._wrap(out[0], a.requires_grad)
    return tape._record("polar", (a,), payload, out, (a.requires_grad,))[0]


# ---------------------------------------------------------------------------
# backward kernels
# ---------------------------------------------------------------------------

def _bw_contract(gs, node, nodes):
    g = gs[0]
    p = node.payload
    a, b = p["a"], p["b"]
    ax_a, ax_b = p["ax_a"], p["ax_b"]
    free_a = [i for i in range(a.ndim) if i not in ax_a]
    free_b = [i for i in range(b.ndim) if i not in ax_b]

    # w = tensordot(a, b) is bilinear, so g_a = tensordot(g, conj(b)) over
    # b's free legs; the surviving b legs (ascending order) then have to be
    # routed back to the a axes they were paired with.
    raw_a = np.tensordot(g, np.conj(b), axes=(list(range(len(free_a), g.ndim)), free_b))
    rank_b = {j: rank for rank, j in enumerate(sorted(range(len(ax_b)), key=lambda j: ax_b[j]))}
    place_a = [0] * a.ndim  # place_a[a-axis] = source axis in raw_a
    for pos, i in enumerate(free_a):
        place_a[i] = pos
    for j, ia in enumerate(ax_a):
        place_a[ia] = len(free_a) + rank_b[j]
    g_a = np.ascontiguousarray(np.transpose(raw_a, place_a)) if a.ndim else raw_a

    raw_b = np.tensordot(np.conj(a), g, axes=(free_a, list(range(len(free_a)))))
    rank_a = {j: rank for rank, j in enumerate(sorted(range(len(ax_a)), key=lambda j: ax_a[j]))}
    place_b = [0] * b.ndim
    for j, ib in enumerate(ax_b):
        place_b[ib] = rank_a[j]
    for pos, i in enumerate(free_b):
        place_b[i] = len(ax_a) + pos
    g_b = np.ascontiguousarray(np.transpose(raw_b, place_b)) if b.ndim else raw_b
    return (g_a, g_b)


def _invert(perm):
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return inv


def _bw_permute(gs, node, nodes):
    return (np.transpose(gs[0], _invert(node.payload)),)


def _bw_reshape(gs, node, nodes):
    return (gs[0].reshape(node.payload["in"]),)


def _bw_add(gs, node, nodes):
    return (gs[0], gs[0])


def _bw_scale(gs, node, nodes):
    return (gs[0] * np.conj(node.payload),)


def _bw_conj(gs, node, nodes):
    return (np.conj(gs[0]),)


def _bw_real(gs, node, nodes):
    return (gs[0].real.astype(np.complex128),)


def _bw_diag(gs, node, nodes):
    return (np.ascontiguousarray(np.diagonal(gs[0])),)


def _bw_svd(gs, node, nodes):
    gu, gses, gvh, _ = gs
    p = node.payload
    u, s, vh = p["u"], p["s"], p["vh"]
    m, n = p["m"], p["n"]
    r = s.shape[0]
    if r == 0:
        return (np.zeros((m, n), dtype=np.complex128),)
    v = vh.conj().T
    gv = None if gvh is None else gvh.conj().T

    s2 = s * s
    gap = s2[None, :] - s2[:, None]
    f = gap / (gap * gap + EPS_GAP)
    np.fill_diagonal(f, 0.0)
    s_inv = s / (s2 + EPS_GAP * EPS_GAP)

    core = np.zeros((r, r), dtype=np.complex128)
    gu_proj = None
    if gu is not None:
        cu = u.conj().T @ gu
        core += (f * (cu - cu.conj().T)) * s[None, :]
        core += 1j * np.diag(cu.diagonal().imag * (0.5 * s_inv))
        gu_proj = gu - u @ cu
    if gv is not None:
        cv = v.conj().T @ gv
        core += s[:, None] * (f * (cv - cv.conj().T))
        core -= 1j * np.diag(cv.diagonal().imag * (0.5 * s_inv))
    if gses is not None:
        core += np.diag(gses.real)

    ga = u @ core @ vh
    if gu_proj is not None and m > r:
        ga += (gu_proj * s_inv[None, :]) @ vh
    if gv is not None and n > r:
        gv_proj = gv - v @ (vh @ gv)
        ga += u @ (s_inv[:, None] * gv_proj.conj().T)
    return (ga,)


def _bw_bond(gs, node, nodes):
    gl, gr, _, _ = gs
    p = node.payload
    u, s, vh = p["u"], p["s"], p["vh"]
    m, n = p["m"], p["n"]
    r = s.shape[0]
    if r == 0:
        return (np.zeros((m, n), dtype=np.complex128),)

    # With A ~ L R and the loss a function of the product only, the exact
    # adjoint is gA = Pu gP + (I - Pu) gP Pv, recovered from the factor
    # cotangents as gL = gP V S and gR = U^H gP.  No gap denominators, so
    # degenerate spectra are handled exactly (up to the discarded part).
    ga = np.zeros((m, n), dtype=np.complex128)
    if gr is not None:
        ga += u @ gr
    if gl is not None:
        proj = gl - u @ (u.conj().T @ gl)
        s_inv = s / (s * s + EPS_GAP * EPS_GAP)
        ga += (proj * s_inv[None, :]) @ vh
    return (ga,)


def _bw_polar(gs, node, nodes):
    g = gs[0]
    p = node.payload
    u, s, vh = p["u"], p["s"], p["vh"]
    # dQ = U [(B - B^H) / (s_i + s_j)] Vh with B = U^H dA V, so the adjoint
    # maps C = U^H gQ V the same way; finite for any nonsingular input.
    c = u.conj().T @ g @ vh.conj().T
    core = (c - c.conj().T) / (s[:, None] + s[None, :] + EPS_GAP)
    return (u @ core @ vh,)


_BACKWARD = {
    "contract": _bw_contract,
    "permute": _bw_permute,
    "reshape": _bw_reshape,
    "add": _bw_add,
    "scale": _bw_scale,
    "conj": _bw_conj,
    "real": _bw_real,
    "diag": _bw_diag,
    "svd": _bw_svd,
    "bond": _bw_bond,
    "polar": _bw_polar,
}
