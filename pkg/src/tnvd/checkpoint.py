"""Versioned checkpoint container for training state.

A checkpoint is one .npz archive: numbered arrays for the spectrum MPS
tensors, circuit latents, optimizer moments and best-so-far parameters,
plus a JSON metadata blob (format version, model fields, ansatz shape,
schedule state, RNG state).  Loading validates the format version and
reports any structural damage as CheckpointError instead of partial state.
"""

from __future__ import annotations

import json
import zipfile
from dataclasses import dataclass, field

import numpy as np

FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    """Raised for unreadable, incomplete, or version-mismatched checkpoints."""


@dataclass
class TrainingCheckpoint:
    step: int
    model: dict                      # IsingSpec fields
    n_layers: int
    chi_a: int
    mps_tensors: list[np.ndarray]
    latents: list[np.ndarray]
    moments_m: list[np.ndarray]      # first-moment estimates, parameter order
    moments_v: list[np.ndarray]      # second-moment estimates (real)
    best_mps: list[np.ndarray]
    best_latents: list[np.ndarray]
    schedule: dict                   # lr, adam_t, stall, best_F, best_step, retries
    rng_state: dict | None = None
    extra: dict = field(default_factory=dict)


def _array_group(name, arrays):
    return {f"{name}/{i}": np.ascontiguousarray(a) for i, a in enumerate(arrays)}


def _read_group(data, name, count):
    out = []
    for i in range(count):
        key = f"{name}/{i}"
        if key not in data:
            raise CheckpointError(f"checkpoint missing array {key}")
        out.append(data[key])
    return out


def save_checkpoint(path, ckpt: TrainingCheckpoint) -> None:
    meta = {
        "format_version": FORMAT_VERSION,
        "step": int(ckpt.step),
        "model": ckpt.model,
        "n_layers": int(ckpt.n_layers),
        "chi_a": int(ckpt.chi_a),
        "counts": {
            "mps": len(ckpt.mps_tensors),
            "latents": len(ckpt.latents),
            "moments": len(ckpt.moments_m),
        },
        "schedule": ckpt.schedule,
        "rng_state": ckpt.rng_state,
        "extra": ckpt.extra,
    }
    arrays = {}
    arrays.update(_array_group("mps", ckpt.mps_tensors))
    arrays.update(_array_group("latent", ckpt.latents))
    arrays.update(_array_group("moment_m", ckpt.moments_m))
    arrays.update(_array_group("moment_v", ckpt.moments_v))
    arrays.update(_array_group("best_mps", ckpt.best_mps))
    arrays.update(_array_group("best_latent", ckpt.best_latents))
    arrays["meta"] = np.array(json.dumps(meta))
    np.savez(path, **arrays)


def load_checkpoint(path) -> TrainingCheckpoint:
    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    with data:
        if "meta" not in data:
            raise CheckpointError(f"checkpoint {path} has no metadata entry")
        try:
            meta = json.loads(str(data["meta"]))
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"corrupt metadata in {path}: {exc}") from exc
        version = meta.get("format_version")
        if version != FORMAT_VERSION:
            raise CheckpointError(
                f"checkpoint format version {version} != supported {FORMAT_VERSION}")
        counts = meta.get("counts", {})
        try:
            n_mps = int(counts["mps"])
            n_lat = int(counts["latents"])
            n_mom = int(counts["moments"])
        except (KeyError, TypeError) as exc:
            raise CheckpointError(f"corrupt counts block in {path}") from exc
        return TrainingCheckpoint(
            step=int(meta["step"]),
            model=dict(meta["model"]),
            n_layers=int(meta["n_layers"]),
            chi_a=int(meta["chi_a"]),
            mps_tensors=_read_group(data, "mps", n_mps),
            latents=_read_group(data, "latent", n_lat),
            moments_m=_read_group(data, "moment_m", n_mom),
            moments_v=_read_group(data, "moment_v", n_mom),
            best_mps=_read_group(data, "best_mps", n_mps),
            best_latents=_read_group(data, "best_latent", n_lat),
            schedule=dict(meta["schedule"]),
            rng_state=meta.get("rng_state"),
            extra=dict(meta.get("extra", {})),
        )
