"""Gradient training loop for the spectrum MPS and brick-wall circuit.

The optimizer descends on the pre-log squared distance (its gradient stays
smooth as the fit tightens, where the log form blows up).  F is still the
logged and reported figure of merit.  Updates are joint over MPS entries and
gate latents by default; MPS tensors stay real, so their cotangents enter
through the real part.  Latents are updated as unconstrained complex matrices
and re-projected to unitaries on every forward pass.

Plain gradient descent is available but effectively freezes at the default
initialization: spectrum entries are products of N small site factors, so
per-entry MPS gradients start many orders below the latent ones.  The
adaptive-moment optimizer normalizes per parameter and is the default.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import tensor
from .checkpoint import TrainingCheckpoint, load_checkpoint, save_checkpoint
from .circuit import BrickwallCircuit, LatentGate, build_brickwall
from .evolution import TruncationPolicy
from .hamiltonian import IsingSpec, build_ising_mpo, trace_h_squared
from .mps import SpectrumMPS
from .objective import LossBreakdown, loss
from .tensor import DenseTensor, GradTape

ADAM_B1 = 0.9
ADAM_B2 = 0.999
ADAM_EPS = 1e-8
MAX_RETRIES = 5       # non-finite recoveries before aborting
CONVERGE_STREAK = 10  # consecutive sub-tol steps that count as converged


class TrainingDivergedError(RuntimeError):
    """Loss or gradients stayed non-finite through all retry attempts."""


@dataclass(frozen=True)
class TrainConfig:
    """Knobs for one training run.

    ``tol`` is a threshold on the relative per-step F change; once the
    change stays below it for CONVERGE_STREAK consecutive steps the run
    stops early.  Zero disables the check.  ``checkpoint_interval`` of zero
    writes only the final checkpoint.  ``validation_chi_t`` defaults to
    twice the training bond cap.
    """

    optimizer: str = "adam"          # "adam" | "gd"
    learning_rate: float = 1e-3
    max_steps: int = 1000
    tol: float = 0.0
    checkpoint_interval: int = 0
    chi_t: int = 16
    validation_chi_t: int | None = None
    seed: int = 0
    plateau_patience: int = 300      # steps without a new best before lr decay
    plateau_factor: float = 0.5
    alternating: bool = False        # update MPS and gates on alternating steps
    gate_noise: float = 0.01
    mps_scale: float | None = None
    truncation_cutoff: float = 1e-14

    def __post_init__(self):
        if self.optimizer not in ("adam", "gd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.tol < 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")
        if self.checkpoint_interval < 0:
            raise ValueError(
                f"checkpoint_interval must be >= 0, got {self.checkpoint_interval}")
        if self.chi_t < 1:
            raise ValueError(f"chi_t must be >= 1, got {self.chi_t}")
        if self.validation_chi_t is not None and self.validation_chi_t < 1:
            raise ValueError(
                f"validation_chi_t must be >= 1, got {self.validation_chi_t}")
        if self.plateau_patience < 1:
            raise ValueError(
                f"plateau_patience must be >= 1, got {self.plateau_patience}")
        if not 0.0 < self.plateau_factor <= 1.0:
            raise ValueError(
                f"plateau_factor must be in (0, 1], got {self.plateau_factor}")
        if self.gate_noise < 0:
            raise ValueError(f"gate_noise must be >= 0, got {self.gate_noise}")

    def resolved_validation_chi_t(self) -> int:
        return self.validation_chi_t if self.validation_chi_t is not None else 2 * self.chi_t


@dataclass
class TrainResult:
    spectrum: SpectrumMPS            # best-F parameters
    circuit: BrickwallCircuit
    log: list[LossBreakdown]         # entry i is step start_step + i
    start_step: int
    best_step: int
    best_F: float
    final_lr: float
    stop_reason: str                 # "max_steps" | "converged" | "saturated"
    validation: LossBreakdown | None = None
    checkpoint_paths: list[str] = field(default_factory=list)


class _TrainState:
    """Mutable parameter arrays plus optimizer and schedule state."""

    def __init__(self, mps_arrays, latent_arrays, lr):
        self.mps = list(mps_arrays)          # real float64
        self.latents = list(latent_arrays)   # complex128
        self.m = [np.zeros_like(a) for a in self.mps] + \
                 [np.zeros_like(a) for a in self.latents]
        self.v = [np.zeros(a.shape) for a in self.mps] + \
                 [np.zeros(a.shape) for a in self.latents]
        self.t = 0                           # adam bias-correction counter
        self.lr = float(lr)
        self.stall = 0
        self.streak = 0
        self.prev_F = None
        self.best_F = math.inf
        self.best_step = -1
        self.best_mps = [a.copy() for a in self.mps]
        self.best_latents = [a.copy() for a in self.latents]
        self.retries = 0
        self.saturations = 0
        self.rng = np.random.default_rng()

    def snapshot(self, step: int) -> dict:
        return {
            "step": step,
            "mps": [a.copy() for a in self.mps],
            "latents": [a.copy() for a in self.latents],
            "m": [a.copy() for a in self.m],
            "v": [a.copy() for a in self.v],
            "t": self.t, "lr": self.lr, "stall": self.stall,
            "streak": self.streak, "prev_F": self.prev_F,
            "best_F": self.best_F, "best_step": self.best_step,
            "best_mps": [a.copy() for a in self.best_mps],
            "best_latents": [a.copy() for a in self.best_latents],
            "saturations": self.saturations,
            "rng_state": self.rng.bit_generator.state,
        }

    def restore(self, snap: dict) -> int:
        self.mps = [a.copy() for a in snap["mps"]]
        self.latents = [a.copy() for a in snap["latents"]]
        self.m = [a.copy() for a in snap["m"]]
        self.v = [a.copy() for a in snap["v"]]
        self.t = snap["t"]
        self.lr = snap["lr"]
        self.stall = snap["stall"]
        self.streak = snap["streak"]
        self.prev_F = snap["prev_F"]
        self.best_F = snap["best_F"]
        self.best_step = snap["best_step"]
        self.best_mps = [a.copy() for a in snap["best_mps"]]
        self.best_latents = [a.copy() for a in snap["best_latents"]]
        self.saturations = snap["saturations"]
        self.rng.bit_generator.state = snap["rng_state"]
        return snap["step"]


def _build_models(state: _TrainState, n_sites, n_layers, chi_a, requires_grad=True):
    s = SpectrumMPS([DenseTensor(a, requires_grad=requires_grad) for a in state.mps],
                    chi_a=chi_a)
    gates = [LatentGate(DenseTensor(a, requires_grad=requires_grad))
             for a in state.latents]
    return s, BrickwallCircuit(n_sites, gates, n_layers)


def _apply_update(state: _TrainState, grads, cfg: TrainConfig, step: int):
    """One optimizer step in place.  ``grads`` is aligned with mps + latents."""
    n_mps = len(state.mps)
    if cfg.alternating:
        update = range(n_mps) if step % 2 == 0 else range(n_mps, len(grads))
    else:
        update = range(len(grads))
    if cfg.optimizer == "gd":
        for i in update:
            if i < n_mps:
                state.mps[i] = state.mps[i] - state.lr * grads[i].real
            else:
                state.latents[i - n_mps] = state.latents[i - n_mps] - state.lr * grads[i]
        return
    state.t += 1
    b1c = 1.0 - ADAM_B1 ** state.t
    b2c = 1.0 - ADAM_B2 ** state.t
    for i in update:
        g = grads[i].real if i < n_mps else grads[i]
        state.m[i] = ADAM_B1 * state.m[i] + (1.0 - ADAM_B1) * g
        state.v[i] = ADAM_B2 * state.v[i] + (1.0 - ADAM_B2) * np.abs(g) ** 2
        step_dir = (state.m[i] / b1c) / (np.sqrt(state.v[i] / b2c) + ADAM_EPS)
        if i < n_mps:
            state.mps[i] = state.mps[i] - state.lr * step_dir
        else:
            state.latents[i - n_mps] = state.latents[i - n_mps] - state.lr * step_dir


def _spec_to_dict(spec: IsingSpec) -> dict:
    return {"n_sites": spec.n_sites, "h": spec.h, "fields_w": list(spec.fields_w),
            "disorder_w": spec.disorder_w, "seed": spec.seed}


def _spec_from_dict(d: dict) -> IsingSpec:
    return IsingSpec(n_sites=int(d["n_sites"]), h=float(d["h"]),
                     fields_w=tuple(d["fields_w"]), disorder_w=float(d["disorder_w"]),
                     seed=int(d["seed"]))


def _state_to_checkpoint(state: _TrainState, step, spec, n_layers, chi_a,
                         extra=None) -> TrainingCheckpoint:
    return TrainingCheckpoint(
        step=step,
        model=_spec_to_dict(spec),
        n_layers=n_layers,
        chi_a=chi_a,
        mps_tensors=[a.copy() for a in state.mps],
        latents=[a.copy() for a in state.latents],
        moments_m=[a.copy() for a in state.m],
        moments_v=[a.copy() for a in state.v],
        best_mps=[a.copy() for a in state.best_mps],
        best_latents=[a.copy() for a in state.best_latents],
        schedule={
            "t": state.t, "lr": state.lr, "stall": state.stall,
            "streak": state.streak, "prev_F": state.prev_F,
            "best_F": state.best_F if math.isfinite(state.best_F) else None,
            "best_step": state.best_step, "retries": state.retries,
            "saturations": state.saturations,
        },
        rng_state=state.rng.bit_generator.state,
        extra=extra or {},
    )


def _state_from_checkpoint(ckpt: TrainingCheckpoint) -> _TrainState:
    sched = ckpt.schedule
    state = _TrainState(ckpt.mps_tensors, ckpt.latents, sched["lr"])
    state.m = [np.asarray(a) for a in ckpt.moments_m]
    state.v = [np.asarray(a) for a in ckpt.moments_v]
    state.t = int(sched["t"])
    state.stall = int(sched["stall"])
    state.streak = int(sched["streak"])
    state.prev_F = sched["prev_F"]
    best = sched["best_F"]
    state.best_F = math.inf if best is None else float(best)
    state.best_step = int(sched["best_step"])
    state.best_mps = [np.asarray(a) for a in ckpt.best_mps]
    state.best_latents = [np.asarray(a) for a in ckpt.best_latents]
    state.retries = int(sched["retries"])
    state.saturations = int(sched.get("saturations", 0))
    if ckpt.rng_state is not None:
        state.rng.bit_generator.state = ckpt.rng_state
    return state


def spec_from_checkpoint(ckpt: TrainingCheckpoint) -> IsingSpec:
    return _spec_from_dict(ckpt.model)


def models_from_checkpoint(ckpt: TrainingCheckpoint, best: bool = True):
    """Rebuild evaluation-mode (spectrum, circuit) from a saved checkpoint."""
    use_best = best and ckpt.schedule.get("best_F") is not None
    mps = ckpt.best_mps if use_best else ckpt.mps_tensors
    latents = ckpt.best_latents if use_best else ckpt.latents
    state = _TrainState(mps, latents, lr=0.0)
    n_sites = int(ckpt.model["n_sites"])
    return _build_models(state, n_sites, ckpt.n_layers, ckpt.chi_a,
                         requires_grad=False)


def evaluate_loss(spec: IsingSpec, s: SpectrumMPS, c: BrickwallCircuit,
                  chi_t: int, cutoff: float = 1e-14) -> LossBreakdown:
    """Loss at fixed parameters, outside any tape."""
    mpo = build_ising_mpo(spec)
    policy = TruncationPolicy(chi_t=chi_t, cutoff=cutoff)
    lb = loss(mpo, s, c, policy, term_hh=trace_h_squared(spec))
    return replace(lb, objective=None)


def train(spec: IsingSpec, n_layers: int, chi_a: int, cfg: TrainConfig,
          checkpoint_dir=None) -> TrainResult:
    """Fit the factorized ansatz to H from a fresh random initialization.

    Returns the best-F parameters seen, not the last iterate.  When
    ``checkpoint_dir`` is set, a checkpoint lands there every
    ``checkpoint_interval`` steps plus one final write.
    """
    ss = np.random.SeedSequence(cfg.seed)
    seed_mps, seed_gates, seed_run = ss.spawn(3)
    mps0 = SpectrumMPS.init_random(spec.n_sites, chi_a, scale=cfg.mps_scale,
                                   seed=seed_mps)
    circ0 = build_brickwall(spec.n_sites, n_layers, init="near-identity",
                            noise=cfg.gate_noise, seed=seed_gates)
    state = _TrainState([t.data.real.copy() for t in mps0.tensors],
                        [g.latent.data.copy() for g in circ0.gates],
                        cfg.learning_rate)
    state.rng = np.random.default_rng(seed_run)
    return _run_loop(spec, n_layers, chi_a, cfg, state, start_step=0,
                     checkpoint_dir=checkpoint_dir)


def resume(checkpoint_path, cfg: TrainConfig, checkpoint_dir=None) -> TrainResult:
    """Continue training from a saved checkpoint.

    The model, parameters, optimizer moments, and schedule state (current
    learning rate, plateau counter, best-so-far) all come from the
    checkpoint, so the continued trajectory matches an uninterrupted run.
    ``cfg`` supplies the stopping and truncation controls; ``max_steps``
    counts total steps including those already taken.
    """
    ckpt = load_checkpoint(checkpoint_path)
    spec = _spec_from_dict(ckpt.model)
    state = _state_from_checkpoint(ckpt)
    return _run_loop(spec, ckpt.n_layers, ckpt.chi_a, cfg, state,
                     start_step=ckpt.step, checkpoint_dir=checkpoint_dir)


def _run_loop(spec, n_layers, chi_a, cfg, state, start_step, checkpoint_dir):
    mpo = build_ising_mpo(spec)
    term_hh = trace_h_squared(spec)
    policy = TruncationPolicy(chi_t=cfg.chi_t, cutoff=cfg.truncation_cutoff)
    if checkpoint_dir is not None:
        os.makedirs(checkpoint_dir, exist_ok=True)

    log: list[LossBreakdown] = []
    paths: list[str] = []
    restore_point = state.snapshot(start_step)
    stop_reason = "max_steps"
    step = start_step
    while step < cfg.max_steps:
        s, c = _build_models(state, spec.n_sites, n_layers, chi_a)
        try:
            with GradTape() as tape:
                lb = loss(mpo, s, c, policy, term_hh=term_hh)
                seed_node = tensor.real_part(lb.objective)
                grad_map = tape.backward(seed_node)
            leaves = list(s.tensors) + [g.latent for g in c.gates]
            grads = [grad_map[leaf].data for leaf in leaves]
            finite = math.isfinite(lb.pre_log) and all(
                np.all(np.isfinite(g)) for g in grads)
        except np.linalg.LinAlgError:
            # diverged parameters can break the SVD before a NaN loss lands
            finite = False
        if not finite:
            state.retries += 1
            if state.retries > MAX_RETRIES:
                raise TrainingDivergedError(
                    f"non-finite loss or gradient at step {step} persisted "
                    f"through {MAX_RETRIES} retries (lr now {state.lr:g}); "
                    f"last finite F was "
                    f"{log[-1].F if log else float('nan'):.6g}")
            prev_lr = state.lr
            rewind_to = state.restore(restore_point)
            # halve below both the diverged lr and the restored one
            state.lr = 0.5 * min(prev_lr, state.lr)
            del log[rewind_to - start_step:]
            step = rewind_to
            continue

        log.append(replace(lb, objective=None))

        if lb.saturated:
            # the pre-log argument went nonpositive: the optimizer walked
            # below the truncation noise floor and F is meaningless there.
            # Restart from the best parameters with a finer step instead of
            # descending into noise; give up after a few restarts.
            state.saturations += 1
            if state.saturations > MAX_RETRIES:
                stop_reason = "saturated"
                step += 1
                break
            state.mps = [a.copy() for a in state.best_mps]
            state.latents = [a.copy() for a in state.best_latents]
            state.m = [np.zeros_like(a) for a in state.m]
            state.v = [np.zeros(a.shape) for a in state.v]
            state.t = 0
            state.lr *= 0.5
            state.stall = 0
            state.streak = 0
            state.prev_F = None
            step += 1
            continue

        if lb.F < state.best_F:
            state.best_F = lb.F
            state.best_step = step
            state.best_mps = [a.copy() for a in state.mps]
            state.best_latents = [a.copy() for a in state.latents]
            state.stall = 0
        else:
            state.stall += 1
            if state.stall >= cfg.plateau_patience:
                state.lr *= cfg.plateau_factor
                state.stall = 0
        if cfg.tol > 0 and state.prev_F is not None:
            rel = abs(lb.F - state.prev_F) / max(1.0, abs(lb.F))
            state.streak = state.streak + 1 if rel <= cfg.tol else 0
            if state.streak >= CONVERGE_STREAK:
                state.prev_F = lb.F
                stop_reason = "converged"
                step += 1
                break
        state.prev_F = lb.F

        _apply_update(state, grads, cfg, step)
        step += 1

        if cfg.checkpoint_interval > 0 and (step - start_step) % cfg.checkpoint_interval == 0:
            restore_point = state.snapshot(step)
            if checkpoint_dir is not None:
                path = os.path.join(checkpoint_dir, f"checkpoint_{step:06d}.npz")
                save_checkpoint(path, _state_to_checkpoint(
                    state, step, spec, n_layers, chi_a))
                paths.append(path)

    if checkpoint_dir is not None:
        path = os.path.join(checkpoint_dir, "checkpoint_final.npz")
        save_checkpoint(path, _state_to_checkpoint(
            state, step, spec, n_layers, chi_a,
            extra={"stop_reason": stop_reason}))
        paths.append(path)

    best = _TrainState(state.best_mps, state.best_latents, state.lr)
    s_best, c_best = _build_models(best, spec.n_sites, n_layers, chi_a,
                                   requires_grad=False)
    validation = evaluate_loss(spec, s_best, c_best,
                               cfg.resolved_validation_chi_t(),
                               cutoff=cfg.truncation_cutoff)
    return TrainResult(
        spectrum=s_best,
        circuit=c_best,
        log=log,
        start_step=start_step,
        best_step=state.best_step,
        best_F=state.best_F,
        final_lr=state.lr,
        stop_reason=stop_reason,
        validation=validation,
        checkpoint_paths=paths,
    )
