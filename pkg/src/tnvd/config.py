"""Run configuration: a nested YAML file mapped onto typed sections.

One file fully determines an experiment.  ``load_config`` reports YAML
syntax errors with line numbers and field errors with dotted paths;
``default_config_yaml`` prints every knob with its default.
"""

from __future__ import annotations

import copy
import os
from dataclasses import dataclass, field, fields

import numpy as np
import yaml

from .hamiltonian import DENSE_SITE_LIMIT, IsingSpec
from .trainer import TrainConfig

OUTPUT_ROOT_ENV = "TNVD_OUTPUT_ROOT"
EXPERIMENT_KINDS = ("single", "sweep", "disorder-scan", "dos-study")
SWEEP_AXES = ("N", "chi_a", "N_L", "W")


class ConfigError(ValueError):
    """Invalid run configuration; ``problems`` lists dotted-path messages."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid config:\n" + "\n".join(f"  - {p}" for p in self.problems))


@dataclass(frozen=True)
class RunConfig:
    model: IsingSpec
    n_layers: int = 10
    chi_a: int = 8
    train: TrainConfig = field(default_factory=TrainConfig)
    experiment: str = "single"
    epsilon: bool = True             # compare against exact diagonalization
    ee_deviation: bool = False       # eigenstate-EE error stats vs ED vectors
    sweep_axis: str | None = None
    sweep_values: tuple = ()
    n_realizations: int = 8          # disorder-scan only
    n_samples: int = 2048
    sample_seed: int = 0
    eigenstate_chi: int = 64
    workers: int = 1
    output_dir: str | None = None
    run_name: str | None = None


def default_run_config() -> RunConfig:
    return RunConfig(model=IsingSpec(n_sites=8, h=0.5))


# ---------------------------------------------------------------------------
# mapping between the YAML tree and RunConfig
# ---------------------------------------------------------------------------

def config_to_dict(cfg: RunConfig) -> dict:
    model = {"n_sites": cfg.model.n_sites, "h": cfg.model.h,
             "fields_w": list(cfg.model.fields_w),
             "disorder_w": cfg.model.disorder_w, "seed": cfg.model.seed}
    train = {f.name: getattr(cfg.train, f.name) for f in fields(TrainConfig)}
    return {
        "model": model,
        "ansatz": {"n_layers": cfg.n_layers, "chi_a": cfg.chi_a},
        "train": train,
        "experiment": {"kind": cfg.experiment, "epsilon": cfg.epsilon,
                       "ee_deviation": cfg.ee_deviation,
                       "sweep_axis": cfg.sweep_axis,
                       "sweep_values": list(cfg.sweep_values),
                       "n_realizations": cfg.n_realizations},
        "sampling": {"n_samples": cfg.n_samples, "seed": cfg.sample_seed,
                     "eigenstate_chi": cfg.eigenstate_chi},
        "output": {"dir": cfg.output_dir, "name": cfg.run_name,
                   "workers": cfg.workers},
    }


def default_config_yaml() -> str:
    return yaml.safe_dump(config_to_dict(default_run_config()),
                          sort_keys=False, default_flow_style=False)


def _section(tree, name, problems) -> dict:
    sub = tree.pop(name, {})
    if sub is None:
        sub = {}
    if not isinstance(sub, dict):
        problems.append(f"{name}: expected a mapping, got {type(sub).__name__}")
        return {}
    return sub


def _take(sub: dict, section: str, key: str, default, caster, problems):
    if key not in sub:
        return default
    raw = sub.pop(key)
    if raw is None:
        return None
    try:
        return caster(raw)
    except (TypeError, ValueError) as exc:
        problems.append(f"{section}.{key}: {exc}")
        return default


def _bool(x):
    if isinstance(x, bool):
        return x
    raise ValueError(f"expected true/false, got {x!r}")


def config_from_dict(tree: dict) -> RunConfig:
    """Build and fully validate a RunConfig; raises ConfigError with paths."""
    if not isinstance(tree, dict):
        raise ConfigError([f"top level: expected a mapping, got {type(tree).__name__}"])
    tree = copy.deepcopy(tree)  # sections are consumed by pop below
    problems: list[str] = []

    model_d = _section(tree, "model", problems)
    ansatz_d = _section(tree, "ansatz", problems)
    train_d = _section(tree, "train", problems)
    exp_d = _section(tree, "experiment", problems)
    sampling_d = _section(tree, "sampling", problems)
    output_d = _section(tree, "output", problems)
    for stray in tree:
        problems.append(f"{stray}: unknown section")

    n_sites = _take(model_d, "model", "n_sites", 8, int, problems)
    h = _take(model_d, "model", "h", 0.5, float, problems)
    fields_w = _take(model_d, "model", "fields_w", (),
                     lambda x: tuple(float(v) for v in x), problems)
    disorder_w = _take(model_d, "model", "disorder_w", 0.0, float, problems)
    model_seed = _take(model_d, "model", "seed", 0, int, problems)
    for stray in model_d:
        problems.append(f"model.{stray}: unknown field")
    try:
        model = IsingSpec(n_sites=n_sites, h=h, fields_w=fields_w or (),
                          disorder_w=disorder_w, seed=model_seed)
    except ValueError as exc:
        problems.append(f"model: {exc}")
        model = IsingSpec(n_sites=2)

    n_layers = _take(ansatz_d, "ansatz", "n_layers", 10, int, problems)
    chi_a = _take(ansatz_d, "ansatz", "chi_a", 8, int, problems)
    for stray in ansatz_d:
        problems.append(f"ansatz.{stray}: unknown field")
    if n_layers is None or n_layers < 1:
        problems.append(f"ansatz.n_layers: must be >= 1, got {n_layers}")
    if chi_a is None or chi_a < 1:
        problems.append(f"ansatz.chi_a: must be >= 1, got {chi_a}")

    train_kwargs = {}
    casters = {
        "optimizer": str, "learning_rate": float, "max_steps": int,
        "tol": float, "checkpoint_interval": int, "chi_t": int,
        "validation_chi_t": int, "seed": int, "plateau_patience": int,
        "plateau_factor": float, "alternating": _bool, "gate_noise": float,
        "mps_scale": float, "truncation_cutoff": float,
    }
    for key, caster in casters.items():
        if key in train_d:
            val = _take(train_d, "train", key, None, caster, problems)
            train_kwargs[key] = val
    for stray in train_d:
        problems.append(f"train.{stray}: unknown field")
    try:
        train = TrainConfig(**train_kwargs)
    except (TypeError, ValueError) as exc:
        problems.append(f"train: {exc}")
        train = TrainConfig()

    kind = _take(exp_d, "experiment", "kind", "single", str, problems)
    epsilon = _take(exp_d, "experiment", "epsilon", True, _bool, problems)
    ee_dev = _take(exp_d, "experiment", "ee_deviation", False, _bool, problems)
    sweep_axis = _take(exp_d, "experiment", "sweep_axis", None, str, problems)
    sweep_values = _take(exp_d, "experiment", "sweep_values", (),
                         lambda x: tuple(float(v) for v in x), problems)
    n_real = _take(exp_d, "experiment", "n_realizations", 8, int, problems)
    for stray in exp_d:
        problems.append(f"experiment.{stray}: unknown field")

    n_samples = _take(sampling_d, "sampling", "n_samples", 2048, int, problems)
    sample_seed = _take(sampling_d, "sampling", "seed", 0, int, problems)
    eig_chi = _take(sampling_d, "sampling", "eigenstate_chi", 64, int, problems)
    for stray in sampling_d:
        problems.append(f"sampling.{stray}: unknown field")

    out_dir = _take(output_d, "output", "dir", None, str, problems)
    run_name = _take(output_d, "output", "name", None, str, problems)
    workers = _take(output_d, "output", "workers", 1, int, problems)
    for stray in output_d:
        problems.append(f"output.{stray}: unknown field")

    # cross-field rules
    if kind not in EXPERIMENT_KINDS:
        problems.append(
            f"experiment.kind: {kind!r} not one of {', '.join(EXPERIMENT_KINDS)}")
    if epsilon and model.n_sites > DENSE_SITE_LIMIT:
        problems.append(
            f"experiment.epsilon: exact diagonalization infeasible at "
            f"n_sites={model.n_sites} (limit {DENSE_SITE_LIMIT}); set epsilon: false")
    if ee_dev and model.n_sites > DENSE_SITE_LIMIT:
        problems.append(
            f"experiment.ee_deviation: needs exact eigenvectors, infeasible at "
            f"n_sites={model.n_sites} (limit {DENSE_SITE_LIMIT})")
    if kind == "sweep":
        if sweep_axis not in SWEEP_AXES:
            problems.append(
                f"experiment.sweep_axis: {sweep_axis!r} not one of {', '.join(SWEEP_AXES)}")
        if not sweep_values:
            problems.append("experiment.sweep_values: empty value list")
        elif sweep_axis in ("N", "chi_a", "N_L"):
            bad = [v for v in sweep_values
                   if v != int(v) or int(v) < (2 if sweep_axis == "N" else 1)]
            if bad:
                problems.append(
                    f"experiment.sweep_values: invalid for axis {sweep_axis}: {bad}")
        elif sweep_axis == "W":
            bad = [v for v in sweep_values if v < 0]
            if bad:
                problems.append(
                    f"experiment.sweep_values: disorder strengths must be >= 0: {bad}")
    if kind == "disorder-scan":
        if n_real is None or n_real < 1:
            problems.append(f"experiment.n_realizations: must be >= 1, got {n_real}")
        if model.disorder_w <= 0:
            problems.append(
                "model.disorder_w: disorder-scan needs disorder_w > 0")
    if n_samples is None or n_samples < 0:
        problems.append(f"sampling.n_samples: must be >= 0, got {n_samples}")
    if kind == "dos-study":
        exhaustive_ok = model.n_sites <= DENSE_SITE_LIMIT
        if not exhaustive_ok and (n_samples or 0) < 100:
            problems.append(
                "sampling.n_samples: dos-study needs >= 100 samples when the "
                "spectrum cannot be enumerated exactly")
    if eig_chi is None or eig_chi < 1:
        problems.append(f"sampling.eigenstate_chi: must be >= 1, got {eig_chi}")
    if workers is None or workers < 1:
        problems.append(f"output.workers: must be >= 1, got {workers}")

    if problems:
        raise ConfigError(problems)
    return RunConfig(model=model, n_layers=n_layers, chi_a=chi_a, train=train,
                     experiment=kind, epsilon=epsilon, ee_deviation=ee_dev,
                     sweep_axis=sweep_axis, sweep_values=sweep_values,
                     n_realizations=n_real, n_samples=n_samples,
                     sample_seed=sample_seed, eigenstate_chi=eig_chi,
                     workers=workers, output_dir=out_dir, run_name=run_name)


def load_config(path) -> RunConfig:
    """Parse and validate a YAML config file."""
    try:
        with open(path) as fh:
            tree = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc}"]) from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError([f"YAML syntax error{where}: {exc}"]) from exc
    if tree is None:
        tree = {}
    return config_from_dict(tree)


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(cfg), fh, sort_keys=False,
                       default_flow_style=False)


def resolve_output_dir(cfg: RunConfig) -> str:
    """Explicit dir wins; otherwise ROOT/name with a numeric suffix on clash."""
    if cfg.output_dir:
        return cfg.output_dir
    root = os.environ.get(OUTPUT_ROOT_ENV, os.path.join(os.getcwd(), "runs"))
    name = cfg.run_name or f"{cfg.experiment}-N{cfg.model.n_sites}"
    candidate = os.path.join(root, name)
    k = 1
    while os.path.exists(candidate):
        candidate = os.path.join(root, f"{name}-{k}")
        k += 1
    return candidate
