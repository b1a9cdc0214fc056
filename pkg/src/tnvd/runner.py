"""Experiment orchestration: configured runs, sweeps, disorder scans.

A run directory is self-describing: the exact config that produced it,
the training log, checkpoints, analysis CSVs (all schema-validated), and
a JSON summary.  Everything except the ``timing`` summary section is
bitwise reproducible given the same config and seeds.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import os
import time
import traceback

import numpy as np

from .analysis import (DOSHistogram, EEDistribution, SpacingRatio,
                       dense_state_entropy, dos_histogram,
                       ee_deviation_stats, ee_energy_distribution,
                       ee_energy_exhaustive, fit_gaussian,
                       fit_shifted_poisson, level_spacing_ratio,
                       mean_abs_error)
from .checkpoint import load_checkpoint
from .config import (ConfigError, RunConfig, config_from_dict, config_to_dict,
                     load_config, resolve_output_dir, save_config)
from .ed import full_spectrum
from .hamiltonian import DENSE_SITE_LIMIT
from .mps import ENUMERATION_SITE_LIMIT
from .schemas import (SUMMARY_FILENAME, write_csv, write_summary)
from .trainer import TrainResult, models_from_checkpoint, train

CONFIG_FILENAME = "config.yaml"
ERROR_MARKER = "ERROR.txt"
CHECKPOINT_DIRNAME = "checkpoints"


@dataclasses.dataclass
class SpectralReport:
    """Per-run analysis bundle: energies, errors, EE, fits, level stats."""
    energies: np.ndarray | None          # trained-model spectrum, ascending
    energies_exact: np.ndarray | None    # ED spectrum, ascending
    epsilon: float | None                # mean |E_exact - E_model|, sorted match
    dos: DOSHistogram | None
    fits: dict                           # fit model name -> parameter dict
    spacing: SpacingRatio | None
    spacing_source: str | None           # "ed" | "tnvd"
    ee: EEDistribution | None
    ee_hist: DOSHistogram | None
    ee_deviation: dict | None            # dS vs exact eigenvector EE


# ---------------------------------------------------------------------------
# analysis
# ---------------------------------------------------------------------------

def analyze_models(cfg: RunConfig, spectrum, circuit) -> SpectralReport:
    """All post-training analysis the config asks for.

    Individual statistics degrade gracefully: a fit that lacks enough
    samples is simply omitted instead of failing the run.
    """
    n = cfg.model.n_sites
    energies = None
    if n <= ENUMERATION_SITE_LIMIT:
        energies = np.sort(spectrum.enumerate_entries())
    energies_exact = None
    if cfg.epsilon and n <= DENSE_SITE_LIMIT:
        energies_exact = full_spectrum(cfg.model).eigenvalues
    epsilon = None
    if energies is not None and energies_exact is not None:
        epsilon = mean_abs_error(energies_exact, energies)

    if energies is not None:
        dos_values = energies
    elif cfg.n_samples > 0:
        _, dos_values = spectrum.sample_entries(cfg.n_samples,
                                                seed=cfg.sample_seed)
    else:
        dos_values = None

    fits: dict = {}
    dos = None
    if dos_values is not None and dos_values.size:
        dos = dos_histogram(dos_values)
        try:
            fit = fit_gaussian(dos)
            fits["gaussian"] = dict(fit.params)
        except (ValueError, RuntimeError):
            pass

    spacing = None
    spacing_source = None
    spacing_values = energies_exact if energies_exact is not None else energies
    if spacing_values is not None:
        try:
            spacing = level_spacing_ratio(spacing_values)
            spacing_source = "ed" if energies_exact is not None else "tnvd"
        except ValueError:
            pass

    ee = None
    ee_hist = None
    if cfg.n_samples > 0:
        exhaustive = n <= DENSE_SITE_LIMIT and 2**n <= cfg.n_samples
        if exhaustive:
            ee = ee_energy_exhaustive(spectrum, circuit,
                                      chi=cfg.eigenstate_chi,
                                      cutoff=cfg.train.truncation_cutoff)
        else:
            ee = ee_energy_distribution(spectrum, circuit, cfg.n_samples,
                                        seed=cfg.sample_seed,
                                        chi=cfg.eigenstate_chi,
                                        cutoff=cfg.train.truncation_cutoff)
        ee_hist = dos_histogram(ee.entropies)
        try:
            fit = fit_shifted_poisson(ee_hist)
            fits["shifted_poisson"] = dict(fit.params)
        except (ValueError, RuntimeError):
            pass

    ee_dev = None
    if cfg.ee_deviation and n <= DENSE_SITE_LIMIT:
        # per-level matching is by sorted energy; meaningful only for
        # nondegenerate spectra (disordered models)
        ed = full_spectrum(cfg.model, want_vectors=True)
        cut = n // 2
        reference = np.array([dense_state_entropy(ed.eigenvectors[:, i], cut)
                              for i in range(ed.n_levels)])
        dist = ee if (ee is not None and ee.energies.size == 2**n) else \
            ee_energy_exhaustive(spectrum, circuit, chi=cfg.eigenstate_chi,
                                 cutoff=cfg.train.truncation_cutoff)
        order = np.argsort(dist.energies, kind="stable")
        ee_dev = ee_deviation_stats(ed.eigenvalues, reference,
                                    dist.entropies[order])

    return SpectralReport(energies=energies, energies_exact=energies_exact,
                          epsilon=epsilon, dos=dos, fits=fits,
                          spacing=spacing, spacing_source=spacing_source,
                          ee=ee, ee_hist=ee_hist, ee_deviation=ee_dev)


def _hist_rows(hist: DOSHistogram):
    counts = np.asarray(hist.counts, dtype=np.float64)
    peak = counts.max() if counts.size else 0.0
    normalized = counts / peak if peak > 0 else counts
    return [(float(hist.edges[i]), float(hist.edges[i + 1]),
             float(counts[i]), float(normalized[i]))
            for i in range(counts.size)]


def write_report(run_dir, report: SpectralReport) -> list:
    """Write the analysis CSVs; returns the artifact filenames written."""
    written = []

    def _put(name, schema, rows):
        write_csv(os.path.join(run_dir, name), schema, rows)
        written.append(name)

    if report.energies is not None:
        _put("spectrum.csv", "spectrum",
             [(i, float(e)) for i, e in enumerate(report.energies)])
    if report.energies is not None and report.energies_exact is not None:
        tnvd = np.sort(report.energies)
        exact = np.sort(report.energies_exact)
        _put("spectrum_comparison.csv", "spectrum_comparison",
             [(i, float(a), float(b), float(abs(a - b)))
              for i, (a, b) in enumerate(zip(exact, tnvd))])
    if report.dos is not None:
        _put("dos_histogram.csv", "dos_histogram", _hist_rows(report.dos))
    if report.fits:
        rows = [(model, param, float(value))
                for model in sorted(report.fits)
                for param, value in sorted(report.fits[model].items())]
        _put("fits.csv", "fits", rows)
    if report.ee is not None:
        ee = report.ee
        rows = [(k, "".join(str(b) for b in ee.bits[k]),
                 float(ee.energies[k]), float(ee.normalized_energies[k]),
                 float(ee.entropies[k]))
                for k in range(ee.energies.size)]
        _put("ee_scatter.csv", "ee_scatter", rows)
    if report.ee_hist is not None:
        _put("ee_histogram.csv", "ee_histogram", _hist_rows(report.ee_hist))
    return written


def _analysis_summary(report: SpectralReport) -> dict:
    out = {
        "epsilon": report.epsilon,
        "fits": report.fits,
        "spacing": None,
        "ee": None,
        "ee_deviation": report.ee_deviation,
    }
    if report.spacing is not None:
        out["spacing"] = {"r": report.spacing.r, "used": report.spacing.used,
                          "skipped": report.spacing.skipped,
                          "source": report.spacing_source}
    if report.ee is not None:
        out["ee"] = {"n_states": int(report.ee.energies.size),
                     "mean_entropy_bits": float(report.ee.entropies.mean()),
                     "max_entropy_bits": float(report.ee.entropies.max())}
    return out


# ---------------------------------------------------------------------------
# single run
# ---------------------------------------------------------------------------

def _write_training_log(run_dir, result: TrainResult) -> None:
    rows = [(result.start_step + i, lb.F, lb.term_hh, lb.term_tt,
             lb.term_cross, lb.discarded_weight)
            for i, lb in enumerate(result.log)]
    write_csv(os.path.join(run_dir, "training_log.csv"), "training_log", rows)


def _mark_error(run_dir, exc: BaseException) -> None:
    try:
        with open(os.path.join(run_dir, ERROR_MARKER), "w") as fh:
            fh.write("".join(traceback.format_exception(exc)))
    except OSError:
        pass


def run_single(cfg: RunConfig, run_dir=None) -> tuple:
    """Train, analyze, and persist one experiment; returns (summary, dir).

    Mid-run failures leave the partial artifacts in place plus an
    ``ERROR.txt`` marker holding the traceback, then re-raise.
    """
    if run_dir is None:
        run_dir = resolve_output_dir(cfg)
    os.makedirs(run_dir, exist_ok=True)
    save_config(cfg, os.path.join(run_dir, CONFIG_FILENAME))
    t0 = time.perf_counter()
    try:
        result = train(cfg.model, cfg.n_layers, cfg.chi_a, cfg.train,
                       checkpoint_dir=os.path.join(run_dir, CHECKPOINT_DIRNAME))
        _write_training_log(run_dir, result)
        report = analyze_models(cfg, result.spectrum, result.circuit)
        artifacts = ["config.yaml", "training_log.csv"]
        artifacts += write_report(run_dir, report)
    except BaseException as exc:
        _mark_error(run_dir, exc)
        raise
    summary = {
        "status": "ok",
        "experiment": cfg.experiment,
        "model": config_to_dict(cfg)["model"],
        "ansatz": {"n_layers": cfg.n_layers, "chi_a": cfg.chi_a},
        "train": {
            "final_F": result.log[-1].F if result.log else None,
            "best_F": result.best_F,
            "best_step": result.best_step,
            "steps": result.start_step + len(result.log),
            "stop_reason": result.stop_reason,
            "final_lr": result.final_lr,
            "validation_F": result.validation.F if result.validation else None,
            "validation_chi_t": cfg.train.resolved_validation_chi_t(),
        },
        "analysis": _analysis_summary(report),
        "artifacts": sorted(artifacts + [SUMMARY_FILENAME]),
        "timing": {"wall_time_s": time.perf_counter() - t0},
    }
    write_summary(os.path.join(run_dir, SUMMARY_FILENAME), summary)
    return summary, run_dir


# ---------------------------------------------------------------------------
# sweeps and disorder scans
# ---------------------------------------------------------------------------

def _derived_seeds(master: int, count: int) -> list:
    children = np.random.SeedSequence(master).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def _fmt_value(v) -> str:
    return str(int(v)) if float(v).is_integer() else f"{float(v):g}"


def _single_tree(cfg: RunConfig) -> dict:
    tree = config_to_dict(cfg)
    tree["experiment"]["kind"] = "single"
    tree["experiment"]["sweep_axis"] = None
    tree["experiment"]["sweep_values"] = []
    tree["output"] = {"dir": None, "name": None, "workers": 1}
    return tree


def _run_task(args):
    """One sub-run; module level so a process pool can pickle it."""
    tree, run_dir = args
    try:
        sub = config_from_dict(tree)
    except ConfigError as exc:
        os.makedirs(run_dir, exist_ok=True)
        with open(os.path.join(run_dir, ERROR_MARKER), "w") as fh:
            fh.write(str(exc) + "\n")
        return {"status": "failed", "summary": None,
                "message": f"invalid sub-config: {exc.problems[0]}"}
    try:
        summary, _ = run_single(sub, run_dir)
        return {"status": "ok", "summary": summary, "message": ""}
    except Exception as exc:
        # sweep semantics: record the failure per row, keep going
        return {"status": "failed", "summary": None,
                "message": f"{type(exc).__name__}: {exc}"}


def _map_tasks(task_args, workers: int):
    if workers <= 1 or len(task_args) <= 1:
        return [_run_task(a) for a in task_args]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, task_args))


def _pluck(outcome, *path):
    node = outcome["summary"]
    for key in path:
        if node is None:
            return None
        node = node.get(key)
    return node


def run_sweep(cfg: RunConfig, run_dir=None) -> tuple:
    """One trained sub-run per axis value plus an aggregate CSV."""
    if cfg.experiment != "sweep":
        raise ValueError(f"config experiment kind is {cfg.experiment!r}, not sweep")
    if run_dir is None:
        run_dir = resolve_output_dir(cfg)
    os.makedirs(run_dir, exist_ok=True)
    save_config(cfg, os.path.join(run_dir, CONFIG_FILENAME))
    t0 = time.perf_counter()

    axis = cfg.sweep_axis
    tasks = []
    subdirs = []
    for value in cfg.sweep_values:
        tree = _single_tree(cfg)
        if axis == "N":
            tree["model"]["n_sites"] = int(value)
        elif axis == "chi_a":
            tree["ansatz"]["chi_a"] = int(value)
        elif axis == "N_L":
            tree["ansatz"]["n_layers"] = int(value)
        elif axis == "W":
            tree["model"]["disorder_w"] = float(value)
        name = f"{axis}-{_fmt_value(value)}"
        subdirs.append(name)
        tasks.append((tree, os.path.join(run_dir, name)))

    outcomes = _map_tasks(tasks, cfg.workers)
    rows = []
    for value, name, out in zip(cfg.sweep_values, subdirs, outcomes):
        rows.append((axis, float(value), name,
                     _pluck(out, "train", "best_F"),
                     _pluck(out, "analysis", "epsilon"),
                     _pluck(out, "analysis", "fits", "gaussian", "sigma"),
                     _pluck(out, "analysis", "fits", "shifted_poisson", "omega"),
                     out["status"], out["message"]))
    write_csv(os.path.join(run_dir, "sweep_aggregate.csv"),
              "sweep_aggregate", rows)

    n_ok = sum(1 for o in outcomes if o["status"] == "ok")
    summary = {
        "status": "ok" if n_ok == len(outcomes) else "partial",
        "experiment": "sweep",
        "axis": axis,
        "values": [float(v) for v in cfg.sweep_values],
        "n_ok": n_ok,
        "n_failed": len(outcomes) - n_ok,
        "rows": [
            {"value": float(v), "run_dir": name, "status": o["status"],
             "F": _pluck(o, "train", "best_F"),
             "epsilon": _pluck(o, "analysis", "epsilon"),
             "message": o["message"]}
            for v, name, o in zip(cfg.sweep_values, subdirs, outcomes)
        ],
        "timing": {"wall_time_s": time.perf_counter() - t0},
    }
    write_summary(os.path.join(run_dir, SUMMARY_FILENAME), summary)
    return summary, run_dir


def run_disorder(cfg: RunConfig, run_dir=None) -> tuple:
    """R disorder realizations with SeedSequence-derived seeds per run."""
    if cfg.experiment != "disorder-scan":
        raise ValueError(
            f"config experiment kind is {cfg.experiment!r}, not disorder-scan")
    if run_dir is None:
        run_dir = resolve_output_dir(cfg)
    os.makedirs(run_dir, exist_ok=True)
    save_config(cfg, os.path.join(run_dir, CONFIG_FILENAME))
    t0 = time.perf_counter()

    n_real = cfg.n_realizations
    model_seeds = _derived_seeds(cfg.model.seed, n_real)
    train_seeds = _derived_seeds(cfg.train.seed, n_real)
    tasks = []
    subdirs = []
    for k in range(n_real):
        tree = _single_tree(cfg)
        tree["model"]["seed"] = model_seeds[k]
        tree["train"]["seed"] = train_seeds[k]
        name = f"realization-{k:03d}"
        subdirs.append(name)
        tasks.append((tree, os.path.join(run_dir, name)))

    outcomes = _map_tasks(tasks, cfg.workers)
    rows = []
    for k, (name, out) in enumerate(zip(subdirs, outcomes)):
        dev = _pluck(out, "analysis", "ee_deviation") or {}
        rows.append((k, model_seeds[k], name,
                     _pluck(out, "train", "best_F"),
                     _pluck(out, "analysis", "epsilon"),
                     _pluck(out, "analysis", "spacing", "r"),
                     dev.get("dS_ground"), dev.get("dS_zero"),
                     out["status"], out["message"]))
    write_csv(os.path.join(run_dir, "disorder_aggregate.csv"),
              "disorder_aggregate", rows)

    def _mean(idx):
        vals = [r[idx] for r in rows if r[idx] is not None]
        return float(np.mean(vals)) if vals else None

    n_ok = sum(1 for o in outcomes if o["status"] == "ok")
    summary = {
        "status": "ok" if n_ok == n_real else "partial",
        "experiment": "disorder-scan",
        "model": config_to_dict(cfg)["model"],
        "n_realizations": n_real,
        "n_ok": n_ok,
        "n_failed": n_real - n_ok,
        "mean_F": _mean(3),
        "mean_epsilon": _mean(4),
        "mean_r": _mean(5),
        "mean_dS_ground": _mean(6),
        "mean_dS_zero": _mean(7),
        "timing": {"wall_time_s": time.perf_counter() - t0},
    }
    write_summary(os.path.join(run_dir, SUMMARY_FILENAME), summary)
    return summary, run_dir


def run_experiment(cfg: RunConfig, run_dir=None) -> tuple:
    if cfg.experiment == "sweep":
        return run_sweep(cfg, run_dir)
    if cfg.experiment == "disorder-scan":
        return run_disorder(cfg, run_dir)
    return run_single(cfg, run_dir)


# ---------------------------------------------------------------------------
# re-analysis of existing artifacts
# ---------------------------------------------------------------------------

def analyze_run_dir(run_dir) -> dict:
    """Recompute the analysis CSVs and summary from saved checkpoints.

    Works on single-run directories; for sweep or disorder-scan roots,
    point it at a realization subdirectory.
    """
    config_path = os.path.join(run_dir, CONFIG_FILENAME)
    if not os.path.exists(config_path):
        raise FileNotFoundError(f"{run_dir}: no {CONFIG_FILENAME}")
    cfg = load_config(config_path)
    ckpt_path = os.path.join(run_dir, CHECKPOINT_DIRNAME, "checkpoint_final.npz")
    if not os.path.exists(ckpt_path):
        raise FileNotFoundError(
            f"{run_dir}: no {CHECKPOINT_DIRNAME}/checkpoint_final.npz; "
            "analyze needs a completed single run directory")
    ckpt = load_checkpoint(ckpt_path)
    spectrum, circuit = models_from_checkpoint(ckpt, best=True)
    if spectrum.n_sites != cfg.model.n_sites:
        raise ValueError(
            f"checkpoint has {spectrum.n_sites} sites, config says "
            f"{cfg.model.n_sites}")
    t0 = time.perf_counter()
    report = analyze_models(cfg, spectrum, circuit)
    artifacts = write_report(run_dir, report)

    summary_path = os.path.join(run_dir, SUMMARY_FILENAME)
    if os.path.exists(summary_path):
        from .schemas import read_summary
        summary = read_summary(summary_path)
    else:
        summary = {"status": "ok", "experiment": cfg.experiment,
                   "model": config_to_dict(cfg)["model"],
                   "ansatz": {"n_layers": cfg.n_layers, "chi_a": cfg.chi_a}}
    summary["analysis"] = _analysis_summary(report)
    existing = set(summary.get("artifacts", []))
    summary["artifacts"] = sorted(existing | set(artifacts) | {SUMMARY_FILENAME})
    summary["timing"] = {"wall_time_s": time.perf_counter() - t0}
    write_summary(summary_path, summary)
    return summary
