"""Reproducible Monte Carlo experiments over lemniscate ensembles.

Every trial is a pure function of (ensemble, degree, trial_index,
master_seed): the per-trial seed comes from an avalanche mix of the three
indices, each worker re-derives its own stream, and records are merged in
(degree, trial_index) order.  Output files are therefore byte-identical
whatever the worker count.

Flagged extractions (saddle cells at the deepest level, unenclosed roots,
unconverged lengths) are excluded from summary statistics but retained in
the raw records; an exclusion rate above 5 percent aborts the experiment,
since that signals a misconfigured grid rather than bad luck.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry
from .ensembles import EnsembleSpec, sample
from .geometry import GiantOutcome, GridConfig
from .rng import mix3
from .theory import LengthEstimate, QuadratureConfig, expected_length

MAX_EXCLUSION_RATE = 0.05

#: grid used by experiments unless overridden: coarse enough for throughput,
#: fine enough that discretization bias stays far below Monte Carlo noise
MC_GRID = GridConfig(
    initial_cells_per_axis=64,
    max_depth=14,
    vertex_tolerance=1e-7,
    length_refine_tolerance=3e-3,
)


class ExperimentError(RuntimeError):
    """Raised when an experiment's results cannot be trusted."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment's output."""

    ensemble: EnsembleSpec
    degrees: tuple
    trials_per_degree: int
    master_seed: int
    grid: GridConfig = MC_GRID
    giant_radius: float | None = None
    certificate_params: tuple | None = None   # (alpha, beta) or None
    output_path: str | None = None

    def __post_init__(self):
        degrees = tuple(int(d) for d in self.degrees)
        if not degrees or any(d < 1 for d in degrees):
            raise ValueError("degrees must be a nonempty list of integers >= 1")
        object.__setattr__(self, "degrees", degrees)
        if self.trials_per_degree < 1:
            raise ValueError("trials_per_degree must be >= 1")
        if self.giant_radius is not None and not (0.0 < self.giant_radius < 1.0):
            raise ValueError("giant_radius must lie in (0, 1)")

    def spec_for(self, degree: int) -> EnsembleSpec:
        if self.ensemble.kind == "custom" and degree != self.ensemble.degree:
            raise ValueError("custom ensembles cannot be re-sized across degrees")
        if degree == self.ensemble.degree:
            return self.ensemble
        return EnsembleSpec(kind=self.ensemble.kind, degree=degree)

    def to_json_dict(self) -> dict:
        return {
            "ensemble": self.ensemble.to_json_dict(),
            "degrees": list(self.degrees),
            "trials_per_degree": self.trials_per_degree,
            "master_seed": self.master_seed,
            "grid": {
                "initial_cells_per_axis": self.grid.initial_cells_per_axis,
                "max_depth": self.grid.max_depth,
                "vertex_tolerance": self.grid.vertex_tolerance,
                "length_refine_tolerance": self.grid.length_refine_tolerance,
            },
            "giant_radius": self.giant_radius,
            "certificate_params": (
                list(self.certificate_params) if self.certificate_params else None
            ),
            "output_path": self.output_path,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExperimentConfig":
        grid = d.get("grid")
        cert = d.get("certificate_params")
        return cls(
            ensemble=EnsembleSpec.from_json_dict(d["ensemble"]),
            degrees=tuple(d["degrees"]),
            trials_per_degree=int(d["trials_per_degree"]),
            master_seed=int(d["master_seed"]),
            grid=GridConfig(**grid) if grid else MC_GRID,
            giant_radius=d.get("giant_radius"),
            certificate_params=tuple(cert) if cert else None,
            output_path=d.get("output_path"),
        )


@dataclass
class TrialRecord:
    """One Monte Carlo observation."""

    degree: int
    trial_index: int
    seed: int
    total_length: float
    b0: int
    unresolved: int
    excluded: bool
    giant: GiantOutcome | None = None
    giant_component_length: float | None = None
    certificate_hits: int | None = None
    wall_time_ms: float = 0.0


@dataclass
class SummaryStats:
    """Mean with normal-approximation confidence interval."""

    n_trials: int
    mean: float
    std_error: float
    ci95: tuple
    excluded: int


def derive_trial_seed(master: int, degree: int, trial_index: int) -> int:
    """Stable avalanche mix of (master, degree, trial_index) into 64 bits."""
    return mix3(master, degree, trial_index)


def summarize(values, excluded: int = 0) -> SummaryStats:
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    mean = float(v.mean()) if n else math.nan
    se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    ci = (mean - 1.96 * se, mean + 1.96 * se) if n > 1 else (math.nan, math.nan)
    return SummaryStats(n_trials=n, mean=mean, std_error=se, ci95=ci, excluded=excluded)


def wilson_interval(successes: int, total: int, z: float = 1.96) -> tuple:
    """Wilson score 95% interval for a binomial proportion."""
    if total <= 0:
        return (math.nan, math.nan)
    phat = successes / total
    z2 = z * z
    denom = 1.0 + z2 / total
    center = (phat + z2 / (2.0 * total)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / total + z2 / (4.0 * total * total)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _run_trial(args) -> TrialRecord:
    (spec_json, degree, trial_index, master_seed, grid_tuple, giant_radius,
     certificate_params, mode) = args
    spec = EnsembleSpec.from_json_dict(spec_json)
    grid = GridConfig(*grid_tuple)
    seed = derive_trial_seed(master_seed, degree, trial_index)
    t0 = time.perf_counter()
    p = sample(spec, seed)
    giant = None
    giant_len = None
    if giant_radius is not None:
        giant = geometry.giant_event(p, giant_radius)
    if mode == "giant-only" and giant is not GiantOutcome.TRUE:
        # frequency-only trial: the curve itself is not measured
        return TrialRecord(
            degree=degree, trial_index=trial_index, seed=seed,
            total_length=math.nan, b0=0, unresolved=0, excluded=False,
            giant=giant, giant_component_length=None, certificate_hits=None,
            wall_time_ms=1000.0 * (time.perf_counter() - t0),
        )
    curve = geometry.extract_lemniscate(p, grid)
    if giant is GiantOutcome.TRUE:
        idx = geometry.component_enclosing(curve, 0j)
        giant_len = curve.per_component_length[idx] if idx is not None else 0.0
    hits = None
    if certificate_params is not None:
        alpha, beta = certificate_params
        hits = 0
        for z in geometry.roots(p):
            if geometry.taylor_certificate(p, z, alpha, beta):
                hits += 1
    return TrialRecord(
        degree=degree,
        trial_index=trial_index,
        seed=seed,
        total_length=curve.total_length,
        b0=curve.b0,
        unresolved=curve.unresolved_cells,
        excluded=curve.flagged(),
        giant=giant,
        giant_component_length=giant_len,
        certificate_hits=hits,
        wall_time_ms=1000.0 * (time.perf_counter() - t0),
    )


def _run_trials(cfg: ExperimentConfig, workers: int = 1, mode: str = "full") -> list:
    grid_tuple = (
        cfg.grid.initial_cells_per_axis,
        cfg.grid.max_depth,
        cfg.grid.vertex_tolerance,
        cfg.grid.length_refine_tolerance,
    )
    tasks = [
        (cfg.spec_for(d).to_json_dict(), d, i, cfg.master_seed, grid_tuple,
         cfg.giant_radius, cfg.certificate_params, mode)
        for d in cfg.degrees
        for i in range(cfg.trials_per_degree)
    ]
    if workers <= 1:
        records = [_run_trial(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial, tasks, chunksize=8))
    records.sort(key=lambda r: (r.degree, r.trial_index))
    return records


def _check_exclusions(cfg: ExperimentConfig, records: list):
    for d in cfg.degrees:
        excl = sum(1 for r in records if r.degree == d and r.excluded)
        rate = excl / cfg.trials_per_degree
        if rate > MAX_EXCLUSION_RATE:
            raise ExperimentError(
                f"degree {d}: {excl}/{cfg.trials_per_degree} trials flagged "
                f"({100 * rate:.1f}% > {100 * MAX_EXCLUSION_RATE:.0f}%); "
                "the grid configuration is too coarse for this ensemble"
            )


@dataclass
class LengthExperimentResult:
    records: list
    summaries: dict           # degree -> SummaryStats of total length
    theory: dict              # degree -> LengthEstimate

    def to_json_dict(self) -> dict:
        return {
            "summaries": {
                str(d): {
                    "n_trials": s.n_trials,
                    "mean": s.mean,
                    "std_error": s.std_error,
                    "ci95": list(s.ci95),
                    "excluded": s.excluded,
                }
                for d, s in self.summaries.items()
            },
            "theory": {
                str(d): {
                    "value": t.value,
                    "error_bound": t.error_bound,
                    "cells": t.cells_used,
                }
                for d, t in self.theory.items()
            },
        }


def run_length_experiment(cfg: ExperimentConfig, workers: int = 1,
                          quadrature: QuadratureConfig | None = None) -> LengthExperimentResult:
    """Empirical mean lemniscate length per degree, with the closed-form value."""
    records = _run_trials(cfg, workers)
    _check_exclusions(cfg, records)
    summaries = {}
    theory = {}
    for d in cfg.degrees:
        kept = [r.total_length for r in records if r.degree == d and not r.excluded]
        excl = sum(1 for r in records if r.degree == d and r.excluded)
        summaries[d] = summarize(kept, excluded=excl)
        theory[d] = expected_length(cfg.spec_for(d), quadrature)
    result = LengthExperimentResult(records=records, summaries=summaries, theory=theory)
    if cfg.output_path:
        persist(cfg, records, result.to_json_dict())
    return result


@dataclass
class ComponentsExperimentResult:
    records: list
    summaries: dict           # degree -> SummaryStats of b0 / n
    exclusion_rate: dict      # degree -> float

    def to_json_dict(self) -> dict:
        return {
            "summaries": {
                str(d): {
                    "n_trials": s.n_trials,
                    "mean": s.mean,
                    "std_error": s.std_error,
                    "ci95": list(s.ci95),
                    "excluded": s.excluded,
                }
                for d, s in self.summaries.items()
            },
            "exclusion_rate": {str(d): r for d, r in self.exclusion_rate.items()},
        }


def run_components_experiment(cfg: ExperimentConfig, workers: int = 1) -> ComponentsExperimentResult:
    """Estimates E b0 / n per degree (components of the curve over degree)."""
    records = _run_trials(cfg, workers)
    _check_exclusions(cfg, records)
    summaries = {}
    rates = {}
    for d in cfg.degrees:
        kept = [r.b0 / d for r in records if r.degree == d and not r.excluded]
        excl = sum(1 for r in records if r.degree == d and r.excluded)
        summaries[d] = summarize(kept, excluded=excl)
        rates[d] = excl / cfg.trials_per_degree
    result = ComponentsExperimentResult(records=records, summaries=summaries,
                                        exclusion_rate=rates)
    if cfg.output_path:
        persist(cfg, records, result.to_json_dict())
    return result


@dataclass
class GiantExperimentResult:
    records: list
    frequency: dict           # degree -> float (true / decided-or-not? see doc)
    wilson: dict              # degree -> (lo, hi)
    indeterminate: dict       # degree -> int

    def to_json_dict(self) -> dict:
        return {
            "frequency": {str(d): f for d, f in self.frequency.items()},
            "wilson": {str(d): list(w) for d, w in self.wilson.items()},
            "indeterminate": {str(d): i for d, i in self.indeterminate.items()},
        }


def run_giant_experiment(cfg: ExperimentConfig, r: float, workers: int = 1) -> GiantExperimentResult:
    """Frequency of the certified event sup_{|z|=r} |p| < 1 per degree.

    Indeterminate outcomes are reported separately and never counted as
    true; the frequency denominator is the full trial count.
    """
    if not (0.0 < r < 1.0):
        raise ValueError(f"r must lie in (0, 1), got {r!r}")
    cfg2 = ExperimentConfig(
        ensemble=cfg.ensemble, degrees=cfg.degrees,
        trials_per_degree=cfg.trials_per_degree, master_seed=cfg.master_seed,
        grid=cfg.grid, giant_radius=r, certificate_params=cfg.certificate_params,
        output_path=cfg.output_path,
    )
    records = _run_trials(cfg2, workers, mode="giant-only")
    freq = {}
    wils = {}
    indet = {}
    for d in cfg2.degrees:
        recs = [rec for rec in records if rec.degree == d]
        hits = sum(1 for rec in recs if rec.giant is GiantOutcome.TRUE)
        freq[d] = hits / len(recs)
        wils[d] = wilson_interval(hits, len(recs))
        indet[d] = sum(1 for rec in recs if rec.giant is GiantOutcome.INDETERMINATE)
    result = GiantExperimentResult(records=records, frequency=freq, wilson=wils,
                                   indeterminate=indet)
    if cfg2.output_path:
        persist(cfg2, records, result.to_json_dict())
    return result


@dataclass
class TailExperimentResult:
    records: list
    frequency: dict           # (degree, threshold) -> empirical P(len >= L)
    markov_bound: dict        # (degree, threshold) -> E len / L

    def to_json_dict(self) -> dict:
        return {
            "frequency": {f"{d}:{L}": f for (d, L), f in self.frequency.items()},
            "markov_bound": {f"{d}:{L}": b for (d, L), b in self.markov_bound.items()},
        }


def outlier_tail_estimate(cfg: ExperimentConfig, thresholds, workers: int = 1,
                          quadrature: QuadratureConfig | None = None) -> TailExperimentResult:
    """Empirical tail P(|length| >= L) per degree with the Markov bound."""
    thresholds = [float(t) for t in thresholds]
    if any(t <= 0 for t in thresholds):
        raise ValueError("thresholds must be positive")
    records = _run_trials(cfg, workers)
    _check_exclusions(cfg, records)
    freq = {}
    markov = {}
    for d in cfg.degrees:
        kept = np.array([r.total_length for r in records if r.degree == d and not r.excluded])
        ev = expected_length(cfg.spec_for(d), quadrature).value
        for L in thresholds:
            freq[(d, L)] = float((kept >= L).mean()) if kept.size else math.nan
            markov[(d, L)] = ev / L
    result = TailExperimentResult(records=records, frequency=freq, markov_bound=markov)
    if cfg.output_path:
        persist(cfg, records, result.to_json_dict())
    return result


# ---------------------------------------------------------------------------
# persistence

CSV_HEADER = (
    "degree,trial_index,seed,total_length,b0,unresolved,excluded,"
    "giant,giant_component_length,certificate_hits"
)
# wall_time_ms is deliberately not persisted: it is the one record field
# that is not a pure function of the experiment config.


def record_csv_row(r: TrialRecord) -> str:
    giant = "" if r.giant is None else r.giant.value
    glen = "" if r.giant_component_length is None else repr(r.giant_component_length)
    hits = "" if r.certificate_hits is None else str(r.certificate_hits)
    return (
        f"{r.degree},{r.trial_index},{r.seed},{repr(r.total_length)},{r.b0},"
        f"{r.unresolved},{int(r.excluded)},{giant},{glen},{hits}"
    )


def persist(cfg: ExperimentConfig, records: list, summary_dict: dict):
    """Write <out>/<ensemble>_<degree>.csv per degree plus summary.json."""
    out = cfg.output_path
    os.makedirs(out, exist_ok=True)
    for d in cfg.degrees:
        path = os.path.join(out, f"{cfg.ensemble.kind}_{d}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in records:
                if r.degree == d:
                    fh.write(record_csv_row(r) + "\n")
    summary = {"config": cfg.to_json_dict(), "results": summary_dict}
    with open(os.path.join(out, "summary.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
