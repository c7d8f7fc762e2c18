"""Config-driven experiment pipeline with seeded replication.

One replicate: obtain a graph (loaded or generated), restrict to the
largest weakly connected component, sample it, estimate the in-degree
counts by penalized inversion (penalty picked by unbiased-risk search)
plus the requested tail methods, and score everything against the ground
truth. Replicates use seeds base_seed + r and can run in parallel
processes; outputs are deterministic for a fixed config.

CSV schema (one file per replicate plus an averaged one): columns
j, true, sample, inv_naive, inv_penalized, asym, line. Estimates that do
not exist at some j (refused naive inversion, degrees outside a tail
segment) are empty cells, never zeros.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__ as _version
from .errors import ConfigError, NumericalError
from .generate import Family, GeneratorConfig, generate
from .graph import DegreeCounts, DirectedGraph, in_degree_counts, largest_component, load_edge_list
from .invert import (MatrixScheme, PenaltyConfig, build_ps, invert_naive,
                     invert_penalized, select_lambda_sure)
from .metrics import log_mse, tv_distance
from .sample import (SamplePlan, Scheme, edge_budget_from_vertex_budget,
                     jump_weight_from_rate, sample, sample_in_degree_counts)
from .tail import asym_estimate, default_crossover, fit_power_law, line_estimate, stitch

__all__ = ["ExperimentConfig", "ReplicateResult", "ExperimentReport", "run_experiment",
           "run_replicate", "matrix_scheme_for", "CSV_COLUMNS"]

CSV_COLUMNS = ("j", "true", "sample", "inv_naive", "inv_penalized", "asym", "line")


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    scheme: Scheme
    p: float
    input_path: str | None = None
    generator: GeneratorConfig | None = None
    with_replacement: bool = True
    jump_rate: float = 0.0
    burn_in: int = 0
    replicates: int = 1
    tail_methods: tuple[str, ...] = ("asym", "line")
    # power-law exponent fed to the LINE method: fitted per replicate from
    # the sample counts ("sample", the only choice on live data) or from the
    # true counts ("true", the synthetic-study convention); alpha_override
    # pins an explicit value and wins over alpha_source.
    alpha_source: str = "sample"
    alpha_override: float | None = None
    epsilon: float = 0.1
    normalize_stitched: bool = False
    metrics: tuple[str, ...] = ("tv_distance", "log_mse", "alpha_error")
    output_dir: str | None = None
    base_seed: int = 0
    jobs: int = 1
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    run_naive: bool = True

    def validate(self) -> None:
        if (self.input_path is None) == (self.generator is None):
            raise ConfigError("exactly one of input_path or generator must be set")
        if not 0 < self.p <= 1:
            raise ConfigError("p must lie in (0, 1]")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if not 0 <= self.jump_rate < 1:
            raise ConfigError("jump_rate must lie in [0, 1)")
        unknown = set(self.tail_methods) - {"asym", "line"}
        if unknown:
            raise ConfigError(f"unknown tail methods: {sorted(unknown)}")
        if self.alpha_source not in ("sample", "true"):
            raise ConfigError("alpha_source must be 'sample' or 'true'")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["scheme"] = self.scheme.value
        if self.generator is not None:
            out["generator"]["family"] = self.generator.family.value
        pen = out["penalty"]
        if pen.get("lambda_grid") is not None:
            pen["lambda_grid"] = [float(x) for x in pen["lambda_grid"]]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        try:
            data["scheme"] = Scheme(data["scheme"])
            if data.get("generator"):
                gen = dict(data["generator"])
                gen["family"] = Family(gen["family"])
                data["generator"] = GeneratorConfig(**gen)
            if data.get("penalty"):
                pen = dict(data["penalty"])
                if pen.get("lambda_grid") is not None:
                    pen["lambda_grid"] = np.asarray(pen["lambda_grid"], dtype=float)
                data["penalty"] = PenaltyConfig(**pen)
            for key in ("tail_methods", "metrics"):
                if key in data and data[key] is not None:
                    data[key] = tuple(data[key])
            return cls(**data)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc


def matrix_scheme_for(scheme: Scheme, with_replacement: bool) -> MatrixScheme:
    """Sampling-matrix family matching a sampling scheme. The walks sample
    with replacement in their stationary regimes."""
    if scheme is Scheme.RVS:
        return MatrixScheme.RVS_WR if with_replacement else MatrixScheme.RVS_NR
    if scheme is Scheme.RES:
        return MatrixScheme.RES_WR if with_replacement else MatrixScheme.RES_NR
    if scheme is Scheme.RWS1:
        return MatrixScheme.RVS_WR
    return MatrixScheme.RES_WR


@dataclass
class ReplicateResult:
    index: int
    seed: int
    n_vertices: int
    n_edges: int
    budget: int
    jump_weight: float
    lam: float
    log10_condition: float | None
    kkt_residual: float
    crossover: dict
    vectors: dict  # name -> np.ndarray (NaN = no estimate)
    metrics: dict  # (estimator, metric) -> float
    alpha_fitted: float | None
    alpha_reference: float | None
    sure_risks: list | None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    replicates: list[ReplicateResult]
    averaged: dict  # name -> np.ndarray
    averaged_metrics: dict  # mean of per-replicate metrics
    metrics_of_averaged: dict  # metrics recomputed on the averaged vectors
    provenance: dict


def _obtain_graph(cfg: ExperimentConfig, seed: int) -> DirectedGraph:
    if cfg.input_path is not None:
        g = load_edge_list(cfg.input_path)
    else:
        g = generate(dataclasses.replace(cfg.generator, seed=seed))
    return largest_component(g)


def _population_and_budget(cfg: ExperimentConfig, g: DirectedGraph) -> tuple[int, int]:
    n_v = int(round(cfg.p * g.vertex_count))
    n_v = min(max(n_v, 1), g.vertex_count)
    if cfg.scheme in (Scheme.RVS, Scheme.RWS1):
        return g.vertex_count, n_v
    return g.edge_count, edge_budget_from_vertex_budget(n_v, g)


def run_replicate(cfg: ExperimentConfig, index: int) -> ReplicateResult:
    cfg.validate()
    seed = cfg.base_seed + index
    g = _obtain_graph(cfg, seed)
    true_counts = in_degree_counts(g)
    population, budget = _population_and_budget(cfg, g)
    effective_p = budget / population
    w = (jump_weight_from_rate(g, cfg.scheme, cfg.jump_rate)
         if cfg.scheme.is_walk else 0.0)
    plan = SamplePlan(
        scheme=cfg.scheme,
        vertex_budget=budget if cfg.scheme.samples_vertices else None,
        edge_budget=None if cfg.scheme.samples_vertices else budget,
        with_replacement=cfg.with_replacement,
        jump_weight=w,
        burn_in=cfg.burn_in,
        seed=seed,
    )
    record = sample(g.without_in_index(), plan)
    d_s = sample_in_degree_counts(g, record)

    # inversion works on degrees up to the largest observed sample in-degree
    observed_max = int(np.flatnonzero(d_s.values > 0).max())
    mscheme = matrix_scheme_for(cfg.scheme, cfg.with_replacement)
    P = build_ps(mscheme, population, budget, observed_max)
    d_s_rows = DegreeCounts(d_s.padded(P.entries.shape[0]))

    sure = select_lambda_sure(P, d_s_rows, g.vertex_count, cfg.penalty)
    pen_cfg = dataclasses.replace(cfg.penalty, lam=sure.lam)
    pen = invert_penalized(P, d_s_rows, g.vertex_count, pen_cfg)

    naive_vec = None
    log10_kappa = None
    if cfg.run_naive:
        try:
            naive = invert_naive(P, d_s_rows)
            naive_vec = naive.counts.values
            log10_kappa = naive.log10_condition
        except NumericalError:
            naive_vec = None

    vectors: dict[str, np.ndarray] = {
        "true": true_counts.values,
        "sample": d_s.values,
        "inv_penalized": pen.counts.values,
    }
    if naive_vec is not None:
        vectors["inv_naive"] = naive_vec

    alpha_fitted = None
    alpha_reference = None
    crossovers: dict[str, int] = {}
    tails = {}
    if cfg.tail_methods:
        if "asym" in cfg.tail_methods:
            tails["asym"] = asym_estimate(d_s, effective_p, epsilon=cfg.epsilon)
        if "line" in cfg.tail_methods:
            alpha_in = cfg.alpha_override
            if alpha_in is None and cfg.alpha_source == "true":
                alpha_in = fit_power_law(true_counts).alpha
            tails["line"] = line_estimate(
                d_s, effective_p, mscheme, population, budget,
                alpha=alpha_in, epsilon=cfg.epsilon)
            alpha_fitted = tails["line"].alpha
    for name, est in tails.items():
        vectors[name] = est.values

    metrics_out: dict[str, float] = {}
    if cfg.generator is not None and cfg.generator.family is Family.POWER_LAW:
        alpha_reference = cfg.generator.in_tail_index
    else:
        try:
            alpha_reference = fit_power_law(true_counts).alpha
        except NumericalError:
            alpha_reference = None

    def score(name: str, estimate: np.ndarray) -> None:
        if "tv_distance" in cfg.metrics:
            metrics_out[f"tv_distance/{name}"] = tv_distance(true_counts, estimate)
        if "log_mse" in cfg.metrics:
            t = true_counts.padded(max(len(true_counts.values), len(estimate)))
            e = DegreeCounts(estimate).padded(len(t))
            both = np.flatnonzero((t > 0) & (e > 0))
            if both.size:
                metrics_out[f"log_mse/{name}"] = log_mse(t, e, support=both)

    score("inv_penalized", pen.counts.values)
    if naive_vec is not None and (naive_vec > 0).any():
        score("inv_naive", np.maximum(naive_vec, 0.0))
    for name, est in tails.items():
        combined = stitch(pen.counts, est, default_crossover(pen.counts, est),
                          normalize=cfg.normalize_stitched, n_vertices=g.vertex_count)
        crossovers[name] = combined.crossover
        vectors[f"combined_{name}"] = combined.counts.values
        score(f"combined_{name}", combined.counts.values)
    if "alpha_error" in cfg.metrics and alpha_fitted is not None and alpha_reference is not None:
        metrics_out["alpha_error/line"] = abs(alpha_fitted - alpha_reference)

    return ReplicateResult(
        index=index,
        seed=seed,
        n_vertices=g.vertex_count,
        n_edges=g.edge_count,
        budget=budget,
        jump_weight=w,
        lam=sure.lam,
        log10_condition=log10_kappa,
        kkt_residual=pen.kkt_residual,
        crossover=crossovers,
        vectors=vectors,
        metrics=metrics_out,
        alpha_fitted=alpha_fitted,
        alpha_reference=alpha_reference,
        sure_risks=[float(r) for r in sure.risks],
    )


def _average_vectors(results: list[ReplicateResult]) -> dict:
    names = sorted({name for r in results for name in r.vectors})
    out = {}
    for name in names:
        arrays = [r.vectors[name] for r in results if name in r.vectors]
        length = max(len(a) for a in arrays)
        stack = np.full((len(arrays), length), np.nan)
        for k, a in enumerate(arrays):
            stack[k, : len(a)] = a
            # absent trailing degrees are zero counts for full estimates,
            # but stay NaN for partial tail vectors
            if name not in ("asym", "line"):
                stack[k, len(a):] = 0.0
        with np.errstate(invalid="ignore"):
            out[name] = np.nanmean(stack, axis=0)
    return out


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    cfg.validate()
    jobs = int(os.environ.get("INDEG_JOBS", cfg.jobs))
    indices = list(range(cfg.replicates))
    results: list[ReplicateResult] = []
    try:
        if jobs > 1 and cfg.replicates > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(run_replicate, [cfg] * len(indices), indices))
        else:
            for i in indices:
                results.append(run_replicate(cfg, i))
    except Exception as exc:
        # preserve whatever replicates finished before failing
        if cfg.output_dir is not None and results:
            outdir = Path(cfg.output_dir)
            outdir.mkdir(parents=True, exist_ok=True)
            for r in results:
                _write_vector_csv(outdir / f"replicate_{r.index:04d}.csv", r.vectors)
        exc.args = (f"replicate {len(results)}: {exc}",)
        raise

    averaged = _average_vectors(results)
    metric_keys = sorted({k for r in results for k in r.metrics})
    averaged_metrics = {
        k: float(np.mean([r.metrics[k] for r in results if k in r.metrics]))
        for k in metric_keys
    }
    metrics_of_averaged = {}
    true_avg = averaged["true"]
    for name, vec in averaged.items():
        if name in ("true", "sample"):
            continue
        clean = np.nan_to_num(vec, nan=0.0)
        if clean.sum() > 0:
            metrics_of_averaged[f"tv_distance/{name}"] = tv_distance(true_avg, clean)

    provenance = {
        "config": cfg.to_dict(),
        "seeds": [r.seed for r in results],
        "resolved": [
            {
                "replicate": r.index,
                "n_vertices": r.n_vertices,
                "n_edges": r.n_edges,
                "budget": r.budget,
                "jump_weight": r.jump_weight,
                "lambda": r.lam,
                "crossover": r.crossover,
            }
            for r in results
        ],
        "rng": "numpy PCG64 (default_rng), one stream per replicate, seed = base_seed + r",
        "version": _version,
    }
    report = ExperimentReport(
        config=cfg,
        replicates=results,
        averaged=averaged,
        averaged_metrics=averaged_metrics,
        metrics_of_averaged=metrics_of_averaged,
        provenance=provenance,
    )
    if cfg.output_dir is not None:
        _write_report(report, Path(cfg.output_dir))
    return report


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not np.isfinite(x)):
        return ""
    return format(float(x), ".17g")


def _write_vector_csv(path: Path, vectors: dict) -> None:
    length = max(len(v) for v in vectors.values())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for j in range(length):
            row = [str(j)]
            for name in CSV_COLUMNS[1:]:
                vec = vectors.get(name)
                row.append(_fmt(vec[j]) if vec is not None and j < len(vec) else "")
            writer.writerow(row)


def _write_report(report: ExperimentReport, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for r in report.replicates:
        _write_vector_csv(outdir / f"replicate_{r.index:04d}.csv", r.vectors)
    _write_vector_csv(outdir / "averaged.csv", report.averaged)
    payload = {
        "provenance": report.provenance,
        "averaged_metrics": report.averaged_metrics,
        "metrics_of_averaged": report.metrics_of_averaged,
        "per_replicate_metrics": [r.metrics for r in report.replicates],
        "per_replicate_lambda": [r.lam for r in report.replicates],
        "per_replicate_kkt": [r.kkt_residual for r in report.replicates],
    }
    with open(outdir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
