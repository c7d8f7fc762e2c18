"""Command-line interface.

Subcommands: generate, sample, estimate, experiment, metrics.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure. INDEG_JOBS overrides --jobs for the experiment runner.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DataError, NumericalError
from .generate import Family, GeneratorConfig, generate
from .graph import DegreeCounts, load_edge_list, save_edge_list, in_degree_counts
from .invert import (PenaltyConfig, build_ps, invert_naive, invert_penalized,
                     select_lambda_sure)
from .metrics import log_mse, tv_distance
from .sample import (SamplePlan, Scheme, jump_weight_from_rate, sample,
                     sample_in_degree_counts, edge_budget_from_vertex_budget)
from .tail import asym_estimate, fit_power_law, line_estimate
from .experiment import ExperimentConfig, matrix_scheme_for, run_experiment

_SCHEMES = [s.value for s in Scheme]


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not np.isfinite(x)):
        return ""
    return format(float(x), ".17g")


def _write_counts_csv(path: Path, counts: DegreeCounts, column: str = "count") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j_prime", column])
        for j, value in enumerate(counts.values):
            writer.writerow([j, _fmt(value)])


def _read_counts_csv(path) -> DegreeCounts:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read counts {path!r}: {exc}") from exc
    if not rows or len(rows) < 2:
        raise DataError(f"{path}: empty counts file")
    body = rows[1:] if not rows[0][0].lstrip("-").isdigit() else rows
    values = {}
    for row in body:
        if len(row) < 2:
            raise DataError(f"{path}: malformed row {row!r}")
        try:
            values[int(row[0])] = float(row[1]) if row[1] != "" else 0.0
        except ValueError as exc:
            raise DataError(f"{path}: malformed row {row!r}") from exc
    length = max(values) + 1
    out = np.zeros(length)
    for j, v in values.items():
        if j < 0:
            raise DataError(f"{path}: negative degree index {j}")
        out[j] = v
    return DegreeCounts(out)


def _cmd_generate(args) -> int:
    cfg = GeneratorConfig(
        target_vertices=args.vertices,
        expected_edges=args.edges,
        family=Family(args.family.replace("-", "_")),
        in_tail_index=args.alpha_in,
        out_tail_index=args.alpha_out,
        seed=args.seed,
    )
    g = generate(cfg)
    save_edge_list(g, args.output)
    counts = in_degree_counts(g)
    sidecar = {
        "vertices": g.vertex_count,
        "edges": g.edge_count,
        "max_in_degree": counts.max_index,
        "family": cfg.family.value,
        "seed": cfg.seed,
        # alpha is the survival tail index; per-degree counts decay with
        # exponent alpha + 1
        "alpha_in_configured": cfg.in_tail_index,
        "alpha_out_configured": cfg.out_tail_index,
    }
    try:
        sidecar["alpha_in_fitted"] = fit_power_law(counts).alpha
    except NumericalError:
        sidecar["alpha_in_fitted"] = None
    with open(str(args.output) + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.output} (N_v={g.vertex_count}, N_e={g.edge_count})")
    return 0


def _cmd_sample(args) -> int:
    g = load_edge_list(args.graph)
    scheme = Scheme(args.scheme)
    n_v = int(round(args.p * g.vertex_count))
    n_v = min(max(n_v, 1), g.vertex_count)
    budget = (n_v if scheme.samples_vertices
              else edge_budget_from_vertex_budget(n_v, g))
    w = jump_weight_from_rate(g, scheme, args.jump_rate) if scheme.is_walk else 0.0
    plan = SamplePlan(
        scheme=scheme,
        vertex_budget=budget if scheme.samples_vertices else None,
        edge_budget=None if scheme.samples_vertices else budget,
        with_replacement=(args.replacement == "wr"),
        jump_weight=w,
        burn_in=args.burn_in,
        seed=args.seed,
    )
    record = sample(g.without_in_index(), plan)
    counts = sample_in_degree_counts(g, record)
    prefix = Path(args.output_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    _write_counts_csv(Path(str(prefix) + "_counts.csv"), counts)
    doc = {
        "scheme": scheme.value,
        "with_replacement": plan.with_replacement,
        "budget": budget,
        "population": g.vertex_count if scheme.samples_vertices else g.edge_count,
        "n_vertices": g.vertex_count,
        "n_edges": g.edge_count,
        "effective_p": record.effective_p,
        "jump_weight": w,
        "jump_count": record.jump_count,
        "burn_in": plan.burn_in,
        "seed": plan.seed,
        "sampled_objects": np.asarray(record.sampled_objects).tolist(),
        "retained_edges": np.asarray(record.retained_edges).tolist(),
    }
    with open(str(prefix) + "_record.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
    print(f"wrote {prefix}_record.json and {prefix}_counts.csv "
          f"(budget={budget}, p={record.effective_p:.4f})")
    return 0


def _cmd_estimate(args) -> int:
    counts = _read_counts_csv(args.counts)
    n_vertices = args.n_vertices if args.n_vertices else int(round(counts.total()))
    scheme = Scheme(args.scheme)
    mscheme = matrix_scheme_for(scheme, args.replacement == "wr")
    observed_max = int(np.flatnonzero(counts.values > 0).max())
    P = build_ps(mscheme, args.population, args.budget, observed_max)
    d_rows = DegreeCounts(counts.padded(P.entries.shape[0]))
    pen_cfg = PenaltyConfig(sure_perturbations=args.sure_probes, sure_seed=args.seed)

    report: dict = {"population": args.population, "budget": args.budget,
                    "scheme": mscheme.value, "n_vertices": n_vertices}
    if args.penalty is not None:
        lam = args.penalty
    else:
        sure = select_lambda_sure(P, d_rows, n_vertices, pen_cfg)
        lam = sure.lam
        report["sure_curve"] = [
            {"lambda": float(l), "risk": float(r), "divergence": float(dv)}
            for l, r, dv in zip(sure.grid, sure.risks, sure.divergences)
        ]
    pen = invert_penalized(P, d_rows, n_vertices,
                           dataclasses.replace(pen_cfg, lam=lam))
    report["lambda"] = lam
    report["kkt_residual"] = pen.kkt_residual

    naive_values = None
    try:
        naive = invert_naive(P, d_rows)
        naive_values = naive.counts.values
        report["log10_condition"] = naive.log10_condition
    except NumericalError as exc:
        report["naive_refused"] = str(exc)
        from .invert import log10_condition_number
        report["log10_condition"] = log10_condition_number(P.entries)

    p_eff = args.budget / args.population
    columns: dict[str, np.ndarray] = {"inv_penalized": pen.counts.values}
    if naive_values is not None:
        columns["inv_naive"] = naive_values
    if args.tail in ("asym", "both"):
        columns["asym"] = asym_estimate(counts, p_eff, epsilon=args.epsilon).values
    if args.tail in ("line", "both"):
        est = line_estimate(counts, p_eff, mscheme, args.population, args.budget,
                            alpha=args.alpha, epsilon=args.epsilon)
        columns["line"] = est.values
        report["alpha"] = est.alpha

    prefix = Path(args.output_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    length = max(len(v) for v in columns.values())
    header = ["j", "inv_naive", "inv_penalized"]
    if args.tail in ("asym", "both"):
        header.append("asym")
    if args.tail in ("line", "both"):
        header.append("line")
    with open(str(prefix) + "_estimates.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for j in range(length):
            row = [str(j)]
            for name in header[1:]:
                vec = columns.get(name)
                row.append(_fmt(vec[j]) if vec is not None and j < len(vec) else "")
            writer.writerow(row)
    with open(str(prefix) + "_report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {prefix}_estimates.csv and {prefix}_report.json (lambda={lam:.4g})")
    return 0


def _cmd_experiment(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read config {args.config!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {args.config!r} is not valid JSON: {exc}") from exc
    cfg = ExperimentConfig.from_dict(payload)
    if args.jobs is not None:
        cfg = dataclasses.replace(cfg, jobs=args.jobs)
    if args.output_dir is not None:
        cfg = dataclasses.replace(cfg, output_dir=args.output_dir)
    report = run_experiment(cfg)
    for key, value in sorted(report.averaged_metrics.items()):
        print(f"{key}: {value:.6g}")
    if cfg.output_dir:
        print(f"wrote report to {cfg.output_dir}")
    return 0


def _cmd_metrics(args) -> int:
    a = _read_counts_csv(args.true)
    b = _read_counts_csv(args.estimate)
    out = {"tv_distance": tv_distance(a, b)}
    ta = a.padded(max(len(a.values), len(b.values)))
    tb = DegreeCounts(b.values).padded(len(ta))
    both = np.flatnonzero((ta > 0) & (tb > 0))
    if both.size:
        out["log_mse"] = log_mse(ta, tb, support=both)
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="indeg",
        description="Estimate the in-degree distribution of a directed network from samples.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic directed graph")
    g.add_argument("--family", choices=["power-law", "exponential-in"], default="power-law")
    g.add_argument("--vertices", type=int, required=True)
    g.add_argument("--edges", type=int, required=True)
    g.add_argument("--alpha-in", type=float, default=1.5)
    g.add_argument("--alpha-out", type=float, default=1.5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", required=True)
    g.set_defaults(func=_cmd_generate)

    s = sub.add_parser("sample", help="sample a graph and write the record and counts")
    s.add_argument("--graph", required=True)
    s.add_argument("--scheme", choices=_SCHEMES, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--replacement", choices=["wr", "nr"], default="wr")
    s.add_argument("--jump-rate", type=float, default=0.0)
    s.add_argument("--burn-in", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output-prefix", required=True)
    s.set_defaults(func=_cmd_sample)

    e = sub.add_parser("estimate", help="estimate counts from a sample-count CSV")
    e.add_argument("--counts", required=True)
    e.add_argument("--scheme", choices=_SCHEMES, required=True)
    e.add_argument("--replacement", choices=["wr", "nr"], default="wr")
    e.add_argument("--population", type=int, required=True,
                   help="N_v for vertex schemes, N_e for edge schemes")
    e.add_argument("--budget", type=int, required=True)
    e.add_argument("--n-vertices", type=int, default=None,
                   help="override the vertex total (defaults to the counts' sum)")
    e.add_argument("--penalty", type=float, default=None,
                   help="fixed penalty weight (skips the risk search)")
    e.add_argument("--sure-probes", type=int, default=20)
    e.add_argument("--tail", choices=["asym", "line", "both", "none"], default="both")
    e.add_argument("--alpha", type=float, default=None)
    e.add_argument("--epsilon", type=float, default=0.1)
    e.add_argument("--normalize", action="store_true")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--output-prefix", required=True)
    e.set_defaults(func=_cmd_estimate)

    x = sub.add_parser("experiment", help="run a config-driven replicated experiment")
    x.add_argument("--config", required=True)
    x.add_argument("--jobs", type=int, default=None)
    x.add_argument("--output-dir", default=None)
    x.set_defaults(func=_cmd_experiment)

    m = sub.add_parser("metrics", help="compare two count CSVs")
    m.add_argument("--true", required=True)
    m.add_argument("--estimate", required=True)
    m.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError,) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
