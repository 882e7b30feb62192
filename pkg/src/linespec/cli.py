"""Command-line interface: generate, estimate, bound, experiment, slope."""

from __future__ import annotations

import argparse
import csv
import json
import sys

from .bounds import (
    resolution_snapshot_threshold,
    population_ingredients,
    scenario_md_bound,
    scenario_md_scaling_bound,
    scenario_subspace_bound,
)
from .estimators import estimate
from .exceptions import LinespecError
from .harness import (
    fit_loglog_slope,
    preset,
    read_data_file,
    run_experiment,
    spec_from_json,
    write_data_file,
)
from .metrics import matched_distance, min_separation
from .model import generate_snapshots, scenario_from_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linespec",
        description="Line-spectral estimation: ESPRIT/MUSIC with spatial smoothing, "
                    "finite-sample error bounds, and Monte Carlo experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="draw synthetic snapshots from a scenario JSON")
    g.add_argument("--scenario", required=True, help="path to a scenario JSON document")
    g.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    g.add_argument("--out", required=True, help="output data file (JSON with base64 payload)")

    e = sub.add_parser("estimate", help="recover frequencies from a data file")
    e.add_argument("--data", required=True, help="data file produced by 'generate'")
    e.add_argument("--method", choices=["esprit", "music"], default="esprit")
    e.add_argument("--smoothing", choices=["none", "foss", "fbss"], default="none")
    e.add_argument("--subarray", type=int, default=None, metavar="M",
                   help="subarray length for smoothing (default: from the scenario)")
    e.add_argument("--grid", type=int, default=8192, metavar="G",
                   help="MUSIC spectrum grid size")
    e.add_argument("--out", default=None, help="output JSON path (default: stdout)")

    b = sub.add_parser("bound", help="evaluate a theoretical error bound for a scenario")
    b.add_argument("--scenario", required=True,
                   help="scenario JSON (a data file also works; its header is used)")
    b.add_argument("--which", choices=["subspace", "md", "md-scaling", "resolution"],
                   default="md-scaling")
    b.add_argument("--smoothing", choices=["none", "foss", "fbss"], default="none")
    b.add_argument("--separation", type=float, default=None,
                   help="target separation for --which resolution "
                        "(default: the scenario's minimum separation)")
    b.add_argument("--out", default=None, help="output JSON path (default: stdout)")

    x = sub.add_parser("experiment", help="run a Monte Carlo sweep and write a CSV")
    x.add_argument("--preset", choices=["exp1", "exp2", "exp3", "exp4"], default=None)
    x.add_argument("--spec", default=None, help="experiment spec JSON (alternative to --preset)")
    x.add_argument("--trials", type=int, default=None, metavar="T")
    x.add_argument("--seed", type=int, default=None, metavar="S")
    x.add_argument("--workers", type=int, default=1)
    x.add_argument("--out", required=True, help="output CSV path")

    s = sub.add_parser("slope", help="log-log slope of one CSV column against another")
    s.add_argument("--csv", required=True)
    s.add_argument("--x", default="sweep_value")
    s.add_argument("--y", default="mean_md")
    s.add_argument("--method", default=None, help="filter rows by method")
    s.add_argument("--smoothing", default=None, help="filter rows by smoothing")
    return parser


def _emit(doc: dict, out_path: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_generate(args) -> int:
    with open(args.scenario) as fh:
        cfg = scenario_from_json(json.load(fh))
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    snap = generate_snapshots(cfg)
    write_data_file(args.out, cfg, snap)
    print(f"wrote {cfg.n_sensors}x{cfg.snapshots} snapshots to {args.out}")
    return 0


def _cmd_estimate(args) -> int:
    cfg, snap = read_data_file(args.data)
    m = args.subarray
    if args.smoothing != "none" and m is None:
        m = cfg.subarray_m
    res = estimate(snap, args.method, args.smoothing, m=m,
                   k=cfg.n_sources, grid_size=args.grid)
    report = matched_distance(res.freqs, cfg.freqs)
    _emit({
        "freqs": [float(f) for f in res.freqs],
        "doas_deg": [float(d) for d in res.doas_deg],
        "method": res.method,
        "raw_eigs": [[float(z.real), float(z.imag)] for z in res.raw_eigs],
        "diagnostics": res.diagnostics,
        "matched_distance": report.md,
        "scenario_seed": cfg.seed,
    }, args.out)
    return 0


def _cmd_bound(args) -> int:
    with open(args.scenario) as fh:
        cfg = scenario_from_json(json.load(fh))
    variant = "plain" if args.smoothing == "none" else args.smoothing
    if args.which == "md-scaling":
        doc = scenario_md_scaling_bound(cfg, variant).to_json()
    elif args.which == "subspace":
        # empirical route: the trial is regenerated deterministically from the seed
        doc = scenario_subspace_bound(cfg, generate_snapshots(cfg), variant).to_json()
    elif args.which == "md":
        doc = scenario_md_bound(cfg, generate_snapshots(cfg), variant).to_json()
    else:
        sep = args.separation if args.separation is not None else min_separation(cfg.freqs)
        ing = population_ingredients(cfg, variant)
        threshold = resolution_snapshot_threshold(
            variant,
            a_norm=ing["a_norm"], a_sigma_k=ing["a_sigma_k"],
            sigma_norm=ing["sigma_norm"], lambda_k=ing["lambda_k"],
            rank_sigma=ing["rank_sigma"], k=ing["k"], dim=ing["dim"],
            separation=sep, noise_sigma=ing["noise_sigma"],
        )
        doc = {"kind": "resolution_threshold", "variant": variant,
               "separation": sep, "snapshot_threshold": threshold}
    doc["scenario_seed"] = cfg.seed
    _emit(doc, args.out)
    return 0


def _cmd_experiment(args) -> int:
    if (args.preset is None) == (args.spec is None):
        raise LinespecError("provide exactly one of --preset or --spec")
    if args.preset is not None:
        spec = preset(args.preset,
                      trials=args.trials if args.trials is not None else 200,
                      seed=args.seed)
    else:
        with open(args.spec) as fh:
            spec = spec_from_json(json.load(fh))
        from dataclasses import replace
        if args.trials is not None:
            spec = replace(spec, trials=args.trials)
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
    result = run_experiment(spec, workers=args.workers)
    result.write_csv(args.out)
    print(f"wrote {len(result.rows)} rows ({spec.trials} trials/point) to {args.out}")
    return 0


def _cmd_slope(args) -> int:
    xs, ys = [], []
    with open(args.csv, newline="") as fh:
        for row in csv.DictReader(fh):
            if args.method and row["method"] != args.method:
                continue
            if args.smoothing and row["smoothing"] != args.smoothing:
                continue
            xs.append(float(row[args.x]))
            ys.append(float(row[args.y]))
    fit = fit_loglog_slope(xs, ys)
    print(json.dumps({"slope": fit.slope, "intercept": fit.intercept,
                      "r_squared": fit.r_squared}))
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "estimate": _cmd_estimate,
    "bound": _cmd_bound,
    "experiment": _cmd_experiment,
    "slope": _cmd_slope,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except LinespecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
