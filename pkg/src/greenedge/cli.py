"""Command-line front end.

Four verbs: `simulate` runs one control law and writes a per-slot report,
`compare` runs the configured law against a baseline on identical traces,
`sweep` repeats the comparison across cluster sizes, `forecast-eval` scores
the configured predictor on held-out data. Exit codes: 0 on success, 2 when
a scenario is infeasible, 3 for configuration or usage problems.
"""

from __future__ import annotations

import argparse
import sys

from . import harness
from .config import ConfigError, config_from_overrides, load_config
from .controller import InfeasibleScenario


def _split_overrides(items: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def _build_config(args) -> harness.ScenarioConfig:
    overrides = _split_overrides(args.set or [])
    if args.config:
        return load_config(args.config, overrides)
    return config_from_overrides(overrides)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override one configuration key (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenedge",
        description="Energy-aware edge cluster simulator and controllers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one control law over a scenario")
    _add_common(sim)
    sim.add_argument("--out", default="run_report.csv", help="report destination")
    sim.add_argument("--format", choices=("csv", "text"), default="csv")
    sim.add_argument("--ledger", help="also write the per-site energy ledger CSV here")

    cmp_p = sub.add_parser("compare", help="configured law vs a baseline on identical traces")
    _add_common(cmp_p)
    cmp_p.add_argument("--baseline", default="max_provision", help="baseline control law")
    cmp_p.add_argument("--out", default="comparison.csv")
    cmp_p.add_argument("--format", choices=("csv", "text"), default="csv")

    swp = sub.add_parser("sweep", help="savings vs max-provision across cluster sizes")
    _add_common(swp)
    swp.add_argument(
        "--sizes",
        default="5,10,15,20,25,30,35,40,45,50",
        help="comma-separated station counts",
    )
    swp.add_argument("--out", default="sweep.csv")

    fev = sub.add_parser("forecast-eval", help="held-out accuracy of the configured predictor")
    _add_common(fev)
    fev.add_argument(
        "--kind",
        action="append",
        choices=("traffic", "solar", "wind"),
        help="series kind to score (repeatable; default: all three)",
    )
    fev.add_argument("--out", default="forecast_eval.csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _build_config(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    try:
        if args.command == "simulate":
            report = harness.run_scenario(cfg)
            harness.emit_report(report, args.out, fmt=args.format)
            if args.ledger:
                harness.export_ledger(report, args.ledger)
            total = report.totals["theta_edge"]
            print(
                f"{cfg.algorithm}: {report.slots} slots, total edge energy "
                f"{total / 1e6:.3f} MJ, {report.violations} constraint violations"
            )
            print(f"report written to {args.out}")
        elif args.command == "compare":
            result = harness.compare(cfg, baseline=args.baseline)
            harness.emit_comparison(result, args.out, fmt=args.format)
            edge = 100.0 * result.overall["edge"]
            mec = 100.0 * result.overall["mec"]
            print(
                f"{cfg.algorithm} vs {args.baseline}: edge savings {edge:.1f}%, "
                f"server savings {mec:.1f}%"
            )
            print(f"comparison written to {args.out}")
        elif args.command == "sweep":
            try:
                sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
            except ValueError:
                print(f"error: --sizes expects integers, got {args.sizes!r}", file=sys.stderr)
                return 3
            rows = harness.sweep_bs_group(cfg, sizes)
            harness.emit_sweep(rows, args.out)
            for row in rows:
                print(f"n_bs={row['n_bs']:3d}  edge savings {100.0 * row['edge_savings']:.1f}%")
            print(f"sweep written to {args.out}")
        elif args.command == "forecast-eval":
            kinds = tuple(args.kind) if args.kind else ("traffic", "solar", "wind")
            rows = harness.forecast_accuracy(cfg, kinds)
            harness.emit_forecast_eval(rows, args.out)
            for row in rows:
                label = "overall" if row["step"] == 0 else f"step {row['step']}"
                print(f"{row['kind']:8s} {label:8s} rmse {row['rmse']:.4f}")
            print(f"evaluation written to {args.out}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InfeasibleScenario as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
