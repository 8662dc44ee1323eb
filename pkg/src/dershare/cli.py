"""Command line front end: run, validate, report."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .harness import ConfigError, RoundRecords, load_config, run, satisfaction_report, violation_total

ALGO_FLAGS = {
    "drs": "drs",
    "drs-adj": "drs-adj",
    "mansdrs": "mansdrs",
    "mansdrs-adj": "mansdrs-adj",
    "bansap": "bansap",
}


def _add_run(sub):
    p = sub.add_parser("run", help="simulate a configured workload")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--algo", choices=sorted(ALGO_FLAGS), help="override algorithm")
    p.add_argument("--horizon", type=int, help="override horizon T")
    p.add_argument("--seed", type=int, help="override master seed")
    p.add_argument("--with-oracle", action="store_true", help="also compute regret/path-length oracles (slow at large T)")
    p.add_argument("--out", help="directory for records.csv and summary.json")


def _add_validate(sub):
    p = sub.add_parser("validate", help="check a configuration file")
    p.add_argument("--config", required=True)


def _add_report(sub):
    p = sub.add_parser("report", help="summarize a records CSV")
    p.add_argument("--records", required=True)
    p.add_argument("--window", type=int, default=0, help="satisfaction window (default: last 10%% of rounds)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dershare", description="Distributed energy-sharing bandit simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run(sub)
    _add_validate(sub)
    _add_report(sub)
    args = parser.parse_args(argv)

    if args.command == "validate":
        try:
            load_config(args.config)
        except ConfigError as exc:
            print("invalid configuration:", file=sys.stderr)
            print(str(exc), file=sys.stderr)
            return 1
        print("configuration OK")
        return 0

    if args.command == "run":
        overrides = {}
        if args.algo:
            overrides["algorithm"] = ALGO_FLAGS[args.algo]
        if args.horizon is not None:
            overrides["horizon"] = args.horizon
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.with_oracle:
            overrides["with_oracle"] = True
        if args.out:
            overrides["output_dir"] = args.out
        try:
            config = load_config(args.config, **overrides)
        except ConfigError as exc:
            print("invalid configuration:", file=sys.stderr)
            print(str(exc), file=sys.stderr)
            return 1
        result = run(config)
        if config.output_dir is not None:
            from .harness import write_outputs

            paths = write_outputs(result, config.output_dir)
            print(f"wrote {paths['records']} and {paths['summary']}")
        summary = dict(result.summary)
        print(json.dumps(summary, indent=2))
        return 0

    if args.command == "report":
        try:
            records = RoundRecords.from_csv(args.records)
        except ValueError as exc:
            print(f"could not read records: {exc}", file=sys.stderr)
            return 1
        window = args.window or max(1, records.horizon // 10)
        sat = satisfaction_report(records, min(window, records.horizon))
        report = {
            "horizon": records.horizon,
            "node_count": records.node_count,
            "cumulative_loss": records.loss.sum(axis=0).tolist(),
            "mean_cumulative_loss": float(records.loss.sum(axis=0).mean()),
            "violation_total": violation_total(records).tolist(),
            "satisfaction_ratio": np.asarray(sat["ratio"]).tolist(),
            "no_sharing_ratio": np.asarray(sat["no_sharing_ratio"]).tolist(),
            "window": sat["window"],
        }
        print(json.dumps(report, indent=2))
        return 0

    return 2  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
