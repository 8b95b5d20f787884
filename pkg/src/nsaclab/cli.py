"""Command line entry point: ``nsaclab <subcommand> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, FitError
from .experiments import CATALOG, ExperimentConfig, run_batch, verify_manifest

USAGE_ERROR = 2

SUBCOMMAND_EXPERIMENTS = {
    "linear": ["linear-decay"],
    "spectrum": ["spectrum-certify", "green-diff"],
    "compare": ["difference-decay", "lp-decay"],
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="key=value configuration file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration key (repeatable)")
    p.add_argument("--out", metavar="DIR", default=None, help="output root directory")
    p.add_argument("--workers", type=int, default=1, metavar="N", help="concurrent experiments")
    p.add_argument("--seed", type=int, default=None, metavar="N", help="initial-data noise seed")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nsaclab", description="NSAC perturbation decay experiments")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run named experiments from the catalog")
    p.add_argument("experiments", nargs="+", metavar="NAME", help=f"one of: {', '.join(CATALOG)}")
    _common(p)

    for name, exps in SUBCOMMAND_EXPERIMENTS.items():
        p = sub.add_parser(name, help=f"run {' and '.join(exps)}")
        p.add_argument("--only", choices=exps, help="run a single one of these experiments")
        _common(p)

    p = sub.add_parser("fit", help="fit a decay law to a series CSV file")
    p.add_argument("series", metavar="CSV")
    p.add_argument("--mode", choices=["algebraic", "exponential"], default="algebraic")
    p.add_argument("--window", nargs=2, type=float, metavar=("T0", "T1"))
    p.add_argument("--target", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--one-sided", type=float, dest="one_sided")

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--only", metavar="LIST", help="comma separated criterion numbers, e.g. 1,2,3")
    p.add_argument("--json", metavar="PATH", help="write results as JSON")

    p = sub.add_parser("verify-manifest", help="check the checksums listed in a run manifest")
    p.add_argument("manifest", metavar="PATH")
    return ap


def _configs(args, names):
    configs = []
    for name in names:
        if name not in CATALOG:
            raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(CATALOG)}")
        configs.append(ExperimentConfig.build(args.config, args.overrides, experiment=name, seed=args.seed))
    return configs


def _run(args, names) -> int:
    configs = _configs(args, names)
    root = Path(args.out) if args.out else Path(configs[0].out)
    manifests = run_batch(configs, root, max(1, args.workers))
    for cfg, m in zip(configs, manifests):
        print(f"{cfg.experiment}: {m.status}")
        for r in m.reports:
            mark = "PASS" if r["ok"] else "FAIL"
            print(f"  [{mark}] {r['channel']} {r['kind']} l={r['order']}: fit {r['fit']:.4f} (target {r['target']})")
        for c in m.checks:
            print(f"  [{'PASS' if c['ok'] else 'FAIL'}] {c['name']}")
        for d in m.diagnostics:
            print(f"  {d}")
    return 0 if all(m.passed for m in manifests) else 1


def _fit(args) -> int:
    from .decay import NormSeries, fit_rate
    from .io import read_series_csv

    t, v, kind, order = read_series_csv(args.series)
    rep = fit_rate(NormSeries(t, v, kind, order, Path(args.series).stem), args.mode,
                   tuple(args.window) if args.window else None, args.target, args.tol, args.one_sided)
    print(json.dumps(rep.to_dict(), indent=2))
    return 0 if rep.ok else 1


def _verify(args) -> int:
    from .acceptance import run_all

    only = None
    if args.only:
        try:
            only = [int(x) for x in args.only.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"bad criterion list {args.only!r}") from None
    results = run_all(only, echo=True)
    if args.json:
        Path(args.json).write_text(json.dumps([r.to_dict() for r in results], indent=2) + "\n")
    return 0 if all(r.passed for r in results) else 1


def _verify_manifest(args) -> int:
    problems = verify_manifest(args.manifest)
    for p in problems:
        print(p)
    print("manifest ok" if not problems else f"{len(problems)} problem(s)")
    return 0 if not problems else 1


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            return _run(args, args.experiments)
        if args.command in SUBCOMMAND_EXPERIMENTS:
            return _run(args, [args.only] if args.only else SUBCOMMAND_EXPERIMENTS[args.command])
        if args.command == "fit":
            return _fit(args)
        if args.command == "verify":
            return _verify(args)
        return _verify_manifest(args)
    except ConfigError as exc:
        print(f"nsaclab: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (FitError, FileNotFoundError) as exc:
        print(f"nsaclab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
