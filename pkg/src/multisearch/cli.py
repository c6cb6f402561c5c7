"""Command-line entry point: ``multisearch <command> [options]``."""
from __future__ import annotations

import argparse
import inspect
import logging
import sys

from .harness import (
    SUITES,
    Report,
    SweepSpec,
    emit_csv,
    fail_rate_check,
    load_spec,
    rate_check,
    run_trials,
    verify_bounds,
)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--backend", choices=("rotation", "dense"), default="rotation")
    p.add_argument("--input", help="instance file: bit string for searches, one entry per line for vectors")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="multisearch", description="Simulated quantum search, counting and summing experiments.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("multifind", help="find all marked elements of a random (or given) bit string")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--lambda", dest="lam", type=float, help="fixed lambda (default: chosen from the estimate)")
    p.add_argument("--mode", choices=("query_optimal", "simple"), default="query_optimal")
    _common(p)

    p = sub.add_parser("approx-sum", help="multiplicative approximation of sum(v)")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--p", type=float, help="quantile (default: chosen from delta, rho and --mode)")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--mode", choices=("query_optimal", "simple"), default="simple")
    p.add_argument("--baseline", action="store_true", help="run the mean-estimation baseline instead")
    _common(p)

    p = sub.add_parser("count", help="approximate counting of marked elements")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.5, help="relative precision eps")
    _common(p)

    p = sub.add_parser("sweep", help="run a key=value sweep spec file")
    p.add_argument("spec_file")
    p.add_argument("--out", help="override the spec's output path")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--backend", choices=("rotation", "dense"))

    p = sub.add_parser("verify", help="run a bound-verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--trials", type=int, help="override the suite's trial count where it has one")
    p.add_argument("--seed", type=int, default=0)
    return ap


def _run_and_write(spec: SweepSpec) -> tuple[list, list[str]]:
    records = []
    errors: list[str] = []

    def gen():
        for r in run_trials(spec, errors):
            records.append(r)
            yield r

    if spec.out:
        emit_csv(gen(), spec.out)
    else:
        emit_csv(gen(), sys.stdout)
    return records, errors


def _summary(name: str, records, rho: float | None, target_rate: bool) -> Report:
    rep = Report(name)
    n = len(records)
    if n == 0:
        return rep
    ok = sum(r.success for r in records)
    if target_rate:
        rep.add(rate_check(f"{name} success rate", ok, n, 1 - rho))
    else:
        rep.add(fail_rate_check(f"{name} failure rate", n - ok, n, rho))
    mean_q = sum(r.queries for r in records) / n
    rep.checks[-1].detail += f" mean queries={mean_q:.1f}"
    return rep


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "verify":
        accepted = inspect.signature(SUITES[args.suite]).parameters
        opts = {"seed": args.seed} if "seed" in accepted else {}
        if args.trials is not None:
            for name in ("trials", "samples", "pairs"):
                if name in accepted:
                    opts[name] = args.trials
                    break
        report = verify_bounds(args.suite, **opts)
        print(report.text())
        return 0 if report.passed else 1

    if args.command == "sweep":
        spec = load_spec(args.spec_file)
        if args.out:
            spec.out = args.out
        if args.trials:
            spec.trials = args.trials
        if args.seed is not None:
            spec.seed = args.seed
        if args.backend:
            spec.backend = args.backend
        records, errors = _run_and_write(spec)
        for e in errors:
            print(f"invalid cell: {e}", file=sys.stderr)
        print(f"{len(records)} records", file=sys.stderr)
        return 0 if not errors else 1

    grid: dict[str, list]
    if args.command == "multifind":
        grid = {"N": [args.n], "k": [args.k], "rho": [args.rho], "mode": [args.mode]}
        if args.lam is not None:
            grid["lam"] = [args.lam]
        algorithm, rho, rate = "multifind", args.rho, False
    elif args.command == "count":
        grid = {"N": [args.n], "k": [args.k], "rho": [args.rho], "delta": [args.delta]}
        algorithm, rho, rate = "count", args.rho, True
    else:
        grid = {"N": [args.n], "delta": [args.delta], "rho": [args.rho]}
        if args.baseline:
            algorithm = "mean_baseline"
        else:
            algorithm = "approx_sum"
            grid["mode"] = [args.mode]
            if args.p is not None:
                grid["p"] = [args.p]
            if args.lam is not None:
                grid["lam"] = [args.lam]
        rho, rate = args.rho, True

    spec = SweepSpec(algorithm, grid, trials=args.trials, seed=args.seed, out=args.out,
                     backend=args.backend, input=args.input)
    records, errors = _run_and_write(spec)
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    if errors:
        return 1
    report = _summary(algorithm, records, rho, rate)
    print(report.text(), file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
