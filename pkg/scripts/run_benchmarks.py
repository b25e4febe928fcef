#!/usr/bin/env python3
"""Repeated-split benchmark runner over the dataset registry.

Full protocol (25 repeats, epsilon grid, both accountants):

    python scripts/run_benchmarks.py adult-income --out reports/adult

Desk scale:

    python scripts/run_benchmarks.py adult-income --repeats 5 \
        --epsilons 0.5 8 --kinds gdp --out reports/adult-desk
"""

import argparse
import sys
from pathlib import Path

from dpgam.harness import ExperimentConfig, run_experiment

REGISTRY = Path(__file__).resolve().parent.parent / "datasets" / "registry.json"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("dataset", help="registry name, e.g. adult-income")
    parser.add_argument("--registry", default=str(REGISTRY))
    parser.add_argument("--epsilons", type=float, nargs="*",
                        default=[0.5, 1.0, 2.0, 4.0, 8.0])
    parser.add_argument("--kinds", nargs="*", default=["classic", "gdp"],
                        choices=["classic", "gdp"])
    parser.add_argument("--no-non-private", action="store_true")
    parser.add_argument("--repeats", type=int, default=25)
    parser.add_argument("--delta", type=float, default=1e-6)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--export-shapes", action="store_true")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    cfg = ExperimentConfig(
        dataset=args.dataset, registry=args.registry,
        epsilons=tuple(args.epsilons), kinds=tuple(args.kinds),
        include_non_private=not args.no_non_private, repeats=args.repeats,
        delta=args.delta, seed=args.seed, workers=args.workers,
        export_shapes=args.export_shapes)
    report = run_experiment(cfg, out_dir=args.out)
    for cell in report.cells:
        tag = "non-private" if cell.epsilon is None else \
            f"eps={cell.epsilon:g} ({cell.accountant})"
        print(f"{report.dataset:>14} {tag:>22}: {report.metric} "
              f"{cell.mean:.4f} +/- {cell.std:.4f}")
    print(f"report written to {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
