"""Single-entry command line: train, predict, account, edit, monotonize,
bench, export-shapes.

Config-file-first: every flag has a JSON config-file equivalent under the
same name (dashes become underscores); explicit flags win over the file,
the file wins over built-in defaults. Exit codes: 0 success, 1 user error
(one-line diagnostic), 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import harness, model, postprocess, trainer
from .accountant import (
    PrivacyBudget,
    allocate_budget,
    calibrate_binning_sigma,
    calibrate_training_sigma,
    dp_to_gdp,
)
from .dataset import clip_labels, load_csv, load_feature_specs


class UsageError(Exception):
    """Bad invocation or bad input file; reported on one line, exit 1."""


_DEFAULTS: dict[str, dict] = {
    "train": {
        "data": None, "schema": None, "label": None, "label_min": None,
        "label_max": None, "task": "binary_classification", "epochs": 300,
        "learning_rate": 0.01, "max_leaves": 3, "max_bins": 32, "epsilon": None,
        "delta": 1e-6, "accountant": "gdp", "bin_fraction": 0.1, "trace": None,
        "force_sigma": None, "force_bin_sigma": None, "out": None, "seed": 0,
        "force": False, "print_config": False,
    },
    "predict": {
        "model": None, "data": None, "out": None, "explain": False, "seed": 0,
        "force": False, "print_config": False,
    },
    "account": {
        "epsilon": None, "delta": 1e-6, "epochs": 300, "features": 1,
        "accountant": "gdp", "bin_fraction": 0.1, "seed": 0, "force": False,
        "print_config": False,
    },
    "edit": {
        "model": None, "feature": None, "bins": None, "set": None,
        "delta_value": None, "out": None, "seed": 0, "force": False,
        "print_config": False,
    },
    "monotonize": {
        "model": None, "feature": None, "dir": "increasing", "out": None,
        "seed": 0, "force": False, "print_config": False,
    },
    "bench": {
        "dataset": None, "registry": None, "epsilons": [], "include_non_private": True,
        "delta": 1e-6, "repeats": 25, "kinds": ["gdp"], "bin_fraction": 0.1,
        "test_fraction": 0.2, "workers": 1, "export_shapes": False, "train": None,
        "out": None, "seed": 0, "force": False, "print_config": False,
    },
    "export-shapes": {
        "model": None, "out_dir": None, "seed": 0, "force": False,
        "print_config": False,
    },
}


def _check_out(path, force: bool) -> None:
    if os.path.exists(path) and not force:
        raise UsageError(f"refusing to overwrite {path}; pass --force")


def _require(cfg: dict, *keys: str) -> None:
    for key in keys:
        if cfg.get(key) in (None, ""):
            raise UsageError(f"--{key.replace('_', '-')} is required")


def _resolved(command: str, args: argparse.Namespace) -> dict:
    merged = dict(_DEFAULTS[command])
    passed = {k: v for k, v in vars(args).items() if k not in ("command", "run", "config")}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from None
        if not isinstance(from_file, dict):
            raise UsageError(f"config {config_path} must be a JSON object")
        unknown = set(from_file) - set(merged)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
        merged.update(from_file)
    merged.update(passed)
    return merged


def _print_config(command: str, cfg: dict) -> None:
    echo = {"command": command}
    echo.update({k: v for k, v in cfg.items() if k != "print_config"})
    json.dump(echo, sys.stdout, sort_keys=True, indent=1)
    sys.stdout.write("\n")


def _load_clipped(cfg: dict):
    _require(cfg, "data", "schema", "label")
    specs = load_feature_specs(cfg["schema"])
    d = load_csv(cfg["data"], specs, cfg["label"])
    lo, hi = cfg["label_min"], cfg["label_max"]
    if lo is None and hi is None and cfg.get("task") == "binary_classification":
        lo, hi = 0.0, 1.0  # the only bounds the classification path accepts
    if lo is None or hi is None:
        raise UsageError("--label-min and --label-max are required (public label bounds)")
    return clip_labels(d, float(lo), float(hi))


def cmd_train(cfg: dict) -> int:
    _require(cfg, "out")
    _check_out(cfg["out"], cfg["force"])
    d = _load_clipped(cfg)
    t_cfg = trainer.TrainConfig(
        task=cfg["task"], epochs=int(cfg["epochs"]),
        learning_rate=float(cfg["learning_rate"]), max_leaves=int(cfg["max_leaves"]),
        max_bins=int(cfg["max_bins"]), seed=int(cfg["seed"]))
    forced = cfg["force_sigma"] is not None or cfg["force_bin_sigma"] is not None
    if cfg["epsilon"] is None and not forced:
        m = trainer.train_ebm(d, t_cfg, trace_dir=cfg["trace"])
    else:
        if cfg["epsilon"] is None:
            raise UsageError("--force-sigma needs --epsilon to size the pipeline")
        budget = PrivacyBudget(epsilon=float(cfg["epsilon"]), delta=float(cfg["delta"]),
                               bin_fraction=float(cfg["bin_fraction"]))
        if forced:
            print("warning: forced sigma run is NOT differentially private; "
                  "no privacy metadata will be stamped", file=sys.stderr)
        m = trainer.train_dp_ebm(
            d, t_cfg, budget, cfg["accountant"],
            force_sigma=None if cfg["force_sigma"] is None else float(cfg["force_sigma"]),
            force_bin_sigma=None if cfg["force_bin_sigma"] is None else float(cfg["force_bin_sigma"]),
            trace_dir=cfg["trace"])
    model.save(m, cfg["out"])
    print(f"wrote {cfg['out']}")
    return 0


def cmd_predict(cfg: dict) -> int:
    _require(cfg, "model", "data", "out")
    _check_out(cfg["out"], cfg["force"])
    m = model.load(cfg["model"])
    specs = [b.feature for b in m.bins]
    with open(cfg["data"], newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise UsageError(f"{cfg['data']}: empty file") from None
        col_of = {name: i for i, name in enumerate(header)}
        for spec in specs:
            if spec.name not in col_of:
                raise UsageError(f"{cfg['data']}: missing column {spec.name!r}")
        rows = []
        for record in reader:
            if record:
                rows.append([record[col_of[s.name]].strip() for s in specs])
    with open(cfg["out"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        head = ["prediction"]
        if cfg["explain"]:
            head += ["raw_score"] + [f"contrib_{s.name}" for s in specs]
        writer.writerow(head)
        for cells in rows:
            row = [float(c) if s.kind == "numeric" else c for c, s in zip(cells, specs)]
            out = [repr(model.predict(m, row))]
            if cfg["explain"]:
                contribs = model.contributions(m, row)
                out.append(repr(model.raw_score(m, row)))
                out += [repr(c.score) for c in contribs]
            writer.writerow(out)
    print(f"wrote {cfg['out']} ({len(rows)} rows)")
    return 0


def cmd_account(cfg: dict) -> int:
    _require(cfg, "epsilon")
    budget = PrivacyBudget(epsilon=float(cfg["epsilon"]), delta=float(cfg["delta"]),
                           bin_fraction=float(cfg["bin_fraction"]))
    epochs, feats, kind = int(cfg["epochs"]), int(cfg["features"]), cfg["accountant"]
    budget_bin, budget_train = allocate_budget(budget)
    sigma_bin = calibrate_binning_sigma(budget_bin, feats, kind)
    sigma_train = calibrate_training_sigma(budget_train, epochs, feats, kind)
    mu_train = dp_to_gdp(*budget_train).mu
    print(f"accountant      {kind}")
    print(f"budget          epsilon={budget.epsilon} delta={budget.delta} "
          f"(binning {budget.bin_fraction:.0%})")
    print(f"sigma_train     {sigma_train!r}")
    print(f"sigma_bin       {sigma_bin!r}")
    print(f"mu_train        {mu_train!r}")
    print(f"per_iteration   mu={1.0 / sigma_train!r} over {epochs * feats} iterations")
    return 0


def cmd_edit(cfg: dict) -> int:
    _require(cfg, "model", "feature", "bins", "out")
    if (cfg["set"] is None) == (cfg["delta_value"] is None):
        raise UsageError("pass exactly one of --set / --delta-value")
    _check_out(cfg["out"], cfg["force"])
    try:
        lo, hi = (int(p) for p in str(cfg["bins"]).split(".."))
    except ValueError:
        raise UsageError(f"--bins must look like 12..16, got {cfg['bins']!r}") from None
    m = model.load(cfg["model"])
    cmd = postprocess.EditCommand(
        feature=cfg["feature"], lo=lo, hi=hi,
        new_value=None if cfg["set"] is None else float(cfg["set"]),
        delta=None if cfg["delta_value"] is None else float(cfg["delta_value"]))
    model.save(postprocess.edit(m, cmd), cfg["out"])
    print(f"wrote {cfg['out']}")
    return 0


def cmd_monotonize(cfg: dict) -> int:
    _require(cfg, "model", "feature", "out")
    _check_out(cfg["out"], cfg["force"])
    m = model.load(cfg["model"])
    model.save(postprocess.enforce_monotone(m, cfg["feature"], cfg["dir"]), cfg["out"])
    print(f"wrote {cfg['out']}")
    return 0


def cmd_bench(cfg: dict) -> int:
    _require(cfg, "dataset", "registry")
    train_raw = cfg["train"]
    exp = harness.ExperimentConfig(
        dataset=cfg["dataset"], registry=cfg["registry"],
        epsilons=tuple(float(e) for e in cfg["epsilons"]),
        include_non_private=bool(cfg["include_non_private"]),
        delta=float(cfg["delta"]), repeats=int(cfg["repeats"]),
        kinds=tuple(cfg["kinds"]), bin_fraction=float(cfg["bin_fraction"]),
        test_fraction=float(cfg["test_fraction"]), seed=int(cfg["seed"]),
        workers=int(cfg["workers"]), export_shapes=bool(cfg["export_shapes"]),
        train=None if train_raw is None else trainer.TrainConfig(**train_raw))
    out = cfg["out"]
    if out and os.path.exists(os.path.join(out, "report.csv")) and not cfg["force"]:
        raise UsageError(f"refusing to overwrite {out}/report.csv; pass --force")
    report = harness.run_experiment(exp, out_dir=out)
    for cell in report.cells:
        tag = "non-private" if cell.epsilon is None else \
            f"eps={cell.epsilon:g} ({cell.accountant})"
        print(f"{report.dataset} {tag}: {report.metric} "
              f"{cell.mean:.4f} +/- {cell.std:.4f} over {report.repeats} repeats")
    return 0


def cmd_export_shapes(cfg: dict) -> int:
    _require(cfg, "model", "out_dir")
    m = model.load(cfg["model"])
    harness.export_shapes(m, cfg["out_dir"], tag="model")
    print(f"wrote {len(m.bins)} shape files to {cfg['out_dir']}")
    return 0


_RUNNERS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "account": cmd_account,
    "edit": cmd_edit,
    "monotonize": cmd_monotonize,
    "bench": cmd_bench,
    "export-shapes": cmd_export_shapes,
}


def build_parser() -> argparse.ArgumentParser:
    # every option defaults to SUPPRESS so only explicitly passed flags are
    # visible to the merge step; built-in defaults live in _DEFAULTS
    S = argparse.SUPPRESS

    parser = argparse.ArgumentParser(prog="dpgam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None,
                       help="JSON config file; explicit flags override it")
        p.add_argument("--print-config", action="store_true", dest="print_config",
                       default=S, help="echo the fully resolved configuration and exit")
        p.add_argument("--force", action="store_true", default=S,
                       help="allow overwriting existing outputs")
        p.add_argument("--seed", type=int, default=S)

    p = sub.add_parser("train", help="fit a (DP-)boosted additive model")
    common(p)
    p.add_argument("--data", default=S)
    p.add_argument("--schema", default=S)
    p.add_argument("--label", default=S)
    p.add_argument("--label-min", type=float, dest="label_min", default=S)
    p.add_argument("--label-max", type=float, dest="label_max", default=S)
    p.add_argument("--task", choices=trainer.TASKS, default=S)
    p.add_argument("--epochs", type=int, default=S)
    p.add_argument("--learning-rate", type=float, dest="learning_rate", default=S)
    p.add_argument("--max-leaves", type=int, dest="max_leaves", default=S)
    p.add_argument("--max-bins", type=int, dest="max_bins", default=S)
    p.add_argument("--epsilon", type=float, default=S, help="omit for non-private training")
    p.add_argument("--delta", type=float, default=S)
    p.add_argument("--accountant", choices=("classic", "gdp"), default=S)
    p.add_argument("--bin-fraction", type=float, dest="bin_fraction", default=S)
    p.add_argument("--trace", default=S, help="dump per-iteration shape snapshots here")
    p.add_argument("--force-sigma", type=float, dest="force_sigma", default=S,
                   help="test hook: override training sigma (non-private!)")
    p.add_argument("--force-bin-sigma", type=float, dest="force_bin_sigma", default=S,
                   help="test hook: override binning sigma (non-private!)")
    p.add_argument("--out", default=S)

    p = sub.add_parser("predict", help="score a CSV with a saved model")
    common(p)
    p.add_argument("--model", default=S)
    p.add_argument("--data", default=S)
    p.add_argument("--out", default=S)
    p.add_argument("--explain", action="store_true", default=S,
                   help="add raw score and per-feature contribution columns")

    p = sub.add_parser("account", help="print calibrated noise for a budget")
    common(p)
    p.add_argument("--epsilon", type=float, default=S)
    p.add_argument("--delta", type=float, default=S)
    p.add_argument("--epochs", type=int, default=S)
    p.add_argument("--features", type=int, default=S)
    p.add_argument("--accountant", choices=("classic", "gdp"), default=S)
    p.add_argument("--bin-fraction", type=float, dest="bin_fraction", default=S)

    p = sub.add_parser("edit", help="set or shift shape values of a bin range")
    common(p)
    p.add_argument("--model", default=S)
    p.add_argument("--feature", default=S)
    p.add_argument("--bins", default=S, help="half-open bin range, e.g. 12..16")
    p.add_argument("--set", type=float, dest="set", default=S)
    p.add_argument("--delta-value", type=float, dest="delta_value", default=S)
    p.add_argument("--out", default=S)

    p = sub.add_parser("monotonize", help="isotonic projection of one shape function")
    common(p)
    p.add_argument("--model", default=S)
    p.add_argument("--feature", default=S)
    p.add_argument("--dir", choices=postprocess.DIRECTIONS, default=S)
    p.add_argument("--out", default=S)

    p = sub.add_parser("bench", help="run a repeated-split experiment grid; the "
                       "grid usually lives in a --config file")
    common(p)
    p.add_argument("--dataset", default=S, help="registry dataset name")
    p.add_argument("--registry", default=S, help="registry JSON path")
    p.add_argument("--epsilons", type=float, nargs="*", default=S)
    p.add_argument("--no-non-private", dest="include_non_private",
                   action="store_false", default=S)
    p.add_argument("--delta", type=float, default=S)
    p.add_argument("--repeats", type=int, default=S)
    p.add_argument("--kinds", nargs="*", choices=("classic", "gdp"), default=S)
    p.add_argument("--bin-fraction", type=float, dest="bin_fraction", default=S)
    p.add_argument("--test-fraction", type=float, dest="test_fraction", default=S)
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--export-shapes", dest="export_shapes", action="store_true", default=S)
    p.add_argument("--out", default=S, help="report output directory")

    p = sub.add_parser("export-shapes", help="dump per-feature shape JSONs")
    common(p)
    p.add_argument("--model", default=S)
    p.add_argument("--out-dir", dest="out_dir", default=S)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = _resolved(args.command, args)
        if cfg.get("print_config"):
            _print_config(args.command, cfg)
            return 0
        return _RUNNERS[args.command](cfg)
    except (UsageError, FileNotFoundError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal invariant violation
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
