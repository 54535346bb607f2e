"""Command-line entry point.

Commands: gen, train, eval, ablate-layers, inspect. Behaviour is driven
by a key/value config file or a named preset; any key can be overridden
with --set key=value, and dedicated flags win over both.

Exit codes: 0 success, 2 usage error, 3 config error, 4 data error,
5 numeric failure.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import evaluate as ev
from .config import ConfigError, RunConfig, config_from_mapping, load_config_file, load_preset
from .lstm import (
    NumericError,
    count_head_params,
    count_params,
    init_model,
    load_model,
    save_model,
)
from .train import history_csv, predict_classes, train

THREADS_ENV = "RADARBENCH_THREADS"


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key/value config file")
    p.add_argument("--preset", help="named in-repo preset (e.g. smoke, paper)")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="override one config key")
    p.add_argument("--seed", type=int, help="override master_seed and train_seed")
    p.add_argument("--threads", type=int, help="worker cap (default: $%s or 1)" % THREADS_ENV)


def _resolve_config(args) -> RunConfig:
    if args.config and args.preset:
        raise ConfigError("pass either --config or --preset, not both")
    if args.preset:
        cfg = load_preset(args.preset)
    elif args.config:
        cfg = load_config_file(args.config)
    else:
        cfg = RunConfig()
    pairs = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        pairs[key.strip()] = value.strip()
    for flag in ("layers", "input_domain", "dataset", "epochs", "batch_size", "hidden"):
        value = getattr(args, flag, None)
        if value is not None:
            pairs[flag] = str(value)
    if getattr(args, "train_snr_range", None):
        pairs["train_snr_range"] = args.train_snr_range
    cfg = config_from_mapping(pairs, base=cfg)
    if args.seed is not None:
        cfg.master_seed = args.seed
        cfg.train_seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    elif os.environ.get(THREADS_ENV):
        cfg.threads = int(os.environ[THREADS_ENV])
    return cfg.validate()


def _load_data_dir(data_dir, split_names):
    data_dir = Path(data_dir)
    manifest = ds.load_manifest(data_dir / "manifest.txt")
    splits = {name: ds.read_split(data_dir / f"{name}.split", mmap=True) for name in split_names}
    return manifest, splits


def _filter_snr(split, lo, hi):
    if lo is None and hi is None:
        return split
    mask = np.ones(len(split), dtype=bool)
    if lo is not None:
        mask &= split.snr_db >= lo
    if hi is not None:
        mask &= split.snr_db <= hi
    return split.subset(mask)


def cmd_gen(args) -> int:
    cfg = _resolve_config(args)
    manifest = cfg.manifest()
    totals = manifest.total_counts()
    print(f"generating {manifest.dataset_name}: {manifest.n_classes} classes x "
          f"{len(manifest.snr_grid_db)} SNRs, records {totals[0]}/{totals[1]}/{totals[2]}")
    paths = ds.build_dataset(manifest, args.out, threads=cfg.threads)
    for name, path in paths.items():
        print(f"  wrote {name}: {path}")
    return 0


def _train_once(cfg: RunConfig, manifest, splits, out_dir: Path, layers=None):
    layer_sizes = (cfg.hidden,) * (layers or cfg.layers)
    model = init_model(
        n_classes=manifest.n_classes,
        layer_sizes=layer_sizes,
        input_dim=2,
        seed=cfg.train_seed,
        cell_variant=cfg.cell_variant,
        input_domain=cfg.input_domain,
    )
    train_split = _filter_snr(splits["train"], cfg.train_snr_min, cfg.train_snr_max)
    val_split = _filter_snr(splits["val"], cfg.train_snr_min, cfg.train_snr_max)
    best, history = train(model, train_split, val_split, cfg.train_config())
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt = out_dir / "model.ckpt"
    save_model(best, ckpt)
    (out_dir / "history.csv").write_text(history_csv(history), encoding="utf-8")
    return best, history, ckpt


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    manifest, splits = _load_data_dir(args.data, ("train", "val"))
    out_dir = Path(args.out)
    best, history, ckpt = _train_once(cfg, manifest, splits, out_dir)
    final = history[-1]
    print(f"trained {cfg.layers}x{cfg.hidden} for {len(history)} epochs; "
          f"best val accuracy {max(h.val_accuracy for h in history):.4f}")
    print(f"  final epoch: loss {final.train_loss:.4f}, val {final.val_accuracy:.4f}")
    print(f"  wrote {ckpt} and {out_dir / 'history.csv'}")
    return 0


def _evaluate_model(model, manifest, split, out_dir, batch_size, prefix=""):
    classifier = ev.model_classifier(model, batch_size)
    preds = classifier(split.signals)
    curves = ev.curves_from_predictions(split, preds, manifest.class_names)
    sens = ev.sensitivity_table(curves)
    grid = sorted(int(s) for s in np.unique(split.snr_db))
    matrices = [
        ev.confusion_from_predictions(split, preds, snr, manifest.class_names) for snr in grid
    ]
    return ev.emit_report(curves, sens, matrices, out_dir, prefix=prefix), curves


def cmd_eval(args) -> int:
    model = load_model(args.model)
    manifest, splits = _load_data_dir(args.data, (args.split,))
    paths, curves = _evaluate_model(
        model, manifest, splits[args.split], Path(args.out), args.batch_size
    )
    overall = curves[0]
    print(f"evaluated {len(splits[args.split])} {args.split} examples "
          f"({model.input_domain} domain)")
    for snr, acc in zip(overall.snr_db, overall.accuracy):
        print(f"  {snr:+4d} dB: {acc:.4f}")
    s = ev.sensitivity(overall)
    print(f"  90% sensitivity: {'NA' if s is None else f'{s} dB'}")
    print(f"  wrote {len(paths)} report files to {args.out}")
    return 0


def cmd_ablate_layers(args) -> int:
    cfg = _resolve_config(args)
    manifest, splits = _load_data_dir(args.data, ("train", "val", "test"))
    out_dir = Path(args.out)
    combined = []
    for layers in (1, 2, 3):
        sub = out_dir / f"layers{layers}"
        best, history, _ = _train_once(cfg, manifest, splits, sub, layers=layers)
        classifier = ev.model_classifier(best, cfg.batch_size)
        preds = classifier(splits["test"].signals)
        curves = ev.curves_from_predictions(splits["test"], preds, manifest.class_names)
        overall = curves[0]
        overall.scope = "overall"
        overall.class_name = f"{layers}-layer"
        combined.append(overall)
        best_val = max(h.val_accuracy for h in history)
        print(f"  {layers} layer(s): best val {best_val:.4f}, "
              f"test mean {np.mean(overall.accuracy):.4f}")
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = ["layers,snr_db,accuracy,n_examples"]
    for k, curve in enumerate(combined, start=1):
        for snr, acc, n in zip(curve.snr_db, curve.accuracy, curve.n_examples):
            rows.append(f"{k},{snr},{acc:.6f},{n}")
    (out_dir / "ablation_accuracy.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    (out_dir / "ablation_accuracy.svg").write_text(
        ev.curves_svg(combined, title="accuracy vs SNR by layer count"), encoding="utf-8"
    )
    print(f"  wrote {out_dir / 'ablation_accuracy.csv'}")
    return 0


def cmd_inspect(args) -> int:
    if not args.model and not args.data:
        raise ConfigError("inspect needs --model and/or --data")
    if args.model:
        model = load_model(args.model)
        sizes = "x".join(str(l.hidden) for l in model.layers)
        print(f"model: {len(model.layers)} LSTM layer(s) [{sizes}], "
              f"input_dim {model.input_dim}, {model.n_classes} classes")
        print(f"  cell variant: {model.cell_variant}; input domain: {model.input_domain}")
        print(f"  LSTM parameters: {count_params(model)}")
        print(f"  head parameters: {count_head_params(model)}")
    if args.data:
        data_dir = Path(args.data)
        manifest = ds.load_manifest(data_dir / "manifest.txt")
        totals = manifest.total_counts()
        print(f"dataset: {manifest.dataset_name} ({manifest.n_classes} classes, "
              f"{len(manifest.snr_grid_db)} SNRs, seed {manifest.master_seed})")
        print(f"  classes: {','.join(manifest.class_names)}")
        print(f"  SNR grid: {','.join(str(s) for s in manifest.snr_grid_db)} dB")
        print(f"  per-cell counts: {manifest.per_cell_counts} "
              f"(totals {totals[0]}/{totals[1]}/{totals[2]})")
        for name in ds.SPLIT_NAMES:
            path = data_dir / f"{name}.split"
            if path.exists():
                split = ds.read_split(path, mmap=True)
                print(f"  {name}.split: {len(split)} records")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radarbench",
        description="Radar/communications dataset synthesis and LSTM classification workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate dataset splits from a manifest config")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dataset", choices=("deepradar2022", "eightclass"))
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train a classifier on generated splits")
    _add_config_flags(p)
    p.add_argument("--data", required=True, help="directory with splits + manifest")
    p.add_argument("--out", required=True, help="output directory for checkpoint/history")
    p.add_argument("--layers", type=int, choices=(1, 2, 3))
    p.add_argument("--hidden", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--input-domain", dest="input_domain", choices=("time", "autocorrelation"))
    p.add_argument("--train-snr-range", dest="train_snr_range", metavar="LO:HI")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint and emit reports")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", default="test", choices=("train", "val", "test"))
    p.add_argument("--batch-size", dest="batch_size", type=int, default=256)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate-layers", help="train 1/2/3-layer variants and compare")
    _add_config_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--hidden", type=int)
    p.set_defaults(func=cmd_ablate_layers)

    p = sub.add_parser("inspect", help="print manifest/model summaries")
    p.add_argument("--model")
    p.add_argument("--data")
    p.set_defaults(func=cmd_inspect)
    return parser


def run_command(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except (ds.DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 4
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 5


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
