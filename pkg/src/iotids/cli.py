"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, reference
from .config import FAMILIES, MODES, PipelineConfig
from .dataset import encode, feature_matrix, load_dataset, read_csv
from .errors import FeatureMismatchError, IdsError
from .models import spec_from_dict
from .models.persist import load_model
from .models.selection import learning_curve
from .pipeline import Preprocessor, audit, prepare, run_pipeline, write_curve_csv
from .preprocess import transform

log = logging.getLogger("iotids")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> list[str]:
    return [t for t in text.split(",") if t] if text else []


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    return cfg.replace(
        data_path=getattr(args, "data", None),
        output_dir=getattr(args, "outdir", None),
        seed=getattr(args, "seed", None),
        mode=getattr(args, "mode", None),
    )


def cmd_pipeline(args) -> int:
    cfg = _load_config(args)
    report = run_pipeline(cfg)
    for family, rec in report["models"].items():
        t = rec["test"]
        print(f"{family:7s} acc={t['accuracy']:.4f} kappa={t['kappa']:.4f} "
              f"auc={t['auc_ovr_macro']:.4f} cv={rec['cv_score']:.4f} "
              f"fit={rec['training_time_s']:.2f}s")
    print(f"report written to {Path(cfg.output_dir) / 'report.json'}")
    return 0


def cmd_ingest_check(args) -> int:
    cfg = _load_config(args)
    target = args.target or cfg.target_column
    categorical = _csv_list(args.categorical) if args.categorical is not None else cfg.categorical_columns
    drop = _csv_list(args.drop) if args.drop is not None else cfg.drop_columns
    t0 = time.perf_counter()
    table = load_dataset(cfg.resolved_data_path(), target, categorical)
    ds, _, _ = encode(table, target, categorical, drop)
    elapsed = time.perf_counter() - t0
    summary = {
        "rows": ds.n,
        "attributes": ds.d,
        "classes": ds.n_classes,
        "histogram": ds.histogram(),
        "seconds": round(elapsed, 3),
    }
    print(json.dumps(summary, indent=2))
    if args.expect_paper:
        problems = reference.check_distribution(ds.n, ds.histogram())
        if ds.d != reference.N_ATTRIBUTES:
            problems.append(f"{ds.d} attribute columns, expected {reference.N_ATTRIBUTES}")
        for p in problems:
            print(f"MISMATCH: {p}", file=sys.stderr)
        if problems:
            return 2
        print("matches the published distribution")
    return 0


def cmd_learning_curve(args) -> int:
    cfg = _load_config(args)
    spec = spec_from_dict(json.loads(args.spec)) if args.spec else cfg.grid_for(args.model)[0]
    prepared = prepare(cfg)
    folds = args.folds or cfg.curve_folds
    points = learning_curve(spec, prepared.train, cfg.curve_fractions, folds, cfg.seed)
    out = Path(args.output or Path(cfg.output_dir) / f"curve_{args.model}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_curve_csv(points, out)
    for p in points:
        print(f"{p.fraction:.2f} n={p.n_rows} train={p.train_accuracy:.4f} cv={p.cv_accuracy:.4f}")
    return 0


def cmd_audit(args) -> int:
    checked = audit(args.run_dir, args.tolerance)
    for family, keys in checked.items():
        print(f"{family}: {len(keys)} metric groups recomputed, all within {args.tolerance:g}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    table = read_csv(args.input)
    if args.preprocessor:
        pre = Preprocessor.from_dict(json.loads(Path(args.preprocessor).read_text(encoding="utf-8")))
        if pre.subset.selected_names != model.expected_features:
            raise FeatureMismatchError(
                f"preprocessor yields {pre.subset.selected_names}, model expects {model.expected_features}"
            )
        X = feature_matrix(table, pre.raw_features, pre.encoders)
        X = transform(pre.standardizer, X)[:, pre.subset.selected]
    else:
        X = feature_matrix(table, model.expected_features, {})
    proba = model.predict_proba(X)
    pred = np.argmax(proba, axis=1)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["predicted", *[f"p_{c}" for c in model.class_names]])
        for label, row in zip(pred, proba):
            w.writerow([model.class_names[label], *map(repr, row.tolist())])
    print(f"scored {len(pred)} rows -> {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="iotids", description="Imbalanced IoT intrusion-detection pipeline")
    p.add_argument("--version", action="version", version=f"iotids {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def config_args(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--data", help="dataset CSV (overrides config)")
        sp.add_argument("--outdir", help="output directory (overrides config)")
        sp.add_argument("--seed", type=int, help="master seed (overrides config)")
        sp.add_argument("--mode", choices=MODES, help="stage ordering (overrides config)")

    sp = sub.add_parser("pipeline", help="run the full workflow")
    config_args(sp)
    sp.set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("ingest-check", help="load and encode a dataset, print its shape")
    config_args(sp)
    sp.add_argument("--target", help="target column")
    sp.add_argument("--categorical", help="comma-separated categorical columns")
    sp.add_argument("--drop", help="comma-separated columns to ignore")
    sp.add_argument("--expect-paper", action="store_true",
                    help="compare against the published RT-IoT2022 distribution")
    sp.set_defaults(func=cmd_ingest_check)

    sp = sub.add_parser("learning-curve", help="learning curve for one model family")
    config_args(sp)
    sp.add_argument("--model", choices=FAMILIES[:-1], required=True)
    sp.add_argument("--spec", help="model spec as JSON (default: first grid entry)")
    sp.add_argument("--folds", type=int)
    sp.add_argument("--output", help="CSV path")
    sp.set_defaults(func=cmd_learning_curve)

    sp = sub.add_parser("audit", help="recompute test metrics from a run directory")
    sp.add_argument("run_dir")
    sp.add_argument("--tolerance", type=float, default=1e-9)
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("predict", help="score a CSV with a saved model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--preprocessor", help="preprocessor.json from a pipeline run")
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_predict)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else 1
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except IdsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
