"""End-to-end run: ingest, preprocess, select, split, rebalance, train, evaluate.

Output layout under ``config.output_dir``::

    report.json          metrics, preprocessing summary, config echo
    cm_<model>.csv       confusion matrix, class names on both axes
    curve_<model>.csv    learning curve (fraction, rows, train/CV accuracy)
    roc_<model>.csv      one-vs-rest ROC points per class
    model_<model>.json   persisted model
    preprocessor.json    encoders, standardizer and selected columns
    test_split.npz       the evaluated test rows, post-preprocessing
"""

from __future__ import annotations

import contextlib
import copy
import csv
import json
import logging
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import PipelineConfig
from .dataset import (
    Dataset,
    LabelEncoder,
    encode,
    load_dataset,
    stratified_split,
    stratified_subsample,
)
from .errors import DataError, NumericError, StageError
from .feature_select import FeatureSubset, rfe_select
from .metrics import ConfusionMatrix, evaluate, roc_curve
from .models import SoftVotingSpec, TrainedModel, fit_classifier, spec_to_dict
from .models.persist import load_model, save_model
from .models.selection import CurvePoint, cross_validate, grid_search, learning_curve
from .preprocess import (
    Standardizer,
    apply_standardizer,
    fit_standardizer,
    remove_outliers_zscore,
)
from .sampling import SamplingPlan, hybrid_resample

log = logging.getLogger(__name__)

# keys holding wall-clock measurements; excluded from determinism comparisons
TIMING_KEYS = frozenset({"training_time_s", "timings"})
AUDIT_TOLERANCE = 1e-9

__all__ = [
    "PipelineConfig", "Prepared", "run_pipeline", "prepare", "learning_curve",
    "save_model", "load_model", "audit", "canonical_report", "write_curve_csv",
]


@contextlib.contextmanager
def stage(name: str, timings: dict | None = None):
    t0 = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    finally:
        if timings is not None:
            timings[name] = timings.get(name, 0.0) + time.perf_counter() - t0


@dataclass
class Preprocessor:
    """Everything needed to turn a raw CSV into model input."""

    raw_features: list[str]
    encoders: dict[str, LabelEncoder]
    standardizer: Standardizer
    subset: FeatureSubset
    class_names: list[str]
    target_column: str

    def to_dict(self) -> dict:
        return {
            "raw_features": self.raw_features,
            "encoders": {k: v.to_dict() for k, v in sorted(self.encoders.items())},
            "standardizer": self.standardizer.to_dict(),
            "selected": self.subset.selected,
            "selected_names": self.subset.selected_names,
            "class_names": self.class_names,
            "target_column": self.target_column,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Preprocessor":
        raw = list(d["raw_features"])
        subset = FeatureSubset(list(d["selected"]), {j: 1 for j in d["selected"]}, raw)
        return cls(
            raw,
            {k: LabelEncoder.from_dict(v) for k, v in d["encoders"].items()},
            Standardizer.from_dict(d["standardizer"]),
            subset,
            list(d["class_names"]),
            d["target_column"],
        )


@dataclass
class Prepared:
    train: Dataset           # balanced training split
    test: Dataset
    preprocessor: Preprocessor
    summary: dict = field(default_factory=dict)


def prepare(config: PipelineConfig, timings: dict | None = None) -> Prepared:
    """Run every stage up to and including rebalancing of the training split.

    ``paper-order`` filters, standardizes and selects features on the full
    dataset before splitting. ``leak-free`` splits first, fits all three on
    the training split and applies the standardizer and selection to test;
    test rows are never filtered.
    """
    seed = config.seed
    summary: dict = {}
    with stage("ingest", timings):
        table = load_dataset(config.resolved_data_path(), config.target_column,
                             config.categorical_columns)
    with stage("encode", timings):
        ds, encoders, _ = encode(table, config.target_column, config.categorical_columns,
                                 config.drop_columns)
        del table
    summary["rows_loaded"] = ds.n
    summary["n_features_raw"] = ds.d
    summary["class_histogram_raw"] = ds.histogram()
    raw_features = list(ds.feature_names)

    if config.mode == "paper-order":
        with stage("outlier_filter", timings):
            ds, outliers = remove_outliers_zscore(ds, config.z_threshold)
            ds = ds.compact_classes()
        with stage("standardize", timings):
            scaler = fit_standardizer(ds)
            ds = apply_standardizer(scaler, ds)
        with stage("feature_selection", timings):
            subset = rfe_select(ds, min(config.rfe_k, ds.d), seed, step=config.rfe_step,
                                max_rows=config.rfe_max_rows)
            ds = ds.select_features(subset.selected)
        with stage("split", timings):
            split = stratified_split(ds, config.test_fraction, seed)
            train, test = split.train, split.test
    else:
        with stage("split", timings):
            split = stratified_split(ds, config.test_fraction, seed)
            train, test = split.train, split.test
        with stage("outlier_filter", timings):
            train, outliers = remove_outliers_zscore(train, config.z_threshold)
        with stage("standardize", timings):
            scaler = fit_standardizer(train)
            train = apply_standardizer(scaler, train)
            test = apply_standardizer(scaler, test)
        with stage("feature_selection", timings):
            subset = rfe_select(train, min(config.rfe_k, train.d), seed, step=config.rfe_step,
                                max_rows=config.rfe_max_rows)
            train = train.select_features(subset.selected)
            test = test.select_features(subset.selected)

    summary["outliers"] = outliers.to_dict()
    summary["classes_after_filtering"] = [
        name for name, c in zip(train.class_names, train.class_counts() + test.class_counts()) if c
    ]
    summary["n_classes_after_filtering"] = len(summary["classes_after_filtering"])
    summary["feature_selection"] = subset.to_dict()
    summary["split"] = {
        "test_fraction": config.test_fraction,
        "train_rows": train.n,
        "test_rows": test.n,
        "train_histogram": train.histogram(),
        "test_histogram": test.histogram(),
    }

    with stage("resample", timings):
        plan = SamplingPlan(config.resample_target, config.k_neighbors, seed)
        before = train.histogram()
        train = hybrid_resample(train, plan)
    summary["balancing"] = {
        "target_per_class": plan.target_per_class,
        "k_neighbors": plan.k_neighbors,
        "before": before,
        "after": train.histogram(),
        "classes_balanced": int((train.class_counts() > 0).sum()),
    }
    pre = Preprocessor(raw_features, encoders, scaler, subset, list(train.class_names),
                       config.target_column)
    return Prepared(train, test, pre, summary)


def write_curve_csv(points: list[CurvePoint], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fraction", "n_rows", "train_accuracy", "cv_accuracy"])
        for p in points:
            w.writerow([repr(p.fraction), p.n_rows, repr(p.train_accuracy), repr(p.cv_accuracy)])


def _write_roc_csv(y_true, proba, class_names, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "threshold", "fpr", "tpr"])
        for c, name in enumerate(class_names):
            pos = y_true == c
            if pos.all() or not pos.any():
                continue
            fpr, tpr, thr = roc_curve(proba[:, c], pos)
            for a, b, t in zip(fpr, tpr, thr):
                w.writerow([name, repr(float(t)), repr(float(a)), repr(float(b))])


def _write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n",
                          encoding="utf-8")


def save_test_split(ds: Dataset, path) -> None:
    np.savez(path, X=ds.X, y=ds.y, feature_names=np.array(ds.feature_names),
             class_names=np.array(ds.class_names))


def load_test_split(path) -> Dataset:
    with np.load(path, allow_pickle=False) as z:
        return Dataset(z["X"], z["y"], [str(s) for s in z["feature_names"]],
                       [str(s) for s in z["class_names"]])


def _test_metrics(model: TrainedModel, test: Dataset) -> tuple[dict, object, np.ndarray]:
    proba = model.predict_proba(test.X)
    pred = np.argmax(proba, axis=1)
    rep, cm = evaluate(test.y, pred, proba, test.n_classes)
    return rep.to_dict(test.class_names), cm, proba


def _train_family(family: str, config: PipelineConfig, train: Dataset, chosen: dict,
                  timings: dict) -> tuple[dict, TrainedModel]:
    seed, folds = config.seed, config.cv_folds
    results: list = []
    if family == "voting":
        members = tuple(chosen.get(m) or config.grid_for(m)[0] for m in config.voting_members)
        spec = SoftVotingSpec(members)
        cv = cross_validate(spec, train, folds, seed)
        results.append((spec, cv))
        best, best_score = spec, cv.mean
    else:
        best, best_score = grid_search(config.grid_for(family), train, folds, seed, results)
    chosen[family] = best
    model = fit_classifier(best, train, seed)
    timings[f"fit:{family}"] = model.training_time_s
    train_acc = float(np.mean(model.predict(train.X) == train.y))
    best_cv = next(cv for s, cv in results if s == best)
    record = {
        "spec": spec_to_dict(best),
        "grid": [{"spec": spec_to_dict(s), "cv_mean": cv.mean, "cv_scores": cv.scores}
                 for s, cv in results],
        "train_accuracy": train_acc,
        "training_time_s": model.training_time_s,
        "cv_score": best_score,
        "cv_scores": best_cv.scores,
    }
    return record, model


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute the whole workflow and write every artifact.

    Artifacts are staged in a temporary directory next to the output
    directory and moved into place only when every stage succeeded.

    Returns:
        The report dictionary written to ``report.json``.
    """
    t_start = time.perf_counter()
    timings: dict[str, float] = {}
    outdir = Path(config.output_dir)
    outdir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=outdir.parent))
    try:
        prepared = prepare(config, timings)
        train, test = prepared.train, prepared.test
        with stage("write", timings):
            save_test_split(test, staging / "test_split.npz")
            _write_json(prepared.preprocessor.to_dict(), staging / "preprocessor.json")

        curve_data = train
        if config.curve_max_rows is not None and train.n > config.curve_max_rows:
            curve_data = stratified_subsample(train, config.curve_max_rows / train.n, config.seed)

        records, chosen = {}, {}
        order = [f for f in ("rf", "knn", "lr", "mlp") if f in config.models]
        if "voting" in config.models:
            order.append("voting")
        for family in order:
            with stage(f"model:{family}", timings):
                record, model = _train_family(family, config, train, chosen, timings)
                metrics, cm, proba = _test_metrics(model, test)
                record["test"] = metrics
                points = learning_curve(model.spec, curve_data, config.curve_fractions,
                                        config.curve_folds, config.seed)
                record["learning_curve"] = [p.__dict__ for p in points]
                files = {
                    "confusion_matrix_file": f"cm_{family}.csv",
                    "curve_file": f"curve_{family}.csv",
                    "roc_file": f"roc_{family}.csv",
                    "model_file": f"model_{family}.json",
                }
                cm.to_csv(staging / files["confusion_matrix_file"], test.class_names)
                write_curve_csv(points, staging / files["curve_file"])
                _write_roc_csv(test.y, proba, test.class_names, staging / files["roc_file"])
                save_model(model, staging / files["model_file"])
                record.update(files)
                records[family] = record
                log.info("%s: test accuracy %.4f kappa %.4f auc %.4f", family,
                         metrics["accuracy"], metrics["kappa"], metrics["auc_ovr_macro"])

        timings["total"] = time.perf_counter() - t_start
        report = {
            "software": {"package": "iotids", "version": __version__},
            "config": config.to_dict(),
            "preprocessing": prepared.summary,
            "protocol": {
                "auc": "one-vs-rest, macro average over classes with positives and negatives, "
                       "rank statistic with ties counted 1/2",
                "grid_search": f"stratified {config.cv_folds}-fold CV on the balanced training split",
                "macro_average": "unweighted mean over classes present in the test truth",
                "learning_curve_rows": curve_data.n,
            },
            "models": records,
            "timings": timings,
        }
        with stage("write", timings):
            _write_json(report, staging / "report.json")
            outdir.mkdir(parents=True, exist_ok=True)
            for f in sorted(staging.iterdir()):
                f.replace(outdir / f.name)
        return report
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def canonical_report(report: dict) -> dict:
    """Copy of ``report`` with every timing field removed."""
    def strip(obj):
        if isinstance(obj, dict):
            return {k: strip(v) for k, v in obj.items() if k not in TIMING_KEYS}
        if isinstance(obj, list):
            return [strip(v) for v in obj]
        return obj

    return strip(copy.deepcopy(report))


def _compare(expected, actual, path: str, problems: list, tol: float) -> None:
    if isinstance(expected, dict):
        for k, v in expected.items():
            if k not in actual:
                problems.append(f"{path}.{k}: missing on recomputation")
            else:
                _compare(v, actual[k], f"{path}.{k}", problems, tol)
    elif isinstance(expected, list):
        if len(expected) != len(actual):
            problems.append(f"{path}: length {len(expected)} != {len(actual)}")
        for i, (a, b) in enumerate(zip(expected, actual)):
            _compare(a, b, f"{path}[{i}]", problems, tol)
    elif isinstance(expected, float) or isinstance(actual, float):
        if expected is None or actual is None or abs(expected - actual) > tol:
            problems.append(f"{path}: report {expected!r} vs recomputed {actual!r}")
    elif expected != actual:
        problems.append(f"{path}: report {expected!r} vs recomputed {actual!r}")


def audit(run_dir, tol: float = AUDIT_TOLERANCE) -> dict[str, list[str]]:
    """Recompute every model's test metrics from persisted artifacts.

    Raises :class:`NumericError` listing every disagreement beyond ``tol``.

    Returns:
        Per model, the sorted top-level metric keys that were recomputed.
    """
    run_dir = Path(run_dir)
    report_path = run_dir / "report.json"
    if not report_path.is_file():
        raise DataError(f"no report.json in {run_dir}")
    report = json.loads(report_path.read_text(encoding="utf-8"))
    test = load_test_split(run_dir / "test_split.npz")
    problems: list[str] = []
    checked = {}
    for family, record in report["models"].items():
        model = load_model(run_dir / record["model_file"], test.feature_names)
        metrics, cm, _ = _test_metrics(model, test)
        _compare(record["test"], metrics, family, problems, tol)
        saved_cm, names = ConfusionMatrix.from_csv(run_dir / record["confusion_matrix_file"])
        if names != test.class_names or not np.array_equal(saved_cm.counts, cm.counts):
            problems.append(f"{family}: confusion matrix file disagrees with recomputation")
        checked[family] = sorted(metrics)
    if problems:
        raise NumericError("audit failed:\n  " + "\n  ".join(problems))
    return checked
