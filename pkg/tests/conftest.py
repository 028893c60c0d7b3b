from __future__ import annotations

import pytest

from iotids.config import PipelineConfig
from synth import make_blobs, write_csv

# small grids so that a full run takes seconds
TINY_GRIDS = {
    "rf": [{"n_estimators": 10, "max_depth": 6}],
    "knn": [{"k": 3}, {"k": 5}],
    "lr": [{"l2": 1e-4, "max_iter": 100}],
    "mlp": [{"hidden": 8, "max_epochs": 15, "patience": 3}],
}


def tiny_config(data_path, output_dir, **overrides) -> PipelineConfig:
    cfg = dict(
        data_path=str(data_path),
        target_column="label",
        categorical_columns=["proto"],
        rfe_k=5,
        rfe_max_rows=500,
        resample_target=60,
        cv_folds=3,
        curve_fractions=[0.5, 1.0],
        curve_folds=3,
        grids=TINY_GRIDS,
        output_dir=str(output_dir),
    )
    cfg.update(overrides)
    return PipelineConfig(**cfg)


@pytest.fixture(scope="session")
def tiny_csv(tmp_path_factory):
    X, y = make_blobs(1, counts=(300, 80, 30, 15, 12), d=8)
    protos = ["tcp" if v > 0 else "udp" for v in X[:, 6]]
    path = tmp_path_factory.mktemp("data") / "tiny.csv"
    return write_csv(path, X, y, extra_columns={"proto": protos})


@pytest.fixture(scope="session")
def blob_csv(tmp_path_factory):
    """The desk-scale synthetic dataset: five blobs 5000/800/100/30/10, d = 25."""
    X, y = make_blobs(0)
    return write_csv(tmp_path_factory.mktemp("data") / "blobs.csv", X, y)


# one summary line per acceptance criterion, printed after the run

_CRITERIA: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    cid = marker.args[0]
    if rep.when == "call" or (rep.skipped and rep.when == "setup") or (rep.failed and rep.when == "setup"):
        detail = dict(item.user_properties).get("detail", "")
        if rep.skipped:
            detail = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else str(rep.longrepr)
            detail = detail.removeprefix("Skipped: ")
        elif rep.failed and not detail:
            detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else "failed"
        _CRITERIA[cid] = ("PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: int(c[1:])):
        status, detail = _CRITERIA[cid]
        terminalreporter.write_line(f"{cid} {status}: {detail}")
