import json
from pathlib import Path
from typing import Any

import pytest

from app.dataset.manifest import MANIFEST_NAME
from app.dataset.model import DatasetManifest
from app.errors import RunError
from app.evaluation.config import ConfigToy
from app.experiment.config import ExperimentSpec
from app.experiment.runner import ATTACKS_DIR, run_experiment


def _spec(corpus: DatasetManifest, out_dir: Path, toy_config: ConfigToy, **update: Any) -> ExperimentSpec:
    assert corpus.root is not None

    return ExperimentSpec.model_validate(
        {
            "sr_attack": "experiment:v1",
            "name": "toy grid",
            "manifest_path": corpus.root / MANIFEST_NAME,
            "output_dir": out_dir,
            "detectors": ["toy-fitted"],
            "attacks": [None, {"scale": 2}, {"scale": 4}],
            "plots": False,
            "detectors_registry": {"toy-fitted": toy_config.model_dump(mode="json")},
        }
        | update
    )


def test_grid(corpus: DatasetManifest, toy_config: ConfigToy, tmp_path: Path) -> None:
    result = run_experiment(_spec(corpus, tmp_path, toy_config))

    rows = result.report.rows
    assert [(row.sr_method, row.scale) for row in rows] == [("none", 1), ("bicubic", 2), ("bicubic", 4)]
    assert all(row.error is None for row in rows)

    aucs = [row.metric("auc") for row in rows]
    assert aucs[0] is not None and aucs[1] is not None and aucs[2] is not None
    assert aucs[0] >= aucs[1] >= aucs[2]

    fnrs = [row.metric("fnr") for row in rows]
    assert fnrs[0] is not None and fnrs[1] is not None
    assert fnrs[1] > fnrs[0]

    assert result.cells_failed == 0
    assert {path.name for path in result.files} == {"report.json", "report.csv", "similarity.csv"}
    assert len(list((tmp_path / ATTACKS_DIR).iterdir())) == 2

    similarity = result.report.similarity
    assert [(record.forgery_method, record.scale) for record in similarity] == [
        ("none", 2),
        ("synthetic-corpus", 2),
        ("none", 4),
        ("synthetic-corpus", 4),
    ]


def test_rerun_is_byte_identical(small_corpus: DatasetManifest, toy_config: ConfigToy, tmp_path: Path) -> None:
    first = run_experiment(_spec(small_corpus, tmp_path / "first", toy_config))
    second = run_experiment(_spec(small_corpus, tmp_path / "second", toy_config))

    assert first.report == second.report
    for name in ("report.csv", "similarity.csv", "report.json"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()

    # worker count changes the config hash, never the numbers
    parallel = run_experiment(_spec(small_corpus, tmp_path / "parallel", toy_config, workers=3))

    assert parallel.report.cells == first.report.cells
    for name in ("report.csv", "similarity.csv"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes()


def test_plots(small_corpus: DatasetManifest, toy_config: ConfigToy, tmp_path: Path) -> None:
    result = run_experiment(_spec(small_corpus, tmp_path, toy_config, plots=True, similarity=False))

    assert {path.name for path in result.files} == {
        "report.json",
        "report.csv",
        "plot_fnr.png",
        "plot_fpr.png",
        "plot_auc.png",
    }
    assert all(path.is_file() for path in result.files)


def test_failed_cells_are_recorded(small_corpus: DatasetManifest, toy_config: ConfigToy, tmp_path: Path) -> None:
    result = run_experiment(
        _spec(small_corpus, tmp_path, toy_config, attacks=[None, {"scale": 2, "sr_backend_id": "edsr"}])
    )

    assert result.cells_failed == 1
    cells = result.report.cells
    assert cells[0].error is None
    assert cells[1].error is not None and "edsr" in cells[1].error
    assert not cells[1].rows


def test_all_cells_failed(small_corpus: DatasetManifest, toy_config: ConfigToy, tmp_path: Path) -> None:
    with pytest.raises(RunError, match="All 3 cells"):
        run_experiment(_spec(small_corpus, tmp_path, toy_config, detectors=["missing"]))

    # report is still written
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    assert all(cell["error"] for cell in report["cells"])


def test_missing_manifest(small_corpus: DatasetManifest, toy_config: ConfigToy, tmp_path: Path) -> None:
    spec = _spec(small_corpus, tmp_path, toy_config).model_copy(update={"manifest_path": tmp_path / "missing.jsonl"})

    with pytest.raises(RunError):
        run_experiment(spec)
