import csv
from fractions import Fraction
from pathlib import Path

import pytest

from app.attack.config import Config as AttackConfig
from app.dataset.model import ManifestMetadata
from app.errors import IngestionError
from app.evaluation.metrics import compute_metrics
from app.evaluation.model import Aggregation, CellReport, CellRow, ConfusionCounts
from app.experiment.report import (
    CSV_COLUMNS,
    ExperimentReport,
    cell_record,
    cell_report,
    compare_reports,
    comparison_csv_row,
    csv_row,
    read_report,
    row_record,
    write_cell_report,
    write_report,
)

# published style row: 945 of 1000 fakes caught, 32 of 1000 pristine flagged
_COUNTS = ConfusionCounts(tp=945, fp=32, tn=968, fn=55)


def _row(sr_method: str = "bicubic", scale: int = 2, counts: ConfusionCounts = _COUNTS) -> CellRow:
    return CellRow(
        model="toy",
        forgery_method="face-swap",
        sr_method=sr_method,
        scale=scale,
        pristine_count=counts.pristine_count,
        fake_count=counts.fake_count,
        metrics=compute_metrics(counts, Fraction(97, 100)),
    )


def _cell(*rows: CellRow, error: str | None = None) -> CellReport:
    return CellReport(
        model="toy",
        sr_method=rows[0].sr_method if rows else "bicubic",
        scale=rows[0].scale if rows else 2,
        threshold=0.5,
        aggregation=Aggregation.FRAME,
        rows=list(rows),
        skipped_no_face=0,
        failed_entries=0,
        error=error,
    )


def _report(*cells: CellReport) -> ExperimentReport:
    return ExperimentReport(
        sr_attack="report:v1",
        name="test",
        version="0",
        config_hash="",
        source="test",
        source_config_hash="",
        threshold=0.5,
        aggregation=Aggregation.FRAME,
        cells=[cell_record(cell, None) for cell in cells],
        similarity=[],
    )


def test_csv_row_formatting() -> None:
    assert csv_row(row_record(_row())) == {
        "model": "toy",
        "forgery_method": "face-swap",
        "sr": "yes",
        "sr_method": "bicubic",
        "scale": "2",
        "fnr": "5.5",
        "fpr": "3.2",
        "recall": "94.5",
        "precision": "96.7",
        "auc": "97.0",
        "accuracy": "95.7",
    }


def test_csv_row_unattacked() -> None:
    values = csv_row(row_record(_row(sr_method="none", scale=1)))

    assert (values["sr"], values["sr_method"], values["scale"]) == ("no", "none", "1")


def test_csv_row_undefined_metrics() -> None:
    row = CellRow(
        model="toy",
        forgery_method="face-swap",
        sr_method="bicubic",
        scale=2,
        pristine_count=0,
        fake_count=3,
        metrics=None,
        error="AUC needs both classes",
    )

    values = csv_row(row_record(row))

    assert all(values[metric] == "" for metric in ("fnr", "fpr", "recall", "precision", "auc", "accuracy"))


def test_row_record_keeps_exact_ratios() -> None:
    record = row_record(_row())

    assert record.accuracy == "1913/2000"
    assert record.metric("accuracy") == Fraction(1913, 2000)
    assert (record.tp, record.fp, record.tn, record.fn) == (945, 32, 968, 55)


def test_write_and_read_report(tmp_path: Path) -> None:
    report = _report(_cell(_row(sr_method="none", scale=1)), _cell(_row()), _cell(error="backend missing"))

    write_report(report, tmp_path)

    assert read_report(tmp_path / "report.json") == report
    assert not (tmp_path / "similarity.csv").exists()

    with (tmp_path / "report.csv").open(encoding="utf-8", newline="") as file:
        rows = list(csv.DictReader(file))

    assert tuple(rows[0]) == CSV_COLUMNS
    assert [row["sr"] for row in rows] == ["no", "yes"]


def test_read_report_invalid(tmp_path: Path) -> None:
    with pytest.raises(IngestionError):
        read_report(tmp_path / "missing.json")

    (tmp_path / "report.json").write_text("{}", encoding="utf-8")
    with pytest.raises(IngestionError):
        read_report(tmp_path / "report.json")


def test_write_cell_report(tmp_path: Path) -> None:
    report = cell_report(
        _cell(_row()),
        AttackConfig(scale=2),
        name="eval",
        config_hash_="abc",
        metadata=ManifestMetadata(source="corpus", config_hash="def"),
    )

    paths = write_cell_report(report, tmp_path / "results" / "eval.json")

    assert paths == [tmp_path / "results" / "eval.json", tmp_path / "results" / "eval.csv"]
    assert all(path.is_file() for path in paths)
    assert read_report(paths[0]).cells[0].attack == AttackConfig(scale=2)
    assert report.source_config_hash == "def"


def test_compare_reports() -> None:
    better = ConfusionCounts(tp=990, fp=40, tn=960, fn=10)

    without = _report(_cell(_row(sr_method="none", scale=1)), _cell(_row()), _cell(_row(scale=4)))
    with_ = _report(_cell(_row(sr_method="none", scale=1)), _cell(_row(counts=better)))

    comparison = compare_reports(without, with_)

    # the x4 row is missing from the augmented report
    assert [(row.sr_method, row.scale) for row in comparison] == [("bicubic", 2), ("none", 1)]

    values = comparison_csv_row(comparison[0])
    assert values["fnr_without"] == "5.5"
    assert values["fnr_with"] == "1.0"
    assert values["fpr_with"] == "4.0"
