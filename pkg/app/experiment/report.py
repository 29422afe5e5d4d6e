import csv
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from logging import getLogger
from pathlib import Path
from typing import Literal

from matplotlib.figure import Figure
from more_itertools import bucket
from pydantic import BaseModel, ValidationError

from ..attack.config import Config as Attack
from ..common import fixed, toolkit_version
from ..dataset.model import ManifestMetadata
from ..errors import IngestionError
from ..evaluation.metrics import percent
from ..evaluation.model import Aggregation, CellReport, CellRow
from .similarity import Region, SimilarityRow

_logger = getLogger(__name__)

# same order as published result tables
CSV_COLUMNS = (
    "model",
    "forgery_method",
    "sr",
    "sr_method",
    "scale",
    "fnr",
    "fpr",
    "recall",
    "precision",
    "auc",
    "accuracy",
)
SIMILARITY_CSV_COLUMNS = ("forgery_method", "sr_method", "scale", "count", "ssim", "psnr_db", "region")
COMPARISON_CSV_COLUMNS = (
    "forgery_method",
    "sr_method",
    "scale",
    "fnr_without",
    "fnr_with",
    "fpr_without",
    "fpr_with",
    "auc_without",
    "auc_with",
    "accuracy_without",
    "accuracy_with",
)

METRICS = ("fnr", "fpr", "recall", "precision", "auc", "accuracy")
METRICS_PLOTTED = ("fnr", "fpr", "auc")

REPORT_JSON = "report.json"
REPORT_CSV = "report.csv"
SIMILARITY_CSV = "similarity.csv"
COMPARISON_CSV = "comparison.csv"


class RowRecord(BaseModel):
    # exact ratios as `numerator/denominator` strings, None for undefined rows
    model: str
    forgery_method: str
    sr: bool
    sr_method: str
    scale: int

    pristine_count: int
    fake_count: int

    tp: int | None = None
    fp: int | None = None
    tn: int | None = None
    fn: int | None = None

    fnr: str | None = None
    fpr: str | None = None
    recall: str | None = None
    precision: str | None = None
    auc: str | None = None
    accuracy: str | None = None

    error: str | None = None

    def metric(self, name: str) -> Fraction | None:
        value: str | None = getattr(self, name)
        return Fraction(value) if value is not None else None


class CellRecord(BaseModel):
    model: str
    sr_method: str
    scale: int
    attack: Attack | None

    threshold: float
    aggregation: Aggregation

    skipped_no_face: int
    failed_entries: int
    error: str | None

    rows: Sequence[RowRecord]


class SimilarityRecord(BaseModel):
    forgery_method: str
    sr_method: str
    scale: int
    count: int

    # rendered, `inf` for identical images
    ssim: str
    psnr_db: str

    region: Region


class ExperimentReport(BaseModel):
    # report.json

    # used to distinguish report versions if more then one is available
    sr_attack: Literal["report:v1"]

    name: str
    version: str
    config_hash: str

    # provenance of the evaluated manifest
    source: str
    source_config_hash: str

    threshold: float
    aggregation: Aggregation

    cells: Sequence[CellRecord]
    similarity: Sequence[SimilarityRecord]

    @property
    def rows(self) -> Sequence[RowRecord]:
        return [row for cell in self.cells for row in cell.rows]


def row_record(row: CellRow) -> RowRecord:
    record = RowRecord(
        model=row.model,
        forgery_method=row.forgery_method,
        sr=row.sr,
        sr_method=row.sr_method,
        scale=row.scale,
        pristine_count=row.pristine_count,
        fake_count=row.fake_count,
        error=row.error,
    )
    if row.metrics is None:
        return record

    metrics = row.metrics
    return record.model_copy(
        update={
            "tp": metrics.counts.tp,
            "fp": metrics.counts.fp,
            "tn": metrics.counts.tn,
            "fn": metrics.counts.fn,
        }
        | {name: str(getattr(metrics, name)) for name in METRICS}
    )


def cell_record(cell: CellReport, attack: Attack | None) -> CellRecord:
    return CellRecord(
        model=cell.model,
        sr_method=cell.sr_method,
        scale=cell.scale,
        attack=attack,
        threshold=cell.threshold,
        aggregation=cell.aggregation,
        skipped_no_face=cell.skipped_no_face,
        failed_entries=cell.failed_entries,
        error=cell.error,
        rows=[row_record(row) for row in cell.rows],
    )


def similarity_record(row: SimilarityRow) -> SimilarityRecord:
    return SimilarityRecord(
        forgery_method=row.forgery_method,
        sr_method=row.sr_method,
        scale=row.scale,
        count=row.count,
        ssim=fixed(row.ssim_mean, 3),
        psnr_db=fixed(row.psnr_mean_db, 1),
        region=row.region,
    )


def csv_row(row: RowRecord) -> Mapping[str, str]:
    # percentages, one decimal, empty for undefined metrics
    values = {name: percent(value) if (value := row.metric(name)) is not None else "" for name in METRICS}

    return {
        "model": row.model,
        "forgery_method": row.forgery_method,
        "sr": "yes" if row.sr else "no",
        "sr_method": row.sr_method,
        "scale": str(row.scale),
    } | values


def _write_csv(path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)

    with path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.DictWriter(file, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def write_rows_csv(rows: Iterable[RowRecord], path: Path) -> None:
    _write_csv(path, CSV_COLUMNS, map(csv_row, rows))


def write_similarity_csv(records: Iterable[SimilarityRecord], path: Path) -> None:
    _write_csv(
        path,
        SIMILARITY_CSV_COLUMNS,
        (
            {
                "forgery_method": record.forgery_method,
                "sr_method": record.sr_method,
                "scale": str(record.scale),
                "count": str(record.count),
                "ssim": record.ssim,
                "psnr_db": record.psnr_db,
                "region": record.region,
            }
            for record in records
        ),
    )


def write_report(report: ExperimentReport, out_dir: Path) -> None:
    # report.json (exact), report.csv (table), similarity.csv (if any)
    out_dir.mkdir(parents=True, exist_ok=True)

    (out_dir / REPORT_JSON).write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    write_rows_csv(report.rows, out_dir / REPORT_CSV)

    if report.similarity:
        write_similarity_csv(report.similarity, out_dir / SIMILARITY_CSV)


def read_report(path: Path) -> ExperimentReport:
    try:
        return ExperimentReport.model_validate_json(path.read_text(encoding="utf-8"))
    except (OSError, ValidationError) as error:
        raise IngestionError(f"Unable to read report `{path}`: {error}") from error


def plot_metrics(report: ExperimentReport, out_dir: Path) -> Sequence[Path]:
    # one figure per metric, x: scale, one line per (model, forgery method, sr method)
    # the unattacked row of a (model, forgery method) is the scale 1 point of every line
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = [row for row in report.rows if row.error is None]
    baseline = {(row.model, row.forgery_method): row for row in rows if not row.sr}
    series = bucket((row for row in rows if row.sr), key=lambda row: (row.model, row.forgery_method, row.sr_method))
    series_keys = sorted({(row.model, row.forgery_method, row.sr_method) for row in rows if row.sr})

    paths = list[Path]()
    for metric in METRICS_PLOTTED:
        figure = Figure(figsize=(6.0, 4.0))
        axes = figure.add_subplot()

        for model, forgery_method, sr_method in series_keys:
            points = sorted(series[(model, forgery_method, sr_method)], key=lambda row: row.scale)
            if (model, forgery_method) in baseline:
                points.insert(0, baseline[(model, forgery_method)])

            axes.plot(
                [point.scale for point in points],
                [float(point.metric(metric) or 0) * 100.0 for point in points],
                marker="o",
                label=f"{model} / {forgery_method} / {sr_method}",
            )

        # detectors evaluated only without attack, as single points
        for (model, forgery_method), row in sorted(baseline.items()):
            if not any(key[:2] == (model, forgery_method) for key in series_keys):
                axes.plot(
                    [1],
                    [float(row.metric(metric) or 0) * 100.0],
                    marker="o",
                    label=f"{model} / {forgery_method}",
                )

        axes.set_title(f"{report.name}: {metric.upper()} vs scale")
        axes.set_xlabel("scale factor K (1 = no attack)")
        axes.set_ylabel(f"{metric.upper()} (%)")
        axes.set_ylim(0.0, 100.0)
        axes.grid(True, alpha=0.3)
        if axes.get_legend_handles_labels()[0]:
            axes.legend(fontsize="small")

        path = out_dir / f"plot_{metric}.png"
        figure.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
        paths.append(path)

    _logger.debug("Plots written to %s", out_dir)

    return paths


@dataclass(frozen=True, kw_only=True)
class ComparisonRow:
    # same (forgery method, sr method, scale) row evaluated by two detectors
    forgery_method: str
    sr_method: str
    scale: int

    without: RowRecord
    with_: RowRecord


def compare_reports(without: ExperimentReport, with_: ExperimentReport) -> Sequence[ComparisonRow]:
    # defense comparison: detector trained without vs with sr augmentation
    # rows are matched on (forgery method, sr method, scale), rows present in one report only are dropped
    def key(row: RowRecord) -> tuple[str, str, int]:
        return row.forgery_method, row.sr_method, row.scale

    rows_with = {key(row): row for row in with_.rows if row.error is None}

    comparison = list[ComparisonRow]()
    for row in sorted((row for row in without.rows if row.error is None), key=key):
        if key(row) not in rows_with:
            _logger.warning("Row %s is missing in the augmented report, skipped.", key(row))
            continue

        comparison.append(
            ComparisonRow(
                forgery_method=row.forgery_method,
                sr_method=row.sr_method,
                scale=row.scale,
                without=row,
                with_=rows_with[key(row)],
            )
        )

    return comparison


def comparison_csv_row(row: ComparisonRow) -> Mapping[str, str]:
    values = {"forgery_method": row.forgery_method, "sr_method": row.sr_method, "scale": str(row.scale)}
    for metric in ("fnr", "fpr", "auc", "accuracy"):
        for suffix, record in (("without", row.without), ("with", row.with_)):
            value = record.metric(metric)
            values[f"{metric}_{suffix}"] = percent(value) if value is not None else ""

    return values


def write_comparison_csv(rows: Iterable[ComparisonRow], path: Path) -> None:
    _write_csv(path, COMPARISON_CSV_COLUMNS, map(comparison_csv_row, rows))


def cell_report(
    cell: CellReport,
    attack: Attack | None,
    *,
    name: str,
    config_hash_: str,
    metadata: ManifestMetadata,
) -> ExperimentReport:
    # single cell evaluation (`eval` command) in the experiment report format
    return ExperimentReport(
        sr_attack="report:v1",
        name=name,
        version=toolkit_version(),
        config_hash=config_hash_,
        source=metadata.source,
        source_config_hash=metadata.config_hash,
        threshold=cell.threshold,
        aggregation=cell.aggregation,
        cells=[cell_record(cell, attack)],
        similarity=[],
    )


def write_cell_report(report: ExperimentReport, out: Path) -> Sequence[Path]:
    # <out>.json and <out>.csv, a .json / .csv suffix given on out is replaced
    if out.suffix in (".json", ".csv"):
        out = out.with_suffix("")

    paths = [out.with_name(f"{out.name}.json"), out.with_name(f"{out.name}.csv")]

    paths[0].parent.mkdir(parents=True, exist_ok=True)
    paths[0].write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    write_rows_csv(report.rows, paths[1])

    return paths
