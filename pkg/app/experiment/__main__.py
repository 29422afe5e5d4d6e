from collections.abc import Sequence
from pathlib import Path
from typing import Annotated

from rich.panel import Panel
from rich.table import Column, Table
from rich.text import Text
from typer import Argument, Option, Typer

from .._cli import ConfigPathOption, ModelRootOption, WorkersOption, console, exit_codes, metrics_table, percent_text
from ..config import load_config, resolve_attack
from ..dataset.manifest import read_manifest
from ..errors import IngestionError, RunError
from .config import load_experiment_spec
from .gallery import GALLERY_COUNT_DEFAULT, gallery
from .report import (
    METRICS,
    ComparisonRow,
    ExperimentReport,
    SimilarityRecord,
    compare_reports,
    read_report,
    similarity_record,
    write_comparison_csv,
    write_similarity_csv,
)
from .runner import run_experiment
from .similarity import similarity_report

app = Typer()


@app.command()
def report(
    spec_path: Annotated[Path, Argument(help="Experiment file (JSON).")],
    workers: WorkersOption = None,
    model_root: ModelRootOption = None,
) -> None:
    with exit_codes():
        spec = load_experiment_spec(spec_path)
        if workers is not None:
            spec = spec.model_copy(update={"workers": workers})

        with console.status(f"Running experiment `{spec.name}`..."):
            result = run_experiment(spec, model_root=model_root)

    display_experiment(result.report, result.files)


@app.command()
def similarity(
    original_path: Annotated[Path, Option("--original", help="Manifest before the attack.")],
    attacked_path: Annotated[Path, Option("--attacked", help="Manifest after the attack.")],
    out: Annotated[Path | None, Option("--out", help="Similarity table (CSV).")] = None,
) -> None:
    with exit_codes():
        try:
            original = read_manifest(original_path)
            attacked = read_manifest(attacked_path)
        except IngestionError as error:
            raise RunError(f"Unable to load manifest: {error}") from error

        with console.status("Comparing..."):
            records = [similarity_record(row) for row in similarity_report(original, attacked)]

        if out is not None:
            write_similarity_csv(records, out)

    display_similarity(records)


@app.command()
def compare(
    without_path: Annotated[Path, Option("--without", help="Report of the detector trained without SR augmentation.")],
    with_path: Annotated[Path, Option("--with", help="Report of the detector trained with SR augmentation.")],
    out: Annotated[Path | None, Option("--out", help="Comparison table (CSV).")] = None,
) -> None:
    with exit_codes():
        rows = compare_reports(read_report(without_path), read_report(with_path))
        if not rows:
            raise RunError("Reports have no rows in common.")

        if out is not None:
            write_comparison_csv(rows, out)

    display_comparison(rows)


@app.command("gallery")
def gallery_(
    manifest_path: Annotated[Path, Option("--manifest", help="Dataset manifest (jsonl).")],
    out: Annotated[Path, Option("--out", help="Contact sheet (PNG).")],
    scales: Annotated[list[int] | None, Option("--scale", min=1, help="Scale factors, repeatable.")] = None,
    sr_backend_id: Annotated[str | None, Option("--sr", help="SR backend id.")] = None,
    count: Annotated[int, Option("--count", min=1, help="Entries shown.")] = GALLERY_COUNT_DEFAULT,
    config_path: ConfigPathOption = None,
    model_root: ModelRootOption = None,
) -> None:
    with exit_codes():
        config = load_config(config_path)
        attacks = [
            resolve_attack(config, scale=scale, sr_backend_id=sr_backend_id)
            for scale in (scales if scales else [2, 4])
        ]

        try:
            manifest = read_manifest(manifest_path)
        except IngestionError as error:
            raise RunError(f"Unable to load manifest: {error}") from error

        with console.status("Rendering..."):
            gallery(
                manifest,
                attacks,
                out,
                count=count,
                sr_backends=config.sr_backends,
                face_detectors=config.face_detectors,
                model_root=model_root,
            )

    console.print(Panel(Text(f"{out}"), title="Written", style="green"))


def display_experiment(report: ExperimentReport, files: Sequence[Path]) -> None:
    console.print(
        metrics_table(
            f"{report.name} (threshold {report.threshold}, {report.aggregation})",
            (
                (
                    row.model,
                    row.forgery_method,
                    row.sr,
                    row.sr_method,
                    row.scale,
                    {name: row.metric(name) for name in METRICS},
                )
                for row in report.rows
            ),
        )
    )

    for cell in report.cells:
        if cell.error is not None:
            console.print(Text(f"{cell.model} / {cell.sr_method} x{cell.scale} failed: {cell.error}", style="red"))

    if report.similarity:
        display_similarity(report.similarity)

    console.print(Panel(Text("\n".join(map(str, files))), title="Written", style="green"))


def display_similarity(records: Sequence[SimilarityRecord]) -> None:
    table = Table(
        Column("Forgery Method"),
        Column("SR Method"),
        Column("K", justify="right"),
        Column("Count", justify="right"),
        Column("SSIM", justify="right"),
        Column("PSNR (dB)", justify="right"),
        Column("Region"),
        title="Similarity",
    )

    for record in records:
        table.add_row(
            Text(record.forgery_method),
            Text(record.sr_method),
            Text(f"{record.scale}"),
            Text(f"{record.count}"),
            Text(record.ssim),
            Text(record.psnr_db),
            Text(record.region),
        )

    console.print(table)


def display_comparison(rows: Sequence[ComparisonRow]) -> None:
    table = Table(
        Column("Forgery Method"),
        Column("SR Method"),
        Column("K", justify="right"),
        *(
            Column(f"{metric.upper()} {suffix} (%)", justify="right")
            for metric in ("fnr", "fpr", "auc", "accuracy")
            for suffix in ("w/o", "w/")
        ),
        title="Without vs with SR augmentation",
    )

    for row in rows:
        table.add_row(
            Text(row.forgery_method),
            Text(row.sr_method),
            Text(f"{row.scale}"),
            *(
                percent_text(record.metric(metric), higher_is_better=metric in ("auc", "accuracy"))
                for metric in ("fnr", "fpr", "auc", "accuracy")
                for record in (row.without, row.with_)
            ),
        )

    console.print(table)


if __name__ == "__main__":
    app()
