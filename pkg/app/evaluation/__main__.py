from collections.abc import Sequence
from pathlib import Path
from typing import Annotated

from pydantic import ValidationError
from rich.panel import Panel
from rich.text import Text
from typer import Option, Typer

from .._cli import ConfigPathOption, ModelRootOption, WorkersOption, console, exit_codes, metrics_table
from ..attack.config import Config as AttackConfig
from ..common import PerThread, config_hash
from ..config import load_config
from ..dataset.manifest import balance_check, read_manifest
from ..errors import IngestionError, RunError, SpecError
from ..experiment.report import METRICS, ExperimentReport, cell_report, write_cell_report
from .detectors import Detector, resolve_detector
from .harness import evaluate_cell
from .model import Aggregation

app = Typer()


def _load_attack(path: Path) -> AttackConfig:
    try:
        return AttackConfig.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as error:
        raise SpecError(f"Unable to read attack config `{path}`: {error}") from error
    except ValidationError as error:
        raise SpecError(f"Invalid attack config `{path}`:\n{error}") from error


@app.command("eval")
def eval_(
    manifest_path: Annotated[Path, Option("--manifest", help="Dataset manifest (jsonl).")],
    detector_id: Annotated[str, Option("--detector", help="Scoring detector id.")],
    out: Annotated[Path, Option("--out", help="Report path, <out>.csv and <out>.json are written.")],
    attack_path: Annotated[
        Path | None,
        Option("--attack-config", help="Attack applied before scoring (JSON), overrides config."),
    ] = None,
    threshold: Annotated[float | None, Option("--threshold", min=0.0, max=1.0, help="Decision threshold.")] = None,
    aggregation: Annotated[Aggregation | None, Option("--aggregation", help="Frame or video level samples.")] = None,
    workers: WorkersOption = None,
    config_path: ConfigPathOption = None,
    model_root: ModelRootOption = None,
) -> None:
    with exit_codes():
        config = load_config(config_path)
        attack = _load_attack(attack_path) if attack_path is not None else config.attack
        threshold = threshold if threshold is not None else config.threshold
        aggregation = aggregation if aggregation is not None else config.aggregation
        workers = workers if workers is not None else config.workers

        try:
            manifest = read_manifest(manifest_path)
        except IngestionError as error:
            raise RunError(f"Unable to load manifest: {error}") from error
        balance_check(manifest)

        def detector_build() -> Detector:
            return resolve_detector(detector_id, config.detectors, metadata=manifest.metadata, model_root=model_root)

        # fail fast on unknown or broken detectors
        detector = detector_build()

        with console.status("Evaluating..."):
            cell = evaluate_cell(
                manifest,
                detector if workers == 1 else PerThread(detector_build),
                attack,
                threshold,
                model=detector_id,
                sr_backends=config.sr_backends,
                face_detectors=config.face_detectors,
                model_root=model_root,
                workers=workers,
                max_failure_fraction=config.max_failure_fraction,
                aggregation=aggregation,
            )

        if cell.error is not None:
            raise RunError(f"Evaluation failed: {cell.error}")

        report = cell_report(
            cell,
            attack,
            name=detector_id,
            config_hash_=config_hash(config.model_copy(update={"attack": attack, "threshold": threshold})),
            metadata=manifest.metadata,
        )
        paths = write_cell_report(report, out)

    display_report(report, paths)


def display_report(report: ExperimentReport, paths: Sequence[Path]) -> None:
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
        if cell.skipped_no_face or cell.failed_entries:
            console.print(
                Text(
                    f"{cell.model} / {cell.sr_method} x{cell.scale}: "
                    f"{cell.skipped_no_face} entries without face, {cell.failed_entries} failed",
                    style="yellow",
                )
            )

    console.print(Panel(Text("\n".join(map(str, paths))), title="Written", style="green"))


if __name__ == "__main__":
    app()
