from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from logging import getLogger
from pathlib import Path

from ..attack.config import Config as Attack
from ..attack.engine import attack_dataset
from ..common import config_hash, map_ordered, toolkit_version
from ..dataset.manifest import balance_check, read_manifest
from ..dataset.model import DatasetManifest
from ..errors import BackendUnavailableError, IngestionError, InvalidArgumentError, RunError
from ..evaluation.detectors import resolve_detector
from ..evaluation.harness import evaluate_cell
from ..evaluation.model import CellReport
from .config import ExperimentSpec
from .report import (
    REPORT_CSV,
    REPORT_JSON,
    SIMILARITY_CSV,
    ExperimentReport,
    SimilarityRecord,
    cell_record,
    plot_metrics,
    similarity_record,
    write_report,
)
from .similarity import similarity_report

_logger = getLogger(__name__)

ATTACKS_DIR = "attacks"


@dataclass(frozen=True, kw_only=True)
class ExperimentResult:
    report: ExperimentReport
    files: Sequence[Path]

    @property
    def cells_failed(self) -> int:
        return sum(1 for cell in self.report.cells if cell.error is not None)


def attack_slug(index: int, attack: Attack) -> str:
    return f"{index:02d}_{attack.sr_backend_id}_x{attack.scale}_{attack.attack_scope}"


def run_experiment(spec: ExperimentSpec, *, model_root: Path | None = None) -> ExperimentResult:
    # every distinct attack is run once, then every (detector, attack) cell is scored
    # cell failures are recorded, the run fails only if every cell fails
    try:
        manifest = read_manifest(spec.manifest_path)
    except IngestionError as error:
        raise RunError(f"Unable to load experiment manifest: {error}") from error

    balance_check(manifest)

    out_dir = spec.output_dir.absolute()
    out_dir.mkdir(parents=True, exist_ok=True)

    attacks = [attack for attack in dict.fromkeys(spec.attacks) if attack is not None]

    def run_attack(indexed: tuple[int, Attack]) -> DatasetManifest | str:
        index, attack = indexed
        try:
            return attack_dataset(
                manifest,
                attack,
                out_dir / ATTACKS_DIR / attack_slug(index, attack),
                sr_backends=spec.sr_backends,
                face_detectors=spec.face_detectors,
                model_root=model_root,
                max_failure_fraction=spec.max_failure_fraction,
            )
        except (InvalidArgumentError, IngestionError, RunError, BackendUnavailableError) as error:
            _logger.warning("Attack %s failed: %s", attack.key, error)
            return str(error)

    attacked: Mapping[Attack, DatasetManifest | str] = dict(
        zip(attacks, map_ordered(run_attack, list(enumerate(attacks)), spec.workers))
    )

    def run_cell(cell: tuple[str, Attack | None]) -> CellReport:
        detector_id, attack = cell

        evaluated = manifest if attack is None else attacked[attack]
        if isinstance(evaluated, str):
            return _failed_cell(spec, detector_id, attack, evaluated)

        try:
            detector = resolve_detector(
                detector_id,
                spec.detectors_registry,
                metadata=evaluated.metadata,
                model_root=model_root,
            )
        except BackendUnavailableError as error:
            return _failed_cell(spec, detector_id, attack, str(error))

        return evaluate_cell(
            evaluated,
            detector,
            None,
            spec.threshold,
            model=detector_id,
            aggregation=spec.aggregation,
        )

    _logger.info("Experiment `%s`: %d cells", spec.name, len(spec.cells))
    cells = map_ordered(run_cell, spec.cells, spec.workers)

    similarity = list[SimilarityRecord]()
    if spec.similarity:
        for attack in attacks:
            attacked_manifest = attacked[attack]
            if isinstance(attacked_manifest, str):
                continue

            similarity.extend(similarity_record(row) for row in similarity_report(manifest, attacked_manifest))

    report = ExperimentReport(
        sr_attack="report:v1",
        name=spec.name,
        version=toolkit_version(),
        # hashed without absolute paths
        config_hash=config_hash(
            spec.model_copy(update={"manifest_path": Path(spec.manifest_path.name), "output_dir": Path(".")})
        ),
        source=manifest.metadata.source,
        source_config_hash=manifest.metadata.config_hash,
        threshold=spec.threshold,
        aggregation=spec.aggregation,
        cells=[cell_record(cell, attack) for cell, (_, attack) in zip(cells, spec.cells)],
        similarity=similarity,
    )

    write_report(report, out_dir)
    files = [out_dir / REPORT_JSON, out_dir / REPORT_CSV]
    if report.similarity:
        files.append(out_dir / SIMILARITY_CSV)
    if spec.plots:
        files.extend(plot_metrics(report, out_dir))

    result = ExperimentResult(report=report, files=files)
    if result.cells_failed == len(cells):
        raise RunError(f"All {len(cells)} cells of experiment `{spec.name}` failed.")
    if result.cells_failed:
        _logger.warning("%d of %d cells failed, see report.", result.cells_failed, len(cells))

    return result


def _failed_cell(spec: ExperimentSpec, detector_id: str, attack: Attack | None, error: str) -> CellReport:
    _logger.warning("Cell %s / %s failed: %s", detector_id, attack.key if attack is not None else "none", error)

    return CellReport(
        model=detector_id,
        sr_method=attack.sr_backend_id if attack is not None else "none",
        scale=attack.scale if attack is not None else 1,
        threshold=spec.threshold,
        aggregation=spec.aggregation,
        rows=[],
        skipped_no_face=0,
        failed_entries=0,
        error=error,
    )
