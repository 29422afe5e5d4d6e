from collections.abc import Sequence
from fractions import Fraction
from logging import getLogger
from pathlib import Path
from tempfile import TemporaryDirectory

from more_itertools import bucket

from ..attack.config import Config as AttackConfig
from ..attack.engine import MAX_FAILURE_FRACTION_DEFAULT, attack_dataset
from ..common import PerThread, map_ordered
from ..dataset.model import DatasetManifest, Label, ManifestEntry
from ..errors import BackendUnavailableError, IngestionError, InvalidArgumentError, RunError
from ..faces.config import Config as FaceDetectors
from ..imaging.io import load_image
from ..sr.config import Config as SRBackends
from .detectors import Detector
from .metrics import THRESHOLD_DEFAULT, auc, compute_metrics, confusion
from .model import Aggregation, CellReport, CellRow, DetectionScore, ScoredManifest

_logger = getLogger(__name__)

# video is voted fake when strictly more than half of its frames are
VIDEO_MAJORITY = 0.5

FORGERY_METHOD_ALL = "all"


def score_dataset(
    manifest: DatasetManifest,
    detector: Detector | PerThread[Detector],
    *,
    workers: int = 1,
) -> ScoredManifest:
    # entries skipped by the attack (no face) or failed earlier are not scored
    def score_entry(entry: ManifestEntry) -> DetectionScore | str:
        detector_ = detector.get() if isinstance(detector, PerThread) else detector

        try:
            score = detector_.score(load_image(manifest.resolve(entry)))
        except BackendUnavailableError:
            raise
        except (IngestionError, InvalidArgumentError, RuntimeError) as error:
            _logger.warning("Scoring `%s` failed: %s", entry.entry_id, error)
            return str(error)

        if not 0.0 <= score <= 1.0:
            return f"Detector score {score} is outside [0, 1]."

        return DetectionScore(
            entry_id=entry.entry_id,
            label=entry.label,
            score=score,
            forgery_method=entry.forgery_method,
        )

    entries = sorted((entry for entry in manifest.entries if entry.usable), key=lambda entry: entry.entry_id)
    results = map_ordered(score_entry, entries, workers)

    errors = {entry.entry_id: entry.error for entry in manifest.entries if entry.error is not None}
    errors.update(
        (entry.entry_id, result) for entry, result in zip(entries, results) if not isinstance(result, DetectionScore)
    )

    return ScoredManifest(
        scores=[result for result in results if isinstance(result, DetectionScore)],
        errors=errors,
        skipped_no_face=sum(1 for entry in manifest.entries if entry.skipped_no_face),
    )


def aggregate_videos(
    scores: Sequence[DetectionScore],
    manifest: DatasetManifest,
    threshold: float = THRESHOLD_DEFAULT,
) -> Sequence[DetectionScore]:
    # one sample per (label, forgery method, source video), scored by the fraction of frames voted fake
    # entries without a source video form their own group
    def key(score: DetectionScore) -> str:
        video = manifest.by_entry_id[score.entry_id].source_video or score.entry_id
        return f"{score.label}/{score.forgery_method}/{video}"

    groups = bucket(scores, key=key)

    videos = list[DetectionScore]()
    for video_key in sorted(set(map(key, scores))):
        frames = list(groups[video_key])
        votes = Fraction(sum(1 for frame in frames if frame.score > threshold), len(frames))

        videos.append(
            DetectionScore(
                entry_id=video_key,
                label=frames[0].label,
                score=float(votes),
                forgery_method=frames[0].forgery_method,
            )
        )

    return videos


def cell_rows(
    scores: Sequence[DetectionScore],
    threshold: float,
    *,
    model: str,
    sr_method: str,
    scale: int,
) -> Sequence[CellRow]:
    # one row per forgery method, each with all pristine samples and that method's fakes
    pristine = [score for score in scores if score.label == Label.PRISTINE]
    methods = sorted({score.forgery_method for score in scores if score.label == Label.FAKE})

    rows = list[CellRow]()
    for method in methods or [FORGERY_METHOD_ALL]:
        fake = [score for score in scores if score.label == Label.FAKE and score.forgery_method == method]
        samples = pristine + fake

        try:
            metrics = compute_metrics(confusion(samples, threshold), auc(samples))
            error = None
        except InvalidArgumentError as error_:
            metrics = None
            error = str(error_)

        rows.append(
            CellRow(
                model=model,
                forgery_method=method,
                sr_method=sr_method,
                scale=scale,
                pristine_count=len(pristine),
                fake_count=len(fake),
                metrics=metrics,
                error=error,
            )
        )

    return rows


def evaluate_cell(
    manifest: DatasetManifest,
    detector: Detector | PerThread[Detector],
    attack: AttackConfig | None,
    threshold: float = THRESHOLD_DEFAULT,
    *,
    model: str = "detector",
    work_dir: Path | None = None,
    sr_backends: SRBackends | None = None,
    face_detectors: FaceDetectors | None = None,
    model_root: Path | None = None,
    workers: int = 1,
    max_failure_fraction: float = MAX_FAILURE_FRACTION_DEFAULT,
    aggregation: Aggregation = Aggregation.FRAME,
) -> CellReport:
    # attack (if configured) -> score -> metrics, one row per forgery method
    # any failure marks the cell failed instead of propagating, so sweeps can continue
    # without an attack, a manifest attacked earlier reports its own attack
    sr_method = attack.sr_backend_id if attack is not None else manifest.metadata.sr_method
    scale = attack.scale if attack is not None else manifest.metadata.scale

    def failed(error: Exception) -> CellReport:
        _logger.warning("Cell %s / %s x%d failed: %s", model, sr_method, scale, error)
        return CellReport(
            model=model,
            sr_method=sr_method,
            scale=scale,
            threshold=threshold,
            aggregation=aggregation,
            rows=[],
            skipped_no_face=0,
            failed_entries=0,
            error=str(error),
        )

    with TemporaryDirectory(prefix="sr-attack-") as temporary_dir:
        try:
            evaluated = manifest
            if attack is not None:
                evaluated = attack_dataset(
                    manifest,
                    attack,
                    work_dir if work_dir is not None else Path(temporary_dir),
                    sr_backends=sr_backends,
                    face_detectors=face_detectors,
                    model_root=model_root,
                    workers=workers,
                    max_failure_fraction=max_failure_fraction,
                )

            scored = score_dataset(evaluated, detector, workers=workers)
        except (InvalidArgumentError, IngestionError, RunError, BackendUnavailableError) as error:
            return failed(error)

    scores = scored.scores
    threshold_rows = threshold
    if aggregation == Aggregation.VIDEO:
        scores = aggregate_videos(scores, evaluated, threshold)
        threshold_rows = VIDEO_MAJORITY

    return CellReport(
        model=model,
        sr_method=sr_method,
        scale=scale,
        threshold=threshold,
        aggregation=aggregation,
        rows=cell_rows(scores, threshold_rows, model=model, sr_method=sr_method, scale=scale),
        skipped_no_face=scored.skipped_no_face,
        failed_entries=len(scored.errors),
    )
