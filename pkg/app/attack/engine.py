import shutil
from collections.abc import Sequence
from dataclasses import dataclass, replace
from logging import getLogger
from pathlib import Path, PurePosixPath
from typing import Literal

from pydantic import BaseModel

from ..common import PerThread, config_hash, map_ordered, toolkit_version
from ..dataset.manifest import MANIFEST_NAME, write_manifest
from ..dataset.model import DatasetManifest, Label, ManifestAttack, ManifestEntry, ManifestMetadata
from ..errors import BackendUnavailableError, IngestionError, InvalidArgumentError, RunError
from ..faces.config import FACE_DETECTOR_ID_MANIFEST, ConfigBox
from ..faces.config import Config as FaceDetectors
from ..faces.detectors import FaceDetector, FixedBoxDetector, FullFrameDetector, build_face_detector
from ..faces.pipeline import crop, detect_faces, paste
from ..imaging.io import load_image, save_png
from ..imaging.model import ImageTensor
from ..sr.backends import check_scale, resolve_sr_backend
from ..sr.config import Config as SRBackends
from ..sr.model import SRBackend
from ..sr.roundtrip import sr_roundtrip
from .config import AttackScope
from .config import Config as AttackConfig
from .model import AttackOutcome

_logger = getLogger(__name__)

ATTACK_RUN_NAME = "attack_run.json"

MAX_FAILURE_FRACTION_DEFAULT = 0.1


@dataclass(frozen=True, kw_only=True)
class AttackResources:
    # stateful parts of the attack, one per worker
    face_detector: FaceDetector
    sr_backend: SRBackend


def resolve_face_detector(
    detector_id: str,
    face_detectors: FaceDetectors,
    *,
    metadata: ManifestMetadata | None = None,
    model_root: Path | None = None,
) -> FaceDetector:
    if detector_id == FACE_DETECTOR_ID_MANIFEST:
        # face location is known upfront, no detection needed
        if metadata is not None and metadata.face_crops:
            return FullFrameDetector()
        if metadata is not None and metadata.face_box is not None:
            return FixedBoxDetector(metadata.face_box.to_box())

        raise BackendUnavailableError(
            f"Face detector `{FACE_DETECTOR_ID_MANIFEST}` requires a manifest recording face crops or a face box."
        )

    config = face_detectors.get(detector_id)
    if config is None:
        raise BackendUnavailableError(f"Unknown face detector `{detector_id}`.")

    return build_face_detector(config, model_root=model_root)


def build_resources(
    config: AttackConfig,
    *,
    sr_backends: SRBackends | None = None,
    face_detectors: FaceDetectors | None = None,
    metadata: ManifestMetadata | None = None,
    model_root: Path | None = None,
) -> AttackResources:
    sr_backend = resolve_sr_backend(
        config.sr_backend_id,
        sr_backends if sr_backends is not None else SRBackends.default(),
        model_root=model_root,
    )
    check_scale(sr_backend, config.scale)

    face_detector = resolve_face_detector(
        config.face_detector_id,
        face_detectors if face_detectors is not None else FaceDetectors.default(),
        metadata=metadata,
        model_root=model_root,
    )

    return AttackResources(face_detector=face_detector, sr_backend=sr_backend)


def attack_frame(frame: ImageTensor, config: AttackConfig, resources: AttackResources | None = None) -> AttackOutcome:
    if resources is None:
        resources = build_resources(config)

    boxes = detect_faces(frame, resources.face_detector, margin=config.face_margin)
    if not boxes:
        return AttackOutcome(frame=frame, boxes=[], skipped_no_face=True)

    # every face is cropped from the input frame and attacked independently
    # pasted lowest confidence first, so where boxes overlap the most confident face ends on top
    face_crops = [crop(frame, box) for box in boxes]

    attacked = frame
    for face_crop in reversed(face_crops):
        image = sr_roundtrip(face_crop.image, config.scale, resources.sr_backend)
        attacked = paste(attacked, replace(face_crop, image=image))

    return AttackOutcome(frame=attacked, boxes=boxes, skipped_no_face=False)


class AttackRunBackend(BaseModel):
    id: str
    supported_scales: Sequence[int] | None
    model_artifact_path: str | None
    preprocessing: str | None


class AttackRunEntry(BaseModel):
    entry_id: str
    label: Label
    copied: bool
    skipped_no_face: bool
    faces_attacked: int | None
    face_boxes: Sequence[ConfigBox] | None
    error: str | None


class AttackRun(BaseModel):
    # attack_run.json, written next to the attacked manifest
    sr_attack: Literal["attack_run:v1"]

    version: str
    config: AttackConfig
    config_hash: str
    source: str
    sr_backend: AttackRunBackend

    attacked: int
    copied: int
    skipped_no_face: int
    failed: int

    entries: Sequence[AttackRunEntry]


def _output_path(out_dir: Path, entry: ManifestEntry, suffix: str) -> Path:
    # tree mirrors entry ids: <out_dir>/<entry_id><suffix>
    relative = PurePosixPath(entry.entry_id)
    if relative.is_absolute() or ".." in relative.parts or not relative.parts:
        raise InvalidArgumentError(f"Entry id `{entry.entry_id}` cannot be mapped to an output path.")

    return out_dir.joinpath(*relative.parts[:-1], relative.parts[-1] + suffix)


def attack_dataset(
    manifest: DatasetManifest,
    config: AttackConfig,
    out_dir: Path,
    *,
    sr_backends: SRBackends | None = None,
    face_detectors: FaceDetectors | None = None,
    model_root: Path | None = None,
    workers: int = 1,
    max_failure_fraction: float = MAX_FAILURE_FRACTION_DEFAULT,
) -> DatasetManifest:
    # writes attacked pngs, <out_dir>/manifest.jsonl and <out_dir>/attack_run.json
    # unreadable entries are recorded and skipped, the run fails when too many of them fail
    if workers < 1:
        raise InvalidArgumentError(f"Workers must be positive, got {workers}.")
    if not 0.0 <= max_failure_fraction <= 1.0:
        raise InvalidArgumentError(f"Failure fraction must be within [0, 1], got {max_failure_fraction}.")

    out_dir = out_dir.absolute()
    out_dir.mkdir(parents=True, exist_ok=True)

    resources = PerThread(
        lambda: build_resources(
            config,
            sr_backends=sr_backends,
            face_detectors=face_detectors,
            metadata=manifest.metadata,
            model_root=model_root,
        )
    )

    # fail fast on backends, before touching any entry
    sr_backend = resources.get().sr_backend

    def attack_entry(entry: ManifestEntry) -> ManifestEntry:
        source = manifest.resolve(entry)

        try:
            if config.attack_scope == AttackScope.FAKE_ONLY and entry.label == Label.PRISTINE:
                # byte-identical pass through
                destination = _output_path(out_dir, entry, source.suffix)
                destination.parent.mkdir(parents=True, exist_ok=True)
                shutil.copyfile(source, destination)

                return entry.model_copy(
                    update={
                        "path": destination,
                        "skipped_no_face": False,
                        "faces_attacked": None,
                        "face_boxes": None,
                        "error": None,
                    }
                )

            destination = _output_path(out_dir, entry, ".png")
            outcome = attack_frame(load_image(source), config, resources.get())
            save_png(outcome.frame, destination)
        except (IngestionError, InvalidArgumentError, OSError) as error:
            _logger.warning("Entry `%s` failed: %s", entry.entry_id, error)
            return entry.model_copy(update={"path": source, "error": str(error)})

        return entry.model_copy(
            update={
                "path": destination,
                "skipped_no_face": outcome.skipped_no_face,
                "faces_attacked": outcome.faces_attacked,
                "face_boxes": [ConfigBox.from_box(box) for box in outcome.boxes],
                "error": None,
            }
        )

    _logger.info(
        "Attacking %d entries with %s (scale %d, scope %s, %d workers)",
        len(manifest),
        config.sr_backend_id,
        config.scale,
        config.attack_scope,
        workers,
    )
    entries = map_ordered(attack_entry, manifest.entries, workers)

    copied = sum(1 for entry in entries if entry.error is None and entry.faces_attacked is None)
    skipped_no_face = sum(1 for entry in entries if entry.skipped_no_face)
    failed = sum(1 for entry in entries if entry.error is not None)
    attacked = len(entries) - copied - skipped_no_face - failed

    if skipped_no_face:
        _logger.warning("No face found in %d of %d entries, excluded from metrics.", skipped_no_face, len(entries))

    attacked_manifest = DatasetManifest(
        entries=entries,
        metadata=manifest.metadata.model_copy(
            update={
                "config_hash": config_hash(config),
                "attack": ManifestAttack(
                    sr_backend_id=config.sr_backend_id,
                    scale=config.scale,
                    scope=config.attack_scope,
                    face_detector_id=config.face_detector_id,
                    face_margin=config.face_margin,
                ),
            }
        ),
        root=out_dir,
    )

    descriptor = sr_backend.descriptor
    attack_run = AttackRun(
        sr_attack="attack_run:v1",
        version=toolkit_version(),
        config=config,
        config_hash=config_hash(config),
        source=manifest.metadata.source,
        sr_backend=AttackRunBackend(
            id=descriptor.id,
            supported_scales=sorted(descriptor.supported_scales) if descriptor.supported_scales is not None else None,
            model_artifact_path=str(descriptor.model_artifact_path) if descriptor.model_artifact_path else None,
            preprocessing=descriptor.preprocessing,
        ),
        attacked=attacked,
        copied=copied,
        skipped_no_face=skipped_no_face,
        failed=failed,
        entries=[
            AttackRunEntry(
                entry_id=entry.entry_id,
                label=entry.label,
                copied=entry.error is None and entry.faces_attacked is None,
                skipped_no_face=entry.skipped_no_face,
                faces_attacked=entry.faces_attacked,
                face_boxes=entry.face_boxes,
                error=entry.error,
            )
            for entry in entries
        ],
    )
    (out_dir / ATTACK_RUN_NAME).write_text(attack_run.model_dump_json(indent=2) + "\n", encoding="utf-8")
    write_manifest(attacked_manifest, out_dir / MANIFEST_NAME)

    if entries and failed / len(entries) > max_failure_fraction:
        raise RunError(
            f"{failed} of {len(entries)} entries failed, more than allowed fraction {max_failure_fraction}, "
            f"see `{out_dir / ATTACK_RUN_NAME}`."
        )

    return attacked_manifest
