from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from importlib import import_module
from logging import getLogger
from pathlib import Path
from typing import Annotated, Any, Protocol

import numpy as np
from annotated_types import Ge, Gt
from pydantic import BaseModel, ConfigDict, Field

from ..common import toolkit_version
from ..dataset.model import DatasetManifest, Label
from ..errors import InvalidArgumentError, SpecError
from ..evaluation.config import ConfigDetectorTrained, ConfigToy, DetectorArtifact, TrainingMetadata
from ..evaluation.detectors import ToyDetector
from ..faces.config import ConfigBox
from ..faces.model import BoundingBox
from ..sr.config import Config as SRBackends
from .augment import Sample, augmented_stream, resolve_policy_backends
from .config import AugmentationPolicy

_logger = getLogger(__name__)

TRAINER_TOY = "toy"


class Hyperparameters(BaseModel):
    # fine-tuning defaults for external trainers
    model_config = ConfigDict(frozen=True)

    learning_rate: Annotated[float, Gt(0.0)] = 0.01
    epochs: Annotated[int, Ge(1)] = 30

    # anything else the trainer understands
    extra: Mapping[str, Any] = Field(default_factory=dict)


@dataclass(frozen=True, kw_only=True)
class TrainerResult:
    detector: ConfigDetectorTrained

    # recorded in the artifact metadata
    results: Mapping[str, Any] = field(default_factory=dict)


class Trainer(Protocol):
    # consumes (augmented image, label) samples, one pass per epoch, in stream order

    @property
    def name(self) -> str: ...

    def hyperparameters_default(self) -> Hyperparameters: ...

    def train(self, samples: Iterable[Sample], hyperparameters: Hyperparameters) -> TrainerResult: ...


def fit_threshold(energies: Sequence[float], labels: Sequence[Label]) -> tuple[float, float]:
    # 1-d sweep over midpoints between consecutive distinct energies, predicting fake iff energy > threshold
    # maximizes balanced accuracy, ties broken by the widest gap (then the lowest threshold)
    # returns (threshold, balanced accuracy)
    assert len(energies) == len(labels)

    fake = np.array([label == Label.FAKE for label in labels], dtype=bool)
    fake_count = int(fake.sum())
    pristine_count = len(labels) - fake_count
    if fake_count == 0 or pristine_count == 0:
        raise InvalidArgumentError(
            f"Threshold fitting needs both classes, got {fake_count} fake and {pristine_count} pristine samples."
        )

    values = np.array(energies, dtype=np.float64)
    distinct = np.unique(values)
    if len(distinct) == 1:
        # nothing to separate
        return (float(distinct[0]) if distinct[0] > 0.0 else 1.0), 0.5

    # samples at or below each distinct value, per class
    pristine_at_or_below = np.searchsorted(np.sort(values[~fake]), distinct, side="right")
    fake_at_or_below = np.searchsorted(np.sort(values[fake]), distinct, side="right")

    # threshold between distinct[i] and distinct[i + 1]: tn = pristine <= distinct[i], tp = fake > distinct[i]
    tn = pristine_at_or_below[:-1]
    tp = fake_count - fake_at_or_below[:-1]

    # balanced accuracy scaled by 2 * fake_count * pristine_count, exact in integers
    score = tp.astype(np.int64) * pristine_count + tn.astype(np.int64) * fake_count
    gaps = np.diff(distinct)

    best = np.flatnonzero(score == score.max())
    index = int(best[np.argmax(gaps[best])])

    threshold = float((distinct[index] + distinct[index + 1]) / 2.0)
    balanced_accuracy = float(score[index]) / (2.0 * fake_count * pristine_count)

    return threshold, balanced_accuracy


class ToyTrainer:
    # fits the toy detector laplacian threshold, a single pass over the stream
    def __init__(self, face_box: BoundingBox | None = None) -> None:
        self.face_box = face_box

    @property
    def name(self) -> str:
        return TRAINER_TOY

    def hyperparameters_default(self) -> Hyperparameters:
        # learning rate is unused
        return Hyperparameters(epochs=1)

    def train(self, samples: Iterable[Sample], hyperparameters: Hyperparameters) -> TrainerResult:
        detector = ToyDetector(1.0, self.face_box)

        energies = list[float]()
        labels = list[Label]()
        for image, label in samples:
            energies.append(detector.energy(image))
            labels.append(label)

        threshold, balanced_accuracy = fit_threshold(energies, labels)
        _logger.info("Toy threshold %.4f, training balanced accuracy %.4f", threshold, balanced_accuracy)

        return TrainerResult(
            detector=ConfigToy(
                laplacian_threshold=threshold,
                face_box=ConfigBox.from_box(self.face_box) if self.face_box is not None else None,
            ),
            results={
                "balanced_accuracy": balanced_accuracy,
                "samples": len(energies),
            },
        )


def load_trainer(entry_point: str) -> Trainer:
    # external trainers: `package.module:factory`, factory() returns a Trainer
    module_name, separator, attribute = entry_point.partition(":")
    if not separator or not module_name or not attribute:
        raise SpecError(f"Trainer entry point must be `module:callable`, got `{entry_point}`.")

    try:
        factory = getattr(import_module(module_name), attribute)
    except (ImportError, AttributeError) as error:
        raise SpecError(f"Unable to load trainer `{entry_point}`: {error}") from error

    trainer: Trainer = factory()
    return trainer


def train_with_augmentation(
    manifest: DatasetManifest,
    policy: AugmentationPolicy,
    trainer: Trainer,
    *,
    hyperparameters: Hyperparameters | None = None,
    sr_backends: SRBackends | None = None,
    model_root: Path | None = None,
) -> DetectorArtifact:
    if not any(entry.usable for entry in manifest.entries):
        raise InvalidArgumentError(f"Nothing to train on, manifest `{manifest.metadata.source}` has no usable entries.")

    if hyperparameters is None:
        hyperparameters = trainer.hyperparameters_default()

    backends = resolve_policy_backends(policy, sr_backends, model_root=model_root)

    metadata = TrainingMetadata(
        trainer=trainer.name,
        version=toolkit_version(),
        source=manifest.metadata.source,
        source_config_hash=manifest.metadata.config_hash,
        samples=sum(1 for entry in manifest.entries if entry.usable) * hyperparameters.epochs,
        policy=policy.model_dump(mode="json"),
        hyperparameters=hyperparameters.model_dump(mode="json"),
    )

    _logger.info(
        "Training `%s` on %s (%d samples, sr probability %.2f, %s)",
        trainer.name,
        manifest.metadata.source,
        metadata.samples,
        policy.sr_probability,
        policy.composition,
    )

    samples = augmented_stream(manifest, policy, backends, epochs=hyperparameters.epochs)
    try:
        result = trainer.train(samples, hyperparameters)
    except Exception as error:
        error.add_note(f"training run: {metadata.model_dump_json()}")
        raise

    return DetectorArtifact(
        sr_attack="detector:v1",
        detector=result.detector,
        training=metadata.model_copy(update={"results": dict(result.results)}),
    )


def write_detector_artifact(artifact: DetectorArtifact, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(artifact.model_dump_json(indent=2) + "\n", encoding="utf-8")
