from fractions import Fraction
from pathlib import Path

import pytest

from app.dataset.corpus import CORPUS_FACE_BOX
from app.dataset.model import DatasetManifest, Label, ManifestMetadata
from app.defense.config import AugmentationPolicy
from app.defense.train import ToyTrainer, fit_threshold, load_trainer, train_with_augmentation, write_detector_artifact
from app.errors import InvalidArgumentError, SpecError
from app.evaluation.config import ConfigToy, DetectorArtifact
from app.evaluation.detectors import build_detector, load_detector_artifact
from app.evaluation.harness import evaluate_cell
from app.evaluation.model import MetricsReport

P = Label.PRISTINE
F = Label.FAKE


def _metrics(manifest: DatasetManifest, artifact: DetectorArtifact) -> MetricsReport:
    report = evaluate_cell(manifest, build_detector(artifact.detector, metadata=manifest.metadata), None)

    metrics = report.rows[0].metrics
    assert metrics is not None
    return metrics


def test_fit_threshold_separable() -> None:
    threshold, balanced_accuracy = fit_threshold([1.0, 2.0, 10.0, 11.0], [P, P, F, F])

    assert threshold == 6.0
    assert balanced_accuracy == 1.0


def test_fit_threshold_overlapping() -> None:
    threshold, balanced_accuracy = fit_threshold([1.0, 3.0, 2.0, 4.0], [P, P, F, F])

    # best split keeps one sample per class on the wrong side
    assert balanced_accuracy == 0.75
    assert threshold in (1.5, 3.5)


def test_fit_threshold_degenerate() -> None:
    assert fit_threshold([4.0, 4.0], [P, F]) == (4.0, 0.5)
    assert fit_threshold([0.0, 0.0], [P, F]) == (1.0, 0.5)

    with pytest.raises(InvalidArgumentError):
        fit_threshold([1.0, 2.0], [F, F])


def test_toy_training_on_clean_corpus(toy_artifact: DetectorArtifact, corpus: DatasetManifest) -> None:
    assert isinstance(toy_artifact.detector, ConfigToy)
    assert toy_artifact.training.trainer == "toy"
    assert toy_artifact.training.samples == len(corpus)
    assert toy_artifact.training.results["balanced_accuracy"] >= 0.95


def test_augmentation_moves_threshold(toy_artifact: DetectorArtifact, toy_artifact_augmented: DetectorArtifact) -> None:
    assert isinstance(toy_artifact.detector, ConfigToy)
    assert isinstance(toy_artifact_augmented.detector, ConfigToy)

    assert toy_artifact_augmented.detector.laplacian_threshold < toy_artifact.detector.laplacian_threshold
    assert toy_artifact_augmented.training.policy["sr_probability"] == 0.5


def test_augmented_training_recovers_attacked_fakes(
    corpus: DatasetManifest,
    corpus_attacked_x2: DatasetManifest,
    toy_artifact: DetectorArtifact,
    toy_artifact_augmented: DetectorArtifact,
) -> None:
    plain_attacked = _metrics(corpus_attacked_x2, toy_artifact)
    augmented_attacked = _metrics(corpus_attacked_x2, toy_artifact_augmented)

    assert augmented_attacked.fnr < plain_attacked.fnr

    plain_clean = _metrics(corpus, toy_artifact)
    augmented_clean = _metrics(corpus, toy_artifact_augmented)

    assert plain_clean.accuracy - augmented_clean.accuracy <= Fraction(5, 100)


def test_training_on_empty_manifest() -> None:
    empty = DatasetManifest(entries=[], metadata=ManifestMetadata(source="empty"))

    with pytest.raises(InvalidArgumentError):
        train_with_augmentation(empty, AugmentationPolicy.identity(), ToyTrainer())


def test_detector_artifact_round_trip(toy_artifact: DetectorArtifact, tmp_path: Path) -> None:
    path = tmp_path / "models" / "detector.json"

    write_detector_artifact(toy_artifact, path)

    assert load_detector_artifact(path) == toy_artifact


def test_toy_artifact_records_face_box(toy_artifact: DetectorArtifact) -> None:
    assert isinstance(toy_artifact.detector, ConfigToy)
    assert toy_artifact.detector.face_box is not None
    assert toy_artifact.detector.face_box.to_box() == CORPUS_FACE_BOX


def test_load_trainer() -> None:
    assert isinstance(load_trainer("app.defense.train:ToyTrainer"), ToyTrainer)

    with pytest.raises(SpecError):
        load_trainer("app.defense.train")
    with pytest.raises(SpecError):
        load_trainer("app.missing:Trainer")
    with pytest.raises(SpecError):
        load_trainer("app.defense.train:MissingTrainer")
