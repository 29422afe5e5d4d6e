from pathlib import Path

import hypothesis
import numpy as np
import pytest

from app.attack.config import Config as AttackConfig
from app.attack.engine import attack_dataset
from app.dataset.corpus import CORPUS_FACE_BOX, make_synthetic_corpus
from app.dataset.model import DatasetManifest
from app.defense.config import AugmentationPolicy
from app.defense.train import ToyTrainer, train_with_augmentation
from app.evaluation.config import ConfigToy, DetectorArtifact

hypothesis.settings.register_profile("fast", max_examples=5)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)

# 200 image corpus used by the end-to-end checks
CORPUS_PER_CLASS = 100
CORPUS_SEED = 7


@pytest.fixture(scope="session")
def corpus(tmp_path_factory: pytest.TempPathFactory) -> DatasetManifest:
    return make_synthetic_corpus(CORPUS_PER_CLASS, CORPUS_SEED, tmp_path_factory.mktemp("corpus"))


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory: pytest.TempPathFactory) -> DatasetManifest:
    return make_synthetic_corpus(5, 0, tmp_path_factory.mktemp("small_corpus"))


@pytest.fixture(scope="session")
def toy_artifact(corpus: DatasetManifest) -> DetectorArtifact:
    # fitted on the unattacked corpus, no augmentation
    return train_with_augmentation(corpus, AugmentationPolicy.identity(), ToyTrainer(CORPUS_FACE_BOX))


@pytest.fixture(scope="session")
def toy_artifact_augmented(corpus: DatasetManifest) -> DetectorArtifact:
    return train_with_augmentation(corpus, AugmentationPolicy.default(), ToyTrainer(CORPUS_FACE_BOX))


@pytest.fixture(scope="session")
def toy_config(toy_artifact: DetectorArtifact) -> ConfigToy:
    assert isinstance(toy_artifact.detector, ConfigToy)
    return toy_artifact.detector


def _attacked(corpus: DatasetManifest, scale: int, out_dir: Path) -> DatasetManifest:
    return attack_dataset(corpus, AttackConfig(scale=scale), out_dir)


@pytest.fixture(scope="session")
def corpus_attacked_x2(corpus: DatasetManifest, tmp_path_factory: pytest.TempPathFactory) -> DatasetManifest:
    return _attacked(corpus, 2, tmp_path_factory.mktemp("attacked_x2"))


@pytest.fixture(scope="session")
def corpus_attacked_x4(corpus: DatasetManifest, tmp_path_factory: pytest.TempPathFactory) -> DatasetManifest:
    return _attacked(corpus, 4, tmp_path_factory.mktemp("attacked_x4"))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
