from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from app.dataset.corpus import synthetic_pair
from app.dataset.model import DatasetManifest
from app.defense.augment import (
    GeometricDraw,
    add_noise,
    augment,
    augmented_stream,
    draw,
    geometric_transform,
    jpeg_compress,
    policy_rng,
    resolve_policy_backends,
)
from app.defense.config import AugmentationPolicy, BaselineOp, Composition, SRChoice, load_policy
from app.errors import BackendUnavailableError, SpecError
from app.imaging.model import ImageTensor
from app.sr.backends import BicubicBackend
from app.sr.roundtrip import sr_roundtrip


def _policy(**update: object) -> AugmentationPolicy:
    return AugmentationPolicy.default().model_copy(update=update)


def test_identity_policy_is_bitwise_identity(rng: np.random.Generator) -> None:
    img = ImageTensor(rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8))
    policy = AugmentationPolicy.identity()

    for index in range(50):
        assert augment(img, policy, policy_rng(policy, index)) == img


def test_certain_sr_equals_roundtrip() -> None:
    img, _ = synthetic_pair(0, 0)
    policy = _policy(sr_probability=1.0, sr_choices=[SRChoice(sr_backend_id="bicubic", scale=2)])

    augmented = augment(img, policy, policy_rng(policy, 0))

    assert augmented == sr_roundtrip(img, 2, BicubicBackend())


def test_sr_draw_frequencies() -> None:
    policy = AugmentationPolicy.default()

    choices = [draw(policy, policy_rng(policy, index)).sr_choice for index in range(10_000)]
    triggered = [choice for choice in choices if choice is not None]

    assert 0.47 <= len(triggered) / len(choices) <= 0.53
    for scale in (2, 4):
        assert 0.47 <= sum(1 for choice in triggered if choice.scale == scale) / len(triggered) <= 0.53


def test_augment_is_deterministic() -> None:
    img, _ = synthetic_pair(0, 1)
    policy = _policy(
        sr_probability=0.7,
        baseline_ops=[BaselineOp.NOISE, BaselineOp.JPEG_COMPRESSION, BaselineOp.GEOMETRIC],
        seed=11,
    )

    for index in range(20):
        first = augment(img, policy, policy_rng(policy, index))
        second = augment(img, policy, policy_rng(policy, index))

        assert first == second
        assert first.shape == img.shape


def test_replace_composition_never_stacks() -> None:
    baseline_ops = [BaselineOp.NOISE, BaselineOp.JPEG_COMPRESSION, BaselineOp.GEOMETRIC]

    certain = _policy(sr_probability=1.0, baseline_ops=baseline_ops, composition=Composition.REPLACE)
    for index in range(200):
        augmentation = draw(certain, policy_rng(certain, index))

        assert augmentation.sr_choice is not None
        assert augmentation.noise_sigma is None
        assert augmentation.jpeg_quality is None
        assert augmentation.geometric is None

    never = _policy(sr_probability=0.0, baseline_ops=baseline_ops, composition=Composition.REPLACE)
    draws = [draw(never, policy_rng(never, index)) for index in range(200)]

    assert all(augmentation.sr_choice is None for augmentation in draws)
    assert any(augmentation.noise_sigma is not None for augmentation in draws)


def test_alongside_composition_stacks() -> None:
    policy = _policy(sr_probability=1.0, baseline_ops=[BaselineOp.NOISE])
    draws = [draw(policy, policy_rng(policy, index)) for index in range(200)]

    assert all(augmentation.sr_choice is not None for augmentation in draws)
    assert any(augmentation.noise_sigma is not None for augmentation in draws)


def test_alongside_applies_sr_before_baseline_ops() -> None:
    img, _ = synthetic_pair(0, 2)
    policy = _policy(
        sr_probability=1.0,
        sr_choices=[SRChoice(sr_backend_id="bicubic", scale=4)],
        baseline_ops=[BaselineOp.JPEG_COMPRESSION],
    )

    index = next(index for index in range(200) if draw(policy, policy_rng(policy, index)).jpeg_quality is not None)
    quality = draw(policy, policy_rng(policy, index)).jpeg_quality
    assert quality is not None

    augmented = augment(img, policy, policy_rng(policy, index))

    assert augmented == jpeg_compress(sr_roundtrip(img, 4, BicubicBackend()), quality)
    assert augmented != sr_roundtrip(jpeg_compress(img, quality), 4, BicubicBackend())


def test_baseline_ops_keep_dimensions(rng: np.random.Generator) -> None:
    img = ImageTensor(rng.integers(0, 256, size=(30, 41, 3), dtype=np.uint8))

    assert add_noise(img, 5.0, rng).shape == img.shape
    assert jpeg_compress(img, 75).shape == img.shape
    assert geometric_transform(img, GeometricDraw(flip=True, angle=3.0, translate_x=0.02, translate_y=-0.04)).shape == (
        img.shape
    )


def test_geometric_identity_and_flip(rng: np.random.Generator) -> None:
    img = ImageTensor(rng.integers(0, 256, size=(12, 9, 3), dtype=np.uint8))

    assert geometric_transform(img, GeometricDraw(flip=False, angle=0.0, translate_x=0.0, translate_y=0.0)) == img

    flipped = geometric_transform(img, GeometricDraw(flip=True, angle=0.0, translate_x=0.0, translate_y=0.0))
    assert np.array_equal(flipped.pixels, img.pixels[:, ::-1])


def test_noise_with_zero_sigma(rng: np.random.Generator) -> None:
    img = ImageTensor(rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8))

    assert add_noise(img, 0.0, rng) == img


def test_policy_validation() -> None:
    with pytest.raises(ValidationError):
        AugmentationPolicy(sr_choices=[])
    with pytest.raises(ValidationError):
        AugmentationPolicy(sr_probability=1.5, sr_choices=[SRChoice(sr_backend_id="bicubic", scale=2)])
    with pytest.raises(ValidationError):
        AugmentationPolicy(
            sr_choices=[SRChoice(sr_backend_id="bicubic", scale=2)],
            baseline_ops=[BaselineOp.NOISE, BaselineOp.NOISE],
        )


def test_load_policy(tmp_path: Path) -> None:
    path = tmp_path / "policy.json"
    path.write_text('{"sr_probability": 0.25, "sr_choices": [{"sr_backend_id": "bicubic", "scale": 3}]}', "utf-8")

    policy = load_policy(path)
    assert policy.sr_probability == 0.25
    assert policy.sr_choices == [SRChoice(sr_backend_id="bicubic", scale=3)]

    with pytest.raises(SpecError):
        load_policy(tmp_path / "missing.json")

    path.write_text('{"sr_probability": 0.25}', "utf-8")
    with pytest.raises(SpecError):
        load_policy(path)


def test_policy_with_unknown_backend() -> None:
    policy = _policy(sr_choices=[SRChoice(sr_backend_id="edsr", scale=2)])

    with pytest.raises(BackendUnavailableError):
        resolve_policy_backends(policy)


def test_augmented_stream(small_corpus: DatasetManifest) -> None:
    policy = AugmentationPolicy.default()
    backends = resolve_policy_backends(policy)

    first = list(augmented_stream(small_corpus, policy, backends, epochs=2))
    second = list(augmented_stream(small_corpus, policy, backends, epochs=2))

    assert len(first) == 2 * len(small_corpus)
    assert [label for _, label in first[: len(small_corpus)]] == [entry.label for entry in small_corpus.entries]
    assert first == second
