from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from io import BytesIO
from logging import getLogger
from pathlib import Path

import cv2
import numpy as np
from PIL import Image

from ..dataset.model import DatasetManifest, Label
from ..imaging.io import load_image
from ..imaging.model import ImageTensor
from ..imaging.resize import quantize
from ..sr.backends import check_scale, resolve_sr_backend
from ..sr.config import Config as SRBackends
from ..sr.model import SRBackend
from ..sr.roundtrip import sr_roundtrip
from .config import AugmentationPolicy, BaselineOp, Composition, SRChoice

_logger = getLogger(__name__)

BASELINE_OP_PROBABILITY = 0.5

NOISE_SIGMA_MAX = 10.0
JPEG_QUALITY_MIN = 60
JPEG_QUALITY_MAX = 95
GEOMETRIC_ROTATION_MAX = 5.0  # degrees
GEOMETRIC_TRANSLATION_MAX = 0.05  # fraction of image size

type Sample = tuple[ImageTensor, Label]


@dataclass(frozen=True, kw_only=True)
class GeometricDraw:
    flip: bool
    angle: float
    translate_x: float
    translate_y: float


@dataclass(frozen=True, kw_only=True)
class AugmentationDraw:
    # everything random about augmenting one sample, None means not applied
    sr_choice: SRChoice | None = None
    noise_sigma: float | None = None
    jpeg_quality: int | None = None
    geometric: GeometricDraw | None = None

    def __post_init__(self) -> None:
        assert self.noise_sigma is None or 0.0 <= self.noise_sigma <= NOISE_SIGMA_MAX
        assert self.jpeg_quality is None or JPEG_QUALITY_MIN <= self.jpeg_quality <= JPEG_QUALITY_MAX


def policy_rng(policy: AugmentationPolicy, index: int) -> np.random.Generator:
    # per-sample stream, independent of what was drawn for other samples
    return np.random.default_rng([policy.seed, index])


def draw(policy: AugmentationPolicy, rng: np.random.Generator) -> AugmentationDraw:
    # draw order: sr trigger, sr choice, then per baseline op (trigger, parameters)
    sr_choice: SRChoice | None = None
    if rng.random() < policy.sr_probability:
        sr_choice = policy.sr_choices[int(rng.integers(len(policy.sr_choices)))]

    noise_sigma: float | None = None
    jpeg_quality: int | None = None
    geometric: GeometricDraw | None = None
    for baseline_op in policy.baseline_ops:
        if rng.random() >= BASELINE_OP_PROBABILITY:
            continue

        match baseline_op:
            case BaselineOp.NOISE:
                noise_sigma = float(rng.uniform(0.0, NOISE_SIGMA_MAX))
            case BaselineOp.JPEG_COMPRESSION:
                jpeg_quality = int(rng.integers(JPEG_QUALITY_MIN, JPEG_QUALITY_MAX, endpoint=True))
            case BaselineOp.GEOMETRIC:
                geometric = GeometricDraw(
                    flip=bool(rng.random() < 0.5),
                    angle=float(rng.uniform(-GEOMETRIC_ROTATION_MAX, GEOMETRIC_ROTATION_MAX)),
                    translate_x=float(rng.uniform(-GEOMETRIC_TRANSLATION_MAX, GEOMETRIC_TRANSLATION_MAX)),
                    translate_y=float(rng.uniform(-GEOMETRIC_TRANSLATION_MAX, GEOMETRIC_TRANSLATION_MAX)),
                )
            case _:
                assert False

    if policy.composition == Composition.REPLACE and sr_choice is not None:
        return AugmentationDraw(sr_choice=sr_choice)

    return AugmentationDraw(
        sr_choice=sr_choice,
        noise_sigma=noise_sigma,
        jpeg_quality=jpeg_quality,
        geometric=geometric,
    )


def add_noise(img: ImageTensor, sigma: float, rng: np.random.Generator) -> ImageTensor:
    values = img.pixels.astype(np.float64) + rng.normal(0.0, sigma, size=img.pixels.shape)
    return ImageTensor(quantize(values))


def jpeg_compress(img: ImageTensor, quality: int) -> ImageTensor:
    buffer = BytesIO()
    Image.fromarray(img.pixels.copy()).save(buffer, format="JPEG", quality=quality)
    buffer.seek(0)

    with Image.open(buffer) as image:
        return ImageTensor(np.asarray(image.convert("RGB"), dtype=np.uint8).copy())


def geometric_transform(img: ImageTensor, geometric: GeometricDraw) -> ImageTensor:
    pixels = img.pixels
    if geometric.flip:
        pixels = pixels[:, ::-1]

    matrix = cv2.getRotationMatrix2D(((img.width - 1) / 2.0, (img.height - 1) / 2.0), geometric.angle, 1.0)
    matrix[0, 2] += geometric.translate_x * img.width
    matrix[1, 2] += geometric.translate_y * img.height

    warped = cv2.warpAffine(
        np.ascontiguousarray(pixels),
        matrix,
        (img.width, img.height),
        flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_REFLECT_101,
    )

    return ImageTensor(np.ascontiguousarray(warped, dtype=np.uint8))


def resolve_policy_backends(
    policy: AugmentationPolicy,
    sr_backends: SRBackends | None = None,
    *,
    model_root: Path | None = None,
) -> Mapping[str, SRBackend]:
    # every choice is resolved upfront, unavailable backends fail the policy, not a random sample
    backends = dict[str, SRBackend]()
    for sr_choice in policy.sr_choices:
        if sr_choice.sr_backend_id not in backends:
            backends[sr_choice.sr_backend_id] = resolve_sr_backend(
                sr_choice.sr_backend_id,
                sr_backends if sr_backends is not None else SRBackends.default(),
                model_root=model_root,
            )

        check_scale(backends[sr_choice.sr_backend_id], sr_choice.scale)

    return backends


def augment(
    img: ImageTensor,
    policy: AugmentationPolicy,
    rng: np.random.Generator,
    backends: Mapping[str, SRBackend] | None = None,
) -> ImageTensor:
    # sr round-trip first, then baseline ops, output has input dimensions
    if backends is None:
        backends = resolve_policy_backends(policy)

    augmentation = draw(policy, rng)

    if augmentation.sr_choice is not None:
        img = sr_roundtrip(img, augmentation.sr_choice.scale, backends[augmentation.sr_choice.sr_backend_id])
    if augmentation.noise_sigma is not None:
        img = add_noise(img, augmentation.noise_sigma, rng)
    if augmentation.jpeg_quality is not None:
        img = jpeg_compress(img, augmentation.jpeg_quality)
    if augmentation.geometric is not None:
        img = geometric_transform(img, augmentation.geometric)

    return img


def augmented_stream(
    manifest: DatasetManifest,
    policy: AugmentationPolicy,
    backends: Mapping[str, SRBackend],
    *,
    epochs: int = 1,
) -> Iterator[Sample]:
    # manifest order, repeated per epoch, sample index counts across epochs
    # single consumer, deterministic for (seed, manifest order, policy)
    assert epochs >= 1

    entries = [entry for entry in manifest.entries if entry.usable]

    for epoch in range(epochs):
        _logger.debug("Augmented stream epoch %d / %d", epoch + 1, epochs)

        for position, entry in enumerate(entries):
            index = epoch * len(entries) + position
            img = load_image(manifest.resolve(entry))

            yield augment(img, policy, policy_rng(policy, index), backends), entry.label
