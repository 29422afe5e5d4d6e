from logging import getLogger
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel

from ..common import config_hash
from ..errors import InvalidArgumentError
from ..faces.config import ConfigBox
from ..faces.model import BoundingBox
from ..imaging.io import save_png
from ..imaging.model import CHANNELS, ImageTensor
from .manifest import MANIFEST_NAME, write_manifest
from .model import (
    FORGERY_METHOD_NONE,
    FORGERY_METHOD_SYNTHETIC_CORPUS,
    DatasetManifest,
    Label,
    ManifestEntry,
    ManifestMetadata,
)

_logger = getLogger(__name__)

CORPUS_SIZE = 64
CORPUS_FACE_BOX = BoundingBox(x=16, y=16, w=32, h=32)

# smooth base: bilinear gradient between random corner values
_BASE_LOW = 40.0
_BASE_HIGH = 215.0
_NOISE_SIGMA = 1.5

# planted artifact: checkerboard of 2x2 pixel cells, +-amplitude, face box only
_CHECKER_CELL = 2
_CHECKER_AMPLITUDE = 8.0


class _CorpusConfig(BaseModel):
    # hashed into manifest metadata
    n_per_class: int
    seed: int
    size: int = CORPUS_SIZE
    checker_cell: int = _CHECKER_CELL
    checker_amplitude: float = _CHECKER_AMPLITUDE
    noise_sigma: float = _NOISE_SIGMA


def _base(rng: np.random.Generator) -> NDArray[np.float64]:
    corners = rng.uniform(_BASE_LOW, _BASE_HIGH, size=(2, 2, CHANNELS))

    t = np.linspace(0.0, 1.0, CORPUS_SIZE)
    ty = t[:, None, None]
    tx = t[None, :, None]

    top = corners[0, 0] * (1.0 - tx) + corners[0, 1] * tx
    bottom = corners[1, 0] * (1.0 - tx) + corners[1, 1] * tx
    base: NDArray[np.float64] = top * (1.0 - ty) + bottom * ty

    return base + rng.normal(0.0, _NOISE_SIGMA, size=base.shape)


def checker(height: int, width: int, cell: int, amplitude: float) -> NDArray[np.float64]:
    y = np.arange(height)[:, None] // cell
    x = np.arange(width)[None, :] // cell
    pattern = np.where((y + x) % 2 == 0, amplitude, -amplitude)
    return np.repeat(pattern[:, :, None], CHANNELS, axis=2)


def _to_pixels(values: NDArray[np.float64]) -> NDArray[np.uint8]:
    return np.floor(np.clip(values, 0.0, 255.0) + 0.5).astype(np.uint8)


def synthetic_pair(seed: int, index: int) -> tuple[ImageTensor, ImageTensor]:
    # (pristine, fake), fake differs from pristine only inside the face box
    rng = np.random.default_rng([seed, index])

    pristine = _to_pixels(_base(rng))

    box = CORPUS_FACE_BOX
    fake = pristine.astype(np.float64)
    fake[box.y : box.y + box.h, box.x : box.x + box.w] += checker(
        box.h, box.w, _CHECKER_CELL, _CHECKER_AMPLITUDE
    )

    return ImageTensor(pristine), ImageTensor(_to_pixels(fake))


def make_synthetic_corpus(n_per_class: int, seed: int, out_dir: Path) -> DatasetManifest:
    # laid out as flat_labeled: <out_dir>/pristine/*.png, <out_dir>/fake_synthetic-corpus/*.png
    # manifest is written to <out_dir>/manifest.jsonl
    if n_per_class < 1:
        raise InvalidArgumentError(f"Corpus must have at least one image per class, got {n_per_class}.")

    out_dir = out_dir.absolute()

    def entry(image: ImageTensor, index: int, label: Label, forgery_method: str, directory: str) -> ManifestEntry:
        path = out_dir / directory / f"{index:06d}.png"
        save_png(image, path)

        return ManifestEntry(
            entry_id=f"{directory}/{index:06d}",
            path=path,
            label=label,
            forgery_method=forgery_method,
        )

    entries_pristine = list[ManifestEntry]()
    entries_fake = list[ManifestEntry]()
    for index in range(n_per_class):
        pristine, fake = synthetic_pair(seed, index)

        entries_pristine.append(entry(pristine, index, Label.PRISTINE, FORGERY_METHOD_NONE, "pristine"))
        entries_fake.append(
            entry(fake, index, Label.FAKE, FORGERY_METHOD_SYNTHETIC_CORPUS, f"fake_{FORGERY_METHOD_SYNTHETIC_CORPUS}")
        )

    # pristine first, then fakes, same order within each class
    manifest = DatasetManifest(
        entries=entries_pristine + entries_fake,
        metadata=ManifestMetadata(
            source=FORGERY_METHOD_SYNTHETIC_CORPUS,
            config_hash=config_hash(_CorpusConfig(n_per_class=n_per_class, seed=seed)),
            face_box=ConfigBox.from_box(CORPUS_FACE_BOX),
        ),
        root=out_dir,
    )
    write_manifest(manifest, out_dir / MANIFEST_NAME)

    _logger.info("Generated synthetic corpus of %d pairs in %s", n_per_class, out_dir)

    return manifest
