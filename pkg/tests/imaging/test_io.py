from pathlib import Path

import cv2
import numpy as np
import pytest
from PIL import Image

from app.errors import ImageFormatError, IngestionError
from app.imaging.io import is_image_path, load_image, save_png
from app.imaging.model import ImageTensor


def test_png_is_lossless(tmp_path: Path, rng: np.random.Generator) -> None:
    img = ImageTensor(rng.integers(0, 256, size=(13, 7, 3), dtype=np.uint8))
    path = tmp_path / "nested" / "image.png"

    save_png(img, path)

    assert load_image(path) == img
    assert is_image_path(path)


def test_load_rejects_grayscale(tmp_path: Path) -> None:
    path = tmp_path / "gray.png"
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(path)

    with pytest.raises(ImageFormatError):
        load_image(path)


def test_load_rejects_16_bit(tmp_path: Path) -> None:
    path = tmp_path / "deep.png"
    # 48-bit png, opened by pillow as plain `RGB`
    assert cv2.imwrite(str(path), np.full((8, 8, 3), 40000, dtype=np.uint16))

    with pytest.raises(ImageFormatError):
        load_image(path)


def test_load_jpeg(tmp_path: Path) -> None:
    path = tmp_path / "image.jpg"
    Image.fromarray(np.full((8, 8, 3), 120, dtype=np.uint8)).save(path, format="JPEG", quality=95)

    img = load_image(path)

    assert img.shape == (8, 8)
    assert abs(int(img.pixels[4, 4, 0]) - 120) <= 2


def test_load_rejects_unsupported_format(tmp_path: Path) -> None:
    path = tmp_path / "image.bmp"
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(path, format="BMP")

    with pytest.raises(ImageFormatError):
        load_image(path)


def test_load_missing_or_corrupt(tmp_path: Path) -> None:
    with pytest.raises(IngestionError):
        load_image(tmp_path / "missing.png")

    corrupt = tmp_path / "corrupt.png"
    corrupt.write_bytes(b"not an image")
    with pytest.raises(IngestionError):
        load_image(corrupt)


def test_from_array_validates() -> None:
    with pytest.raises(ImageFormatError):
        ImageTensor.from_array(np.zeros((4, 4, 3), dtype=np.float32))
    with pytest.raises(ImageFormatError):
        ImageTensor.from_array(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(ImageFormatError):
        ImageTensor.from_array(np.zeros((0, 4, 3), dtype=np.uint8))


def test_images_are_immutable() -> None:
    img = ImageTensor.filled(2, 2, 0)

    with pytest.raises(ValueError):
        img.pixels[0, 0, 0] = 1
