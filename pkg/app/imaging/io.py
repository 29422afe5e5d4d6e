from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import ImageFormatError, IngestionError
from .model import ImageTensor

# png is lossless (required for bitwise comparisons), jpeg is accepted for ingestion only
_FORMATS_READ = {"PNG", "JPEG"}


def _rawmode(image: Image.Image) -> str | None:
    # decoder raw mode of the first tile, eg. `RGB;16B` for 48-bit png opened as `RGB`
    if not image.tile:
        return None

    args = image.tile[0][3]
    if isinstance(args, str):
        return args
    if isinstance(args, tuple) and args and isinstance(args[0], str):
        return args[0]

    return None


def load_image(path: Path) -> ImageTensor:
    try:
        with Image.open(path) as image:
            if image.format not in _FORMATS_READ:
                raise ImageFormatError(f"Unsupported image format `{image.format}` in `{path}`.")

            # only plain 8-bit rgb is accepted, no silent conversions from gray / alpha / 16-bit
            if image.mode != "RGB":
                raise ImageFormatError(f"Expecting 8-bit RGB image, got mode `{image.mode}` in `{path}`.")

            rawmode = _rawmode(image)
            if rawmode is not None and rawmode != "RGB":
                raise ImageFormatError(f"Expecting 8-bit RGB image, got raw mode `{rawmode}` in `{path}`.")

            pixels = np.asarray(image, dtype=np.uint8)
    except (FileNotFoundError, UnidentifiedImageError, OSError) as error:
        raise IngestionError(f"Unable to read image `{path}`: {error}") from error

    return ImageTensor.from_array(pixels)


def save_png(img: ImageTensor, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)

    Image.fromarray(img.pixels.copy()).save(path, format="PNG")


def is_image_path(path: Path) -> bool:
    return path.is_file() and path.suffix.lower() in {".png", ".jpg", ".jpeg"}
