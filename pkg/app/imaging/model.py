from dataclasses import dataclass
from enum import StrEnum
from math import inf, isinf
from typing import Self

import numpy as np
from numpy.typing import NDArray

from ..errors import ImageFormatError

type Pixels = NDArray[np.uint8]

CHANNELS = 3


class ResizeFilter(StrEnum):
    BICUBIC = "bicubic"
    BILINEAR = "bilinear"
    NEAREST = "nearest"


@dataclass(frozen=True, eq=False)
class ImageTensor:
    # H x W x 3, row-major, 8-bit rgb
    pixels: Pixels

    def __post_init__(self) -> None:
        assert self.pixels.dtype == np.uint8

        # must be h x w x 3
        assert self.pixels.ndim == 3
        assert self.pixels.shape[2] == CHANNELS

        # must not be empty
        assert self.pixels.shape[0] >= 1
        assert self.pixels.shape[1] >= 1

        # images are values - nobody is allowed to mutate the buffer after construction
        self.pixels.flags.writeable = False

    @classmethod
    def from_array(cls, array: NDArray[np.generic]) -> Self:
        # checked constructor for user supplied arrays
        if array.dtype != np.uint8:
            raise ImageFormatError(f"Expecting 8-bit unsigned pixels, got `{array.dtype}`.")
        if array.ndim != 3 or array.shape[2] != CHANNELS:
            raise ImageFormatError(f"Expecting H x W x {CHANNELS} pixels, got shape {array.shape}.")
        if array.shape[0] < 1 or array.shape[1] < 1:
            raise ImageFormatError(f"Image must not be empty, got shape {array.shape}.")

        return cls(np.array(array, dtype=np.uint8, copy=True))

    @classmethod
    def filled(cls, height: int, width: int, value: int) -> Self:
        return cls(np.full((height, width, CHANNELS), value, dtype=np.uint8))

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageTensor):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"ImageTensor({self.height}x{self.width})"


@dataclass(frozen=True, kw_only=True)
class SimilarityReport:
    ssim: float
    psnr_db: float  # inf when images are identical

    def __post_init__(self) -> None:
        # ssim is bounded
        assert -1.0 - 1e-9 <= self.ssim <= 1.0 + 1e-9

        # psnr is non-negative, inf allowed as a sentinel
        assert isinf(self.psnr_db) or self.psnr_db >= 0.0

    @property
    def identical(self) -> bool:
        return self.psnr_db == inf
