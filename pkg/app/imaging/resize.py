from collections.abc import Callable
from functools import cache
from math import ceil, floor

import numpy as np
from numpy.typing import NDArray

from ..errors import DegenerateScaleError, InvalidArgumentError
from .model import ImageTensor, ResizeFilter

type Kernel = Callable[[NDArray[np.float64]], NDArray[np.float64]]

# keys cubic convolution parameter, same as in most sr preprocessing pipelines
_CUBIC_A = -0.5


def _kernel_bicubic(x: NDArray[np.float64]) -> NDArray[np.float64]:
    x = np.abs(x)
    x2 = x * x
    x3 = x2 * x
    return np.where(
        x <= 1.0,
        (_CUBIC_A + 2.0) * x3 - (_CUBIC_A + 3.0) * x2 + 1.0,
        np.where(
            x < 2.0,
            _CUBIC_A * x3 - 5.0 * _CUBIC_A * x2 + 8.0 * _CUBIC_A * x - 4.0 * _CUBIC_A,
            0.0,
        ),
    )


def _kernel_bilinear(x: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.maximum(1.0 - np.abs(x), 0.0)


_KERNELS: dict[ResizeFilter, tuple[Kernel, float]] = {  # {filter: (kernel, support)}
    ResizeFilter.BICUBIC: (_kernel_bicubic, 2.0),
    ResizeFilter.BILINEAR: (_kernel_bilinear, 1.0),
}


@cache
def _weights(size_in: int, size_out: int, filter_: ResizeFilter) -> NDArray[np.float64]:
    # (size_out x size_in) matrix, each row sums to one
    # pixel centers are aligned (half-pixel convention), samples outside the image are clamped to the edge
    scale = size_in / size_out

    weights = np.zeros((size_out, size_in), dtype=np.float64)
    rows = np.arange(size_out)

    if filter_ == ResizeFilter.NEAREST:
        sources = np.minimum(np.floor((rows + 0.5) * scale).astype(np.int64), size_in - 1)
        weights[rows, sources] = 1.0
        return weights

    kernel, support = _KERNELS[filter_]

    # when shrinking the kernel is widened, so every source pixel contributes (antialiasing)
    kernel_scale = max(scale, 1.0)
    support_scaled = support * kernel_scale

    centers = (rows + 0.5) * scale - 0.5
    taps = ceil(2 * support_scaled) + 2
    starts = np.floor(centers - support_scaled).astype(np.int64)

    sources = starts[:, None] + np.arange(taps)[None, :]
    taps_weights = kernel((sources - centers[:, None]) / kernel_scale)
    taps_weights /= taps_weights.sum(axis=1, keepdims=True)

    np.add.at(
        weights,
        (np.repeat(rows, taps), np.clip(sources, 0, size_in - 1).ravel()),
        taps_weights.ravel(),
    )

    return weights


def quantize(values: NDArray[np.float64]) -> NDArray[np.uint8]:
    # clip to 8-bit range, round half away from zero
    # after clipping values are non-negative, so half away from zero is floor(x + 0.5)
    return np.floor(np.clip(values, 0.0, 255.0) + 0.5).astype(np.uint8)


def resize(img: ImageTensor, out_h: int, out_w: int, filter_: ResizeFilter) -> ImageTensor:
    if out_h < 1 or out_w < 1:
        raise InvalidArgumentError(f"Target dimensions must be positive, got {out_h}x{out_w}.")

    weights_h = _weights(img.height, out_h, filter_)
    weights_w = _weights(img.width, out_w, filter_)

    if filter_ == ResizeFilter.NEAREST:
        # pure selection, no arithmetic on pixel values
        rows = weights_h.argmax(axis=1)
        columns = weights_w.argmax(axis=1)
        return ImageTensor(np.ascontiguousarray(img.pixels[rows][:, columns]))

    values = img.pixels.astype(np.float64)
    values = np.einsum("oh,hwc->owc", weights_h, values)
    values = np.einsum("pw,owc->opc", weights_w, values)

    return ImageTensor(quantize(values))


def downscale(img: ImageTensor, K: int) -> ImageTensor:
    if K < 1:
        raise InvalidArgumentError(f"Scale factor must be positive, got {K}.")

    out_h = floor(img.height / K)
    out_w = floor(img.width / K)
    if out_h < 1 or out_w < 1:
        raise DegenerateScaleError(f"Scale factor {K} is larger than image dimensions {img.height}x{img.width}.")

    return resize(img, out_h, out_w, ResizeFilter.BICUBIC)
