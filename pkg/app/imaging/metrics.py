from math import inf, log10
from typing import TYPE_CHECKING

import numpy as np
from scipy.ndimage import laplace
from skimage.metrics import structural_similarity

from ..errors import InvalidArgumentError
from .model import ImageTensor, SimilarityReport

if TYPE_CHECKING:
    from ..faces.model import BoundingBox

PEAK = 255.0

# canonical gaussian ssim: 11x11 window (sigma 1.5, truncated at 3.5 sigma), K1 = 0.01, K2 = 0.03
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def _check_same_shape(a: ImageTensor, b: ImageTensor) -> None:
    if a.shape != b.shape:
        raise InvalidArgumentError(
            f"Images must have equal dimensions, got {a.height}x{a.width} and {b.height}x{b.width}."
        )


def mse(a: ImageTensor, b: ImageTensor) -> float:
    _check_same_shape(a, b)

    difference = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.mean(difference * difference))


def psnr(a: ImageTensor, b: ImageTensor) -> float:
    error = mse(a, b)
    if error == 0.0:
        return inf

    return 10.0 * log10(PEAK * PEAK / error)


def ssim(a: ImageTensor, b: ImageTensor) -> float:
    _check_same_shape(a, b)

    if min(a.shape) < SSIM_WINDOW:
        raise InvalidArgumentError(
            f"Images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for ssim, got {a.height}x{a.width}."
        )

    # computed per channel, averaged over channels and over all valid window positions
    value = structural_similarity(
        a.pixels,
        b.pixels,
        data_range=PEAK,
        channel_axis=-1,
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
        K1=0.01,
        K2=0.03,
    )

    return float(value)


def similarity(a: ImageTensor, b: ImageTensor) -> SimilarityReport:
    return SimilarityReport(
        ssim=ssim(a, b),
        psnr_db=psnr(a, b),
    )


def laplacian_energy(img: ImageTensor, box: "BoundingBox | None" = None) -> float:
    # mean absolute 4-neighbour laplacian of the channel-averaged image
    # laplacian is evaluated on the whole frame (edges replicated), then averaged inside the box
    gray = img.pixels.astype(np.float64).mean(axis=2)
    energy = np.abs(laplace(gray, mode="nearest"))

    if box is not None:
        energy = energy[box.y : box.y + box.h, box.x : box.x + box.w]

    return float(energy.mean())
