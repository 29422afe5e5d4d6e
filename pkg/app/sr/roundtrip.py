from ..imaging.model import ImageTensor, ResizeFilter
from ..imaging.resize import downscale, resize
from .backends import check_scale
from .model import SRBackend


def upscale(img: ImageTensor, K: int, backend: SRBackend) -> ImageTensor:
    check_scale(backend, K)

    output = backend.upscale(img, K)

    # every backend must honor the size contract
    assert output.shape == (img.height * K, img.width * K)

    return output


def sr_roundtrip(img: ImageTensor, K: int, backend: SRBackend) -> ImageTensor:
    # shrink by 1/K, sr-upscale by K, restore the original size if K does not divide it
    check_scale(backend, K)

    downscaled = downscale(img, K)
    upscaled = upscale(downscaled, K, backend)

    if upscaled.shape != img.shape:
        upscaled = resize(upscaled, img.height, img.width, ResizeFilter.BICUBIC)

    return upscaled
