from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.dataset.corpus import synthetic_pair
from app.errors import BackendUnavailableError, UnsupportedScaleError
from app.imaging.metrics import ssim
from app.imaging.model import ImageTensor
from app.sr.backends import BicubicBackend, IdentityBackend, check_scale, resolve_sr_backend
from app.sr.config import Config, ConfigBicubic, ConfigIdentity
from app.sr.model import SRBackendDescriptor
from app.sr.roundtrip import sr_roundtrip, upscale


class _TwoAndFourOnly:
    # stands in for a neural backend trained for fixed scales
    def __init__(self) -> None:
        self._descriptor = SRBackendDescriptor(id="fixed", supported_scales=frozenset({2, 4}))

    @property
    def descriptor(self) -> SRBackendDescriptor:
        return self._descriptor

    def upscale(self, img: ImageTensor, K: int) -> ImageTensor:
        return IdentityBackend().upscale(img, K)


def test_upscale_size_contract(rng: np.random.Generator) -> None:
    img = ImageTensor(rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8))

    assert upscale(img, 2, BicubicBackend()).shape == (128, 128)


def test_identity_backend_at_scale_one_is_bit_identical(rng: np.random.Generator) -> None:
    img = ImageTensor(rng.integers(0, 256, size=(21, 34, 3), dtype=np.uint8))

    assert upscale(img, 1, IdentityBackend()) == img
    assert sr_roundtrip(img, 1, IdentityBackend()) == img


def test_bicubic_constant_upscale() -> None:
    assert upscale(ImageTensor.filled(16, 16, 200), 4, BicubicBackend()) == ImageTensor.filled(64, 64, 200)


@pytest.mark.parametrize("height, width, K", [(128, 128, 2), (131, 97, 4), (64, 64, 3), (5, 5, 4)])
def test_roundtrip_restores_size(height: int, width: int, K: int, rng: np.random.Generator) -> None:
    img = ImageTensor(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))

    assert sr_roundtrip(img, K, BicubicBackend()).shape == (height, width)


@settings(max_examples=50, deadline=None)
@given(K=st.integers(1, 4), height=st.integers(4, 70), width=st.integers(4, 70))
def test_roundtrip_restores_any_size(K: int, height: int, width: int) -> None:
    img = ImageTensor.filled(height, width, 10)

    assert sr_roundtrip(img, K, BicubicBackend()).shape == (height, width)
    assert sr_roundtrip(img, K, IdentityBackend()).shape == (height, width)


def test_roundtrip_of_natural_image_is_lossy_but_close() -> None:
    pristine, _ = synthetic_pair(0, 0)

    value = ssim(pristine, sr_roundtrip(pristine, 2, BicubicBackend()))

    assert 0.8 < value < 1.0


def test_unsupported_scale() -> None:
    backend = _TwoAndFourOnly()

    check_scale(backend, 4)
    with pytest.raises(UnsupportedScaleError):
        check_scale(backend, 3)
    with pytest.raises(UnsupportedScaleError):
        sr_roundtrip(ImageTensor.filled(16, 16, 0), 3, backend)


def test_registry_builtins() -> None:
    registry = Config.default()

    assert isinstance(registry.get("bicubic"), ConfigBicubic)
    assert isinstance(registry.get("identity"), ConfigIdentity)
    assert registry.get("edsr") is None


def test_resolve_unknown_backend() -> None:
    with pytest.raises(BackendUnavailableError):
        resolve_sr_backend("edsr", Config.default())


def test_resolve_torchscript_without_model(tmp_path: Path) -> None:
    # either torch is missing or the artifact is, both make the backend unavailable
    registry = Config.model_validate({"edsr": {"kind": "torchscript", "model_path": "edsr.pt", "scales": [2, 4]}})

    with pytest.raises(BackendUnavailableError):
        resolve_sr_backend("edsr", registry, model_root=tmp_path)
