from logging import getLogger
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import BackendUnavailableError, UnsupportedScaleError
from ..imaging.model import ImageTensor, ResizeFilter
from ..imaging.resize import quantize, resize
from .config import Config, ConfigBicubic, ConfigIdentity, ConfigSRBackend, ConfigTorchScript
from .model import SRBackend, SRBackendDescriptor

_logger = getLogger(__name__)


class BicubicBackend:
    def __init__(self, backend_id: str = "bicubic") -> None:
        self._descriptor = SRBackendDescriptor(
            id=backend_id,
            supported_scales=None,
            preprocessing="none (analytic, edge-clamped bicubic)",
        )

    @property
    def descriptor(self) -> SRBackendDescriptor:
        return self._descriptor

    def upscale(self, img: ImageTensor, K: int) -> ImageTensor:
        return resize(img, img.height * K, img.width * K, ResizeFilter.BICUBIC)


class IdentityBackend:
    def __init__(self, backend_id: str = "identity") -> None:
        self._descriptor = SRBackendDescriptor(
            id=backend_id,
            supported_scales=None,
            preprocessing="none (pixel replication)",
        )

    @property
    def descriptor(self) -> SRBackendDescriptor:
        return self._descriptor

    def upscale(self, img: ImageTensor, K: int) -> ImageTensor:
        if K == 1:
            return img

        return ImageTensor(np.ascontiguousarray(img.pixels.repeat(K, axis=0).repeat(K, axis=1)))


class TorchScriptBackend:
    # adapter owns the 8-bit <-> float conversion
    # network input: float32 NCHW rgb in [0, input_range], output in the same range

    def __init__(self, descriptor: SRBackendDescriptor, *, input_range: int, device: str) -> None:
        assert descriptor.model_artifact_path is not None

        try:
            import torch  # pylint: disable=import-outside-toplevel
        except ImportError as error:
            raise BackendUnavailableError(
                f"SR backend `{descriptor.id}` requires torch, install the `neural` extra."
            ) from error

        model_path = descriptor.model_artifact_path
        if not model_path.is_file():
            raise BackendUnavailableError(f"SR backend `{descriptor.id}` model `{model_path}` does not exist.")

        try:
            model = torch.jit.load(str(model_path), map_location=device)
        except (RuntimeError, ValueError) as error:
            raise BackendUnavailableError(
                f"Unable to load SR backend `{descriptor.id}` model `{model_path}`: {error}"
            ) from error

        # inference mode with fixed weights, repeated calls are bit-identical
        model.eval()

        self._torch: Any = torch
        self._model: Any = model
        self._descriptor = descriptor
        self._input_range = input_range
        self._device = device

    @property
    def descriptor(self) -> SRBackendDescriptor:
        return self._descriptor

    def upscale(self, img: ImageTensor, K: int) -> ImageTensor:
        torch = self._torch

        values = img.pixels.astype(np.float32) * (self._input_range / 255.0)
        tensor = torch.from_numpy(values).permute(2, 0, 1).unsqueeze(0).to(self._device)

        with torch.inference_mode():
            output = self._model(tensor)

        output_values = output.squeeze(0).permute(1, 2, 0).float().cpu().numpy().astype(np.float64)
        output_values *= 255.0 / self._input_range

        if output_values.shape != (img.height * K, img.width * K, 3):
            raise BackendUnavailableError(
                f"SR backend `{self._descriptor.id}` produced {output_values.shape} "
                f"for {img.height}x{img.width} input at scale {K}."
            )

        return ImageTensor(quantize(output_values))


def build_sr_backend(backend_id: str, config: ConfigSRBackend, *, model_root: Path | None = None) -> SRBackend:
    match config:
        case ConfigBicubic():
            return BicubicBackend(backend_id)
        case ConfigIdentity():
            return IdentityBackend(backend_id)
        case ConfigTorchScript():
            model_path = config.model_path
            if not model_path.is_absolute() and model_root is not None:
                model_path = model_root / model_path

            _logger.debug("Loading SR backend %s from %s", backend_id, model_path)

            descriptor = SRBackendDescriptor(
                id=backend_id,
                supported_scales=frozenset(config.scales),
                model_artifact_path=model_path,
                preprocessing=f"rgb float32 NCHW scaled to [0, {config.input_range}]",
            )
            return TorchScriptBackend(descriptor, input_range=config.input_range, device=config.device)
        case _:
            assert False


def resolve_sr_backend(backend_id: str, config: Config, *, model_root: Path | None = None) -> SRBackend:
    config_backend = config.get(backend_id)
    if config_backend is None:
        raise BackendUnavailableError(f"Unknown SR backend `{backend_id}`.")

    return build_sr_backend(backend_id, config_backend, model_root=model_root)


def check_scale(backend: SRBackend, K: int) -> None:
    if not backend.descriptor.supports(K):
        raise UnsupportedScaleError(
            f"SR backend `{backend.descriptor.id}` does not support scale {K} "
            f"(supported: {sorted(backend.descriptor.supported_scales or [])})."
        )
