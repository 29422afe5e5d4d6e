from logging import getLogger
from pathlib import Path
from typing import Any, Protocol

import numpy as np
from pydantic import ValidationError
from scipy.special import expit

from ..dataset.model import ManifestMetadata
from ..errors import BackendUnavailableError
from ..faces.model import BoundingBox
from ..imaging.metrics import laplacian_energy
from ..imaging.model import ImageTensor, ResizeFilter
from ..imaging.resize import resize
from .config import (
    Config,
    ConfigArtifact,
    ConfigConstant,
    ConfigDetector,
    ConfigToy,
    ConfigTorchScript,
    DetectorArtifact,
)

_logger = getLogger(__name__)


class Detector(Protocol):
    # maps one image to the probability that it is fake
    # implementations may hold model state - use one instance per worker

    def score(self, image: ImageTensor) -> float: ...


class ConstantDetector:
    def __init__(self, value: float) -> None:
        assert 0.0 <= value <= 1.0

        self.value = value

    def score(self, image: ImageTensor) -> float:
        return self.value


def _face_region(image: ImageTensor, face_box: BoundingBox | None) -> BoundingBox | None:
    # box clamped to the image, None for the whole image
    if face_box is None:
        return None

    return face_box.clamp(image.height, image.width)


class ToyDetector:
    def __init__(self, laplacian_threshold: float, face_box: BoundingBox | None = None) -> None:
        assert laplacian_threshold > 0.0

        self.laplacian_threshold = laplacian_threshold
        self.face_box = face_box

    def energy(self, image: ImageTensor) -> float:
        return laplacian_energy(image, _face_region(image, self.face_box))

    def score(self, image: ImageTensor) -> float:
        threshold = self.laplacian_threshold
        return float(expit((self.energy(image) - threshold) / threshold))


class TorchScriptClassifier:
    def __init__(self, model_path: Path, config: ConfigTorchScript, face_box: BoundingBox | None = None) -> None:
        try:
            import torch  # pylint: disable=import-outside-toplevel
        except ImportError as error:
            raise BackendUnavailableError(
                "Serialized classifiers require torch, install the `neural` extra."
            ) from error

        if not model_path.is_file():
            raise BackendUnavailableError(f"Classifier model `{model_path}` does not exist.")

        try:
            model = torch.jit.load(str(model_path), map_location=config.device)
        except (RuntimeError, ValueError) as error:
            raise BackendUnavailableError(f"Unable to load classifier model `{model_path}`: {error}") from error

        model.eval()

        self._torch: Any = torch
        self._model: Any = model
        self._config = config
        self._face_box = face_box if config.face_crop else None

    def score(self, image: ImageTensor) -> float:
        torch = self._torch
        config = self._config

        region = _face_region(image, self._face_box)
        if region is not None:
            image = ImageTensor(
                np.ascontiguousarray(image.pixels[region.y : region.y + region.h, region.x : region.x + region.w])
            )

        image = resize(image, config.input_size, config.input_size, ResizeFilter.BILINEAR)

        values = image.pixels.astype(np.float32) * (config.input_range / 255.0)
        values = (values - np.array(config.mean, dtype=np.float32) * config.input_range) / (
            np.array(config.std, dtype=np.float32) * config.input_range
        )
        tensor = torch.from_numpy(np.ascontiguousarray(values)).permute(2, 0, 1).unsqueeze(0).to(config.device)

        with torch.inference_mode():
            logits = self._model(tensor).reshape(-1).float()

        match config.output:
            case "sigmoid":
                probability = torch.sigmoid(logits[0])
            case "softmax":
                probability = torch.softmax(logits, dim=0)[config.fake_index]
            case _:
                assert False

        return float(probability.cpu().item())


def load_detector_artifact(path: Path) -> DetectorArtifact:
    try:
        return DetectorArtifact.model_validate_json(path.read_text(encoding="utf-8"))
    except (OSError, ValidationError) as error:
        raise BackendUnavailableError(f"Unable to load detector artifact `{path}`: {error}") from error


def build_detector(
    config: ConfigDetector,
    *,
    metadata: ManifestMetadata | None = None,
    model_root: Path | None = None,
) -> Detector:
    # face region: explicit box, else the one recorded in the manifest
    face_box_manifest = metadata.face_box.to_box() if metadata is not None and metadata.face_box is not None else None

    def resolve(path: Path) -> Path:
        if not path.is_absolute() and model_root is not None:
            return model_root / path
        return path

    match config:
        case ConfigToy():
            return ToyDetector(
                config.laplacian_threshold,
                config.face_box.to_box() if config.face_box is not None else face_box_manifest,
            )
        case ConfigConstant():
            return ConstantDetector(config.score)
        case ConfigTorchScript():
            model_path = resolve(config.model_path)
            _logger.debug("Loading classifier model %s", model_path)
            return TorchScriptClassifier(model_path, config, face_box_manifest)
        case ConfigArtifact():
            artifact = load_detector_artifact(resolve(config.path))
            return build_detector(artifact.detector, metadata=metadata, model_root=model_root)
        case _:
            assert False


def resolve_detector(
    detector_id: str,
    config: Config,
    *,
    metadata: ManifestMetadata | None = None,
    model_root: Path | None = None,
) -> Detector:
    config_detector = config.get(detector_id)
    if config_detector is None:
        raise BackendUnavailableError(f"Unknown detector `{detector_id}`.")

    return build_detector(config_detector, metadata=metadata, model_root=model_root)
