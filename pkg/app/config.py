from pathlib import Path
from typing import Annotated, Literal, Self

from annotated_types import Ge, Le
from pydantic import BaseModel, Field, ValidationError

from .attack.config import AttackScope
from .attack.config import Config as Attack
from .attack.engine import MAX_FAILURE_FRACTION_DEFAULT
from .defense.config import AugmentationPolicy
from .defense.train import Hyperparameters
from .errors import SpecError
from .evaluation.config import Config as Detectors
from .evaluation.metrics import THRESHOLD_DEFAULT
from .evaluation.model import Aggregation
from .faces.config import Config as FaceDetectors
from .sr.config import Config as SRBackends


class Config(BaseModel):
    # run configuration file (attack / eval / train), supplied by user
    # command line options override the corresponding keys

    # used to distinguish config versions if more then one is available
    sr_attack: Literal["run:v1"]

    # see SRBackends for details
    sr_backends: SRBackends = Field(default_factory=SRBackends.default)

    # see FaceDetectors for details
    face_detectors: FaceDetectors = Field(default_factory=FaceDetectors.default)

    # see Detectors for details
    detectors: Detectors = Field(default_factory=Detectors.default)

    attack: Attack | None = None

    threshold: Annotated[float, Ge(0.0), Le(1.0)] = THRESHOLD_DEFAULT
    aggregation: Aggregation = Aggregation.FRAME

    # see AugmentationPolicy for details
    policy: AugmentationPolicy = Field(default_factory=AugmentationPolicy.default)

    # None - trainer defaults
    hyperparameters: Hyperparameters | None = None

    workers: Annotated[int, Ge(1)] = 1
    max_failure_fraction: Annotated[float, Ge(0.0), Le(1.0)] = MAX_FAILURE_FRACTION_DEFAULT

    @classmethod
    def default(cls) -> Self:
        return cls(sr_attack="run:v1")


def load_config(path: Path | None) -> Config:
    if path is None:
        return Config.default()

    try:
        return Config.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as error:
        raise SpecError(f"Unable to read config `{path}`: {error}") from error
    except ValidationError as error:
        raise SpecError(f"Invalid config `{path}`:\n{error}") from error


def resolve_attack(
    config: Config,
    *,
    scale: int | None = None,
    sr_backend_id: str | None = None,
    attack_scope: AttackScope | None = None,
    face_detector_id: str | None = None,
    face_margin: float | None = None,
) -> Attack:
    # command line options override the `attack` section, which may be missing altogether
    overrides = {
        "scale": scale,
        "sr_backend_id": sr_backend_id,
        "attack_scope": attack_scope,
        "face_detector_id": face_detector_id,
        "face_margin": face_margin,
    }

    values = config.attack.model_dump() if config.attack is not None else {}
    values.update((key, value) for key, value in overrides.items() if value is not None)

    if "scale" not in values:
        raise SpecError("No attack configured, set `attack` in the config file or pass a scale.")

    try:
        return Attack.model_validate(values)
    except ValidationError as error:
        raise SpecError(f"Invalid attack:\n{error}") from error
