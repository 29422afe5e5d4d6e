from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Annotated, Any, Literal, Self

from annotated_types import Ge, Gt, Le, Len
from pydantic import BaseModel, ConfigDict, Field, RootModel

from ..faces.config import ConfigBox

DETECTOR_ID_TOY = "toy"
DETECTOR_ID_CONSTANT = "constant"

LAPLACIAN_THRESHOLD_DEFAULT = 10.0


class ConfigToy(BaseModel):
    # high-frequency energy detector:
    # score = logistic((mean |laplacian| inside face region - threshold) / threshold)
    model_config = ConfigDict(frozen=True)

    kind: Literal["toy"] = "toy"

    laplacian_threshold: Annotated[float, Gt(0.0)] = LAPLACIAN_THRESHOLD_DEFAULT

    # None - face box recorded in the manifest, or the whole image if there is none
    face_box: ConfigBox | None = None


class ConfigConstant(BaseModel):
    # stub, same score for every image
    model_config = ConfigDict(frozen=True)

    kind: Literal["constant"] = "constant"

    score: Annotated[float, Ge(0.0), Le(1.0)] = 0.5


class ConfigTorchScript(BaseModel):
    # serialized image classifier (resnet50 / swin / xception-class)
    # network input: float32 NCHW rgb, resized to input_size, scaled to [0, input_range], then normalized
    model_config = ConfigDict(frozen=True)

    kind: Literal["torchscript"] = "torchscript"

    model_path: Path  # relative paths are resolved against model root
    input_size: Annotated[int, Ge(1)] = 224
    input_range: Literal[1, 255] = 1
    mean: Annotated[Sequence[float], Len(3, 3)] = (0.485, 0.456, 0.406)
    std: Annotated[Sequence[Annotated[float, Gt(0.0)]], Len(3, 3)] = (0.229, 0.224, 0.225)

    # sigmoid - single logit for the fake class, softmax - one logit per class
    output: Literal["sigmoid", "softmax"] = "sigmoid"
    fake_index: Annotated[int, Ge(0)] = 1

    # crop the face region (face box recorded in the manifest) before classification
    face_crop: bool = True

    device: str = "cpu"


class ConfigArtifact(BaseModel):
    # detector artifact produced by `train`
    model_config = ConfigDict(frozen=True)

    kind: Literal["artifact"] = "artifact"

    path: Path  # relative paths are resolved against model root


type ConfigDetectorTrained = Annotated[ConfigToy | ConfigTorchScript, Field(discriminator="kind")]
type ConfigDetector = Annotated[
    ConfigToy | ConfigConstant | ConfigTorchScript | ConfigArtifact,
    Field(discriminator="kind"),
]


class Config(RootModel[Mapping[str, ConfigDetector]]):
    # scoring detectors registry, {id: detector}
    # `toy` and `constant` are always available, unless overridden

    @classmethod
    def default(cls) -> Self:
        return cls({})

    def get(self, detector_id: str) -> ConfigDetector | None:
        if detector_id in self.root:
            return self.root[detector_id]

        if detector_id == DETECTOR_ID_TOY:
            return ConfigToy()
        if detector_id == DETECTOR_ID_CONSTANT:
            return ConfigConstant()

        return None


class TrainingMetadata(BaseModel):
    trainer: str
    version: str

    # manifest the detector was trained on
    source: str
    source_config_hash: str
    samples: int

    policy: Mapping[str, Any]
    hyperparameters: Mapping[str, Any]

    # trainer specific results, eg. balanced accuracy on the training stream
    results: Mapping[str, Any] = Field(default_factory=dict)


class DetectorArtifact(BaseModel):
    # detector.json, produced by training, consumed by evaluation

    # used to distinguish artifact versions if more then one is available
    sr_attack: Literal["detector:v1"]

    detector: ConfigDetectorTrained

    training: TrainingMetadata
