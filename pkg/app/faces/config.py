from collections.abc import Mapping
from pathlib import Path
from typing import Annotated, Literal, Self

from annotated_types import Ge, Gt, Le
from pydantic import BaseModel, ConfigDict, Field, RootModel, model_validator

from .model import BoundingBox


class ConfigBox(BaseModel):
    # serialized BoundingBox, used by configs and manifests
    model_config = ConfigDict(frozen=True)

    x: int
    y: int
    w: Annotated[int, Ge(1)]
    h: Annotated[int, Ge(1)]
    confidence: Annotated[float, Ge(0.0), Le(1.0)] = 1.0

    def to_box(self) -> BoundingBox:
        return BoundingBox(x=self.x, y=self.y, w=self.w, h=self.h, confidence=self.confidence)

    @classmethod
    def from_box(cls, box: BoundingBox) -> Self:
        return cls(x=box.x, y=box.y, w=box.w, h=box.h, confidence=box.confidence)


class ConfigFullFrame(BaseModel):
    # stub returning the whole frame, for pre-cropped faces
    kind: Literal["full_frame"] = "full_frame"


class ConfigFixedBox(BaseModel):
    # stub returning always the same box (clamped to the frame)
    kind: Literal["fixed_box"] = "fixed_box"

    box: ConfigBox


class ConfigYuNet(BaseModel):
    # opencv FaceDetectorYN, onnx model artifact
    kind: Literal["yunet"] = "yunet"

    model_path: Path  # relative paths are resolved against model root
    score_threshold: Annotated[float, Gt(0.0), Le(1.0)] = 0.9
    nms_threshold: Annotated[float, Gt(0.0), Le(1.0)] = 0.3
    top_k: Annotated[int, Ge(1)] = 5000


type ConfigFaceDetector = Annotated[ConfigFullFrame | ConfigFixedBox | ConfigYuNet, Field(discriminator="kind")]

# resolved at runtime from the manifest face box metadata, cannot be configured
FACE_DETECTOR_ID_MANIFEST = "manifest"
FACE_DETECTOR_ID_FULL_FRAME = "full_frame"


class Config(RootModel[Mapping[str, ConfigFaceDetector]]):
    # face detectors registry, {id: detector}
    # `full_frame` is always available, unless overridden

    @classmethod
    def default(cls) -> Self:
        return cls({FACE_DETECTOR_ID_FULL_FRAME: ConfigFullFrame()})

    @model_validator(mode="after")
    def check_ids(self) -> Self:
        if FACE_DETECTOR_ID_MANIFEST in self.root:
            raise ValueError(f"Face detector id `{FACE_DETECTOR_ID_MANIFEST}` is reserved.")

        return self

    def get(self, detector_id: str) -> ConfigFaceDetector | None:
        if detector_id in self.root:
            return self.root[detector_id]
        if detector_id == FACE_DETECTOR_ID_FULL_FRAME:
            return ConfigFullFrame()

        return None
