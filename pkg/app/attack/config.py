from enum import StrEnum
from typing import Annotated

from annotated_types import Ge
from pydantic import BaseModel, ConfigDict

from ..faces.config import FACE_DETECTOR_ID_MANIFEST
from ..sr.config import SR_BACKEND_ID_BICUBIC


class AttackScope(StrEnum):
    # both classes are attacked (in-the-wild videos)
    BOTH = "both"

    # only fakes are attacked, pristine images pass through untouched
    FAKE_ONLY = "fake_only"


class Config(BaseModel):
    # single attack: shrink every detected face by 1/scale, sr-upscale it back, paste it into the frame
    model_config = ConfigDict(frozen=True)

    scale: Annotated[int, Ge(1)]

    # see sr backends registry
    sr_backend_id: str = SR_BACKEND_ID_BICUBIC

    # see face detectors registry
    face_detector_id: str = FACE_DETECTOR_ID_MANIFEST

    attack_scope: AttackScope = AttackScope.BOTH

    # fraction of box width / height added on every side, clamped to the frame
    face_margin: Annotated[float, Ge(0.0)] = 0.0

    @property
    def key(self) -> str:
        # short label for tables and log lines
        return f"{self.sr_backend_id}x{self.scale}"
