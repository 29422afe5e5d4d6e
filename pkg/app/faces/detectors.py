from collections.abc import Sequence
from logging import getLogger
from pathlib import Path
from typing import Protocol

import cv2
import numpy as np

from ..errors import BackendUnavailableError
from ..imaging.model import ImageTensor
from .config import ConfigFaceDetector, ConfigFixedBox, ConfigFullFrame, ConfigYuNet
from .model import BoundingBox

_logger = getLogger(__name__)


class FaceDetector(Protocol):
    # input: one rgb 8-bit frame, output: raw (unclamped, unsorted) boxes
    # implementations may hold model state - use one instance per worker

    def detect(self, frame: ImageTensor) -> Sequence[BoundingBox]: ...


class FullFrameDetector:
    def detect(self, frame: ImageTensor) -> Sequence[BoundingBox]:
        return [BoundingBox(x=0, y=0, w=frame.width, h=frame.height, confidence=1.0)]


class FixedBoxDetector:
    def __init__(self, box: BoundingBox) -> None:
        self.box = box

    def detect(self, frame: ImageTensor) -> Sequence[BoundingBox]:
        return [self.box]


class YuNetDetector:
    def __init__(self, model_path: Path, *, score_threshold: float, nms_threshold: float, top_k: int) -> None:
        if not model_path.is_file():
            raise BackendUnavailableError(f"Face detector model `{model_path}` does not exist.")

        try:
            # input size is updated for every frame
            self._detector = cv2.FaceDetectorYN.create(
                str(model_path), "", (320, 320), score_threshold, nms_threshold, top_k
            )
        except cv2.error as error:
            raise BackendUnavailableError(f"Unable to load face detector model `{model_path}`: {error}") from error

    def detect(self, frame: ImageTensor) -> Sequence[BoundingBox]:
        bgr = cv2.cvtColor(np.ascontiguousarray(frame.pixels), cv2.COLOR_RGB2BGR)

        try:
            self._detector.setInputSize((frame.width, frame.height))
            _, faces = self._detector.detect(bgr)
        except cv2.error as error:
            raise BackendUnavailableError(f"Face detector failed: {error}") from error

        if faces is None:
            return []

        # rows: x, y, w, h, 5 landmarks (x, y), score
        boxes = list[BoundingBox]()
        for face in faces:
            x, y, w, h = (int(round(float(value))) for value in face[:4])
            if w < 1 or h < 1:
                continue

            boxes.append(
                BoundingBox(
                    x=x,
                    y=y,
                    w=w,
                    h=h,
                    confidence=min(max(float(face[14]), 0.0), 1.0),
                )
            )

        return boxes


def build_face_detector(config: ConfigFaceDetector, *, model_root: Path | None = None) -> FaceDetector:
    match config:
        case ConfigFullFrame():
            return FullFrameDetector()
        case ConfigFixedBox():
            return FixedBoxDetector(config.box.to_box())
        case ConfigYuNet():
            model_path = config.model_path
            if not model_path.is_absolute() and model_root is not None:
                model_path = model_root / model_path

            _logger.debug("Loading face detector model %s", model_path)

            return YuNetDetector(
                model_path,
                score_threshold=config.score_threshold,
                nms_threshold=config.nms_threshold,
                top_k=config.top_k,
            )
        case _:
            assert False
