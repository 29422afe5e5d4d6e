from collections.abc import Sequence

import numpy as np

from ..errors import InvalidArgumentError
from ..imaging.model import ImageTensor
from .detectors import FaceDetector
from .model import BoundingBox, FaceCrop


def detect_faces(frame: ImageTensor, detector: FaceDetector, *, margin: float = 0.0) -> Sequence[BoundingBox]:
    # every box is expanded by the margin, then clamped to the frame
    # boxes falling entirely outside the frame are dropped
    boxes = list[BoundingBox]()
    for box in detector.detect(frame):
        box_clamped = box.expand(margin).clamp(frame.height, frame.width)
        if box_clamped is None:
            continue

        boxes.append(box_clamped)

    # highest confidence first, stable for equal confidences
    boxes.sort(key=lambda box: -box.confidence)

    return boxes


def crop(frame: ImageTensor, box: BoundingBox, *, frame_id: str | None = None) -> FaceCrop:
    if not box.within(frame.height, frame.width):
        raise InvalidArgumentError(f"Box {box} exceeds frame {frame.height}x{frame.width}.")

    pixels = frame.pixels[box.y : box.y + box.h, box.x : box.x + box.w].copy()

    return FaceCrop(
        image=ImageTensor(pixels),
        source_box=box,
        frame_id=frame_id,
    )


def paste(frame: ImageTensor, face_crop: FaceCrop) -> ImageTensor:
    box = face_crop.source_box

    if face_crop.image.shape != (box.h, box.w):
        raise InvalidArgumentError(
            f"Crop dimensions {face_crop.image.height}x{face_crop.image.width} do not match box {box.h}x{box.w}."
        )
    if not box.within(frame.height, frame.width):
        raise InvalidArgumentError(f"Box {box} exceeds frame {frame.height}x{frame.width}.")

    # hard rectangular paste, no blending - crop covers the same region at the same size
    pixels = np.array(frame.pixels, copy=True)
    pixels[box.y : box.y + box.h, box.x : box.x + box.w] = face_crop.image.pixels

    return ImageTensor(pixels)
