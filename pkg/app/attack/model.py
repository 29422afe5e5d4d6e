from collections.abc import Sequence
from dataclasses import dataclass

from ..faces.model import BoundingBox
from ..imaging.model import ImageTensor


@dataclass(frozen=True, kw_only=True)
class AttackOutcome:
    frame: ImageTensor

    # boxes that were cropped, round-tripped and pasted back, highest confidence first
    boxes: Sequence[BoundingBox]

    skipped_no_face: bool

    def __post_init__(self) -> None:
        # a skipped frame has nothing attacked
        assert not self.skipped_no_face or not self.boxes

        # a frame with no boxes is a skipped frame
        assert self.skipped_no_face or self.boxes

    @property
    def faces_attacked(self) -> int:
        return len(self.boxes)
