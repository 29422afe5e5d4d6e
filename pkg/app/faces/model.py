from dataclasses import dataclass, replace
from math import floor
from typing import Self

from ..imaging.model import ImageTensor


@dataclass(frozen=True, kw_only=True)
class BoundingBox:
    # pixel coordinates, (x, y) is top-left corner
    x: int
    y: int
    w: int
    h: int

    confidence: float = 1.0

    def __post_init__(self) -> None:
        # must not be empty
        assert self.w >= 1
        assert self.h >= 1

        # confidence is a probability
        assert 0.0 <= self.confidence <= 1.0

    @property
    def area(self) -> int:
        return self.w * self.h

    def within(self, frame_h: int, frame_w: int) -> bool:
        return self.x >= 0 and self.y >= 0 and self.x + self.w <= frame_w and self.y + self.h <= frame_h

    def clamp(self, frame_h: int, frame_w: int) -> Self | None:
        # boxes overflowing the frame are clamped, not rejected
        # None if nothing is left after clamping
        x0 = max(self.x, 0)
        y0 = max(self.y, 0)
        x1 = min(self.x + self.w, frame_w)
        y1 = min(self.y + self.h, frame_h)

        if x1 - x0 < 1 or y1 - y0 < 1:
            return None

        return replace(self, x=x0, y=y0, w=x1 - x0, h=y1 - y0)

    def iou(self, other: "BoundingBox") -> float:
        x0 = max(self.x, other.x)
        y0 = max(self.y, other.y)
        x1 = min(self.x + self.w, other.x + other.w)
        y1 = min(self.y + self.h, other.y + other.h)

        intersection = max(x1 - x0, 0) * max(y1 - y0, 0)
        union = self.area + other.area - intersection

        return intersection / union

    def expand(self, margin: float) -> Self:
        # fractional margin, added on every side
        assert margin >= 0.0

        dx = floor(self.w * margin)
        dy = floor(self.h * margin)

        return replace(self, x=self.x - dx, y=self.y - dy, w=self.w + 2 * dx, h=self.h + 2 * dy)


@dataclass(frozen=True, kw_only=True)
class FaceCrop:
    image: ImageTensor
    source_box: BoundingBox
    frame_id: str | None = None

    # image must exactly cover source_box, not asserted here - paste() reports a mismatch as a typed error
