from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from logging import getLogger
from math import inf, isinf

import numpy as np
from more_itertools import bucket

from ..dataset.model import DatasetManifest, ManifestEntry
from ..errors import InvalidArgumentError
from ..faces.model import BoundingBox
from ..imaging.io import load_image
from ..imaging.metrics import SSIM_WINDOW, similarity
from ..imaging.model import ImageTensor, SimilarityReport

_logger = getLogger(__name__)


class Region(StrEnum):
    # bounding rectangle of all attacked face boxes
    FACE = "face"

    # whole frame: nothing attacked, or faces smaller than the ssim window
    FRAME = "frame"

    # group contains both
    MIXED = "mixed"


@dataclass(frozen=True, kw_only=True)
class SimilarityRow:
    forgery_method: str
    sr_method: str
    scale: int

    count: int
    ssim_mean: float
    psnr_mean_db: float  # inf if any pair is identical

    region: Region

    def __post_init__(self) -> None:
        assert self.count >= 1


def face_region(entry: ManifestEntry, height: int, width: int) -> BoundingBox | None:
    # None - compare whole frames
    if not entry.face_boxes:
        return None

    boxes = [box.to_box() for box in entry.face_boxes]
    x0 = min(box.x for box in boxes)
    y0 = min(box.y for box in boxes)
    x1 = max(box.x + box.w for box in boxes)
    y1 = max(box.y + box.h for box in boxes)

    region = BoundingBox(x=x0, y=y0, w=x1 - x0, h=y1 - y0).clamp(height, width)
    if region is None or min(region.w, region.h) < SSIM_WINDOW:
        return None

    return region


def _cut(image: ImageTensor, region: BoundingBox | None) -> ImageTensor:
    if region is None:
        return image

    pixels = image.pixels[region.y : region.y + region.h, region.x : region.x + region.w]
    return ImageTensor(np.ascontiguousarray(pixels))


def similarity_report(original: DatasetManifest, attacked: DatasetManifest) -> Sequence[SimilarityRow]:
    # per (forgery method, sr method, scale) mean ssim and psnr between original and attacked entries
    # computed on the attacked face region, the region used is recorded per row
    ids_original = set(original.by_entry_id)
    ids_attacked = set(attacked.by_entry_id)
    if ids_original != ids_attacked:
        missing = sorted(ids_original.symmetric_difference(ids_attacked))
        raise InvalidArgumentError(f"Manifests are not aligned, entries missing on one side: {", ".join(missing)}")

    sr_method = attacked.metadata.sr_method
    scale = attacked.metadata.scale

    measured = list[tuple[str, SimilarityReport, Region]]()
    for entry_attacked in sorted(attacked.entries, key=lambda entry: entry.entry_id):
        if entry_attacked.error is not None:
            _logger.debug("Entry `%s` failed during attack, not compared", entry_attacked.entry_id)
            continue
        if entry_attacked.skipped_no_face:
            _logger.debug("Entry `%s` has no face, not compared", entry_attacked.entry_id)
            continue

        entry_original = original.by_entry_id[entry_attacked.entry_id]

        image_original = load_image(original.resolve(entry_original))
        image_attacked = load_image(attacked.resolve(entry_attacked))

        region = face_region(entry_attacked, image_original.height, image_original.width)
        report = similarity(_cut(image_original, region), _cut(image_attacked, region))

        measured.append((entry_attacked.forgery_method, report, Region.FACE if region is not None else Region.FRAME))

    groups = bucket(measured, key=lambda item: item[0])

    rows = list[SimilarityRow]()
    for forgery_method in sorted(set(item[0] for item in measured)):
        items = list(groups[forgery_method])
        reports = [item[1] for item in items]
        regions = {item[2] for item in items}

        psnrs = [report.psnr_db for report in reports]

        rows.append(
            SimilarityRow(
                forgery_method=forgery_method,
                sr_method=sr_method,
                scale=scale,
                count=len(items),
                ssim_mean=float(np.mean([report.ssim for report in reports])),
                psnr_mean_db=inf if any(isinf(psnr) for psnr in psnrs) else float(np.mean(psnrs)),
                region=regions.pop() if len(regions) == 1 else Region.MIXED,
            )
        )

    return rows
