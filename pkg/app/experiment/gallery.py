from collections.abc import Sequence
from logging import getLogger
from pathlib import Path

from matplotlib.figure import Figure

from ..attack.config import Config as Attack
from ..attack.engine import attack_frame, build_resources
from ..dataset.model import DatasetManifest, Label
from ..errors import InvalidArgumentError
from ..faces.config import Config as FaceDetectors
from ..faces.model import BoundingBox
from ..faces.pipeline import crop
from ..imaging.io import load_image
from ..sr.config import Config as SRBackends

_logger = getLogger(__name__)

GALLERY_COUNT_DEFAULT = 4


def _union(boxes: Sequence[BoundingBox]) -> BoundingBox:
    x0 = min(box.x for box in boxes)
    y0 = min(box.y for box in boxes)
    x1 = max(box.x + box.w for box in boxes)
    y1 = max(box.y + box.h for box in boxes)
    return BoundingBox(x=x0, y=y0, w=x1 - x0, h=y1 - y0)


def gallery(
    manifest: DatasetManifest,
    attacks: Sequence[Attack],
    out_path: Path,
    *,
    count: int = GALLERY_COUNT_DEFAULT,
    sr_backends: SRBackends | None = None,
    face_detectors: FaceDetectors | None = None,
    model_root: Path | None = None,
) -> Path:
    # contact sheet: one row per entry (fakes first), original face then the face under every attack
    # faces are shown as the region covered by the boxes of the first attack, whole frame if none were found
    if count < 1:
        raise InvalidArgumentError(f"Gallery needs at least one entry, got {count}.")
    if not attacks:
        raise InvalidArgumentError("Gallery needs at least one attack.")

    entries = [entry for entry in manifest.entries if entry.usable and entry.label == Label.FAKE]
    entries += [entry for entry in manifest.entries if entry.usable and entry.label == Label.PRISTINE]
    entries = entries[:count]
    if not entries:
        raise InvalidArgumentError(f"Manifest `{manifest.metadata.source}` has no usable entries.")

    resources = [
        build_resources(
            attack,
            sr_backends=sr_backends,
            face_detectors=face_detectors,
            metadata=manifest.metadata,
            model_root=model_root,
        )
        for attack in attacks
    ]

    figure = Figure(figsize=(2.0 * (len(attacks) + 1), 2.0 * len(entries)))
    axes = figure.subplots(len(entries), len(attacks) + 1, squeeze=False)

    for row, entry in enumerate(entries):
        frame = load_image(manifest.resolve(entry))
        outcomes = [attack_frame(frame, attack, resources_) for attack, resources_ in zip(attacks, resources)]

        boxes = outcomes[0].boxes
        region = _union(boxes) if boxes else BoundingBox(x=0, y=0, w=frame.width, h=frame.height)

        images = [frame] + [outcome.frame for outcome in outcomes]
        titles = ["original"] + [f"{attack.sr_backend_id} K={attack.scale}" for attack in attacks]
        for column, (image, title) in enumerate(zip(images, titles)):
            axis = axes[row][column]
            axis.imshow(crop(image, region).image.pixels, interpolation="nearest")
            axis.set_xticks([])
            axis.set_yticks([])
            if row == 0:
                axis.set_title(title, fontsize="small")
            if column == 0:
                axis.set_ylabel(entry.entry_id, fontsize="x-small")

    out_path.parent.mkdir(parents=True, exist_ok=True)
    figure.savefig(out_path, dpi=120, bbox_inches="tight", metadata={"Software": None})

    _logger.info("Gallery of %d entries x %d attacks written to %s", len(entries), len(attacks), out_path)

    return out_path
