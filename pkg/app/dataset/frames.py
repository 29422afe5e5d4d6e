from collections.abc import Sequence
from logging import getLogger
from pathlib import Path

import cv2
import numpy as np
from more_itertools import duplicates_everseen
from pydantic import BaseModel

from ..common import config_hash
from ..errors import IngestionError, InvalidArgumentError
from ..imaging.io import save_png
from ..imaging.model import ImageTensor
from .manifest import MANIFEST_NAME, write_manifest
from .model import FORGERY_METHOD_NONE, DatasetManifest, Label, ManifestEntry, ManifestMetadata

_logger = getLogger(__name__)

DEFAULT_STRIDE = 10


class _FramesConfig(BaseModel):
    # hashed into manifest metadata
    videos: Sequence[str]
    stride: int
    label: Label
    forgery_method: str


def extract_frames(
    video_path: Path,
    stride: int,
    out_dir: Path,
    *,
    label: Label = Label.PRISTINE,
    forgery_method: str = FORGERY_METHOD_NONE,
) -> Sequence[ManifestEntry]:
    # every stride-th frame (starting with 0) is saved as <out_dir>/<video>/<frame index>.png
    if stride < 1:
        raise InvalidArgumentError(f"Stride must be positive, got {stride}.")

    capture = cv2.VideoCapture(str(video_path))
    try:
        if not capture.isOpened():
            raise IngestionError(f"Unable to open video `{video_path}`.")

        # decode everything first, so a failing file produces no entries
        frames = list[tuple[int, ImageTensor]]()
        frame_index = 0
        while True:
            ok, bgr = capture.read()
            if not ok:
                break

            if frame_index % stride == 0:
                rgb = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
                frames.append((frame_index, ImageTensor(np.ascontiguousarray(rgb, dtype=np.uint8))))

            frame_index += 1

        # declared by the container, an estimate for some formats
        frames_declared = int(capture.get(cv2.CAP_PROP_FRAME_COUNT))
    finally:
        capture.release()

    if not frames:
        raise IngestionError(f"No decodable frames in `{video_path}`.")
    if frame_index < frames_declared:
        _logger.warning(
            "Decoding of %s stopped at frame %d of %d, remaining frames are not extracted",
            video_path,
            frame_index,
            frames_declared,
        )

    video = video_path.stem
    out_dir = out_dir.absolute()

    entries = list[ManifestEntry]()
    for frame_index, frame in frames:
        path = out_dir / video / f"{frame_index:06d}.png"
        save_png(frame, path)

        entries.append(
            ManifestEntry(
                entry_id=f"{video}/{frame_index:06d}",
                path=path,
                label=label,
                forgery_method=forgery_method,
                source_video=video,
                frame_index=frame_index,
            )
        )

    _logger.info("Extracted %d frames (stride %d) from %s", len(entries), stride, video_path)

    return entries


def extract_videos(
    video_paths: Sequence[Path],
    stride: int,
    out_dir: Path,
    *,
    label: Label = Label.PRISTINE,
    forgery_method: str = FORGERY_METHOD_NONE,
) -> DatasetManifest:
    # all videos share label and forgery method, manifest is written to <out_dir>/manifest.jsonl
    if not video_paths:
        raise InvalidArgumentError("No videos given.")

    # frames are stored under the video stem
    duplicate = next(duplicates_everseen(video_paths, key=lambda video_path: video_path.stem), None)
    if duplicate is not None:
        raise InvalidArgumentError(f"Video `{duplicate}` shares its name `{duplicate.stem}` with another video.")

    out_dir = out_dir.absolute()

    entries = list[ManifestEntry]()
    for video_path in video_paths:
        entries.extend(extract_frames(video_path, stride, out_dir, label=label, forgery_method=forgery_method))

    manifest = DatasetManifest(
        entries=entries,
        metadata=ManifestMetadata(
            source=out_dir.name,
            config_hash=config_hash(
                _FramesConfig(
                    videos=[video_path.name for video_path in video_paths],
                    stride=stride,
                    label=label,
                    forgery_method=forgery_method,
                )
            ),
            frame_stride=stride,
        ),
        root=out_dir,
    )
    write_manifest(manifest, out_dir / MANIFEST_NAME)

    return manifest
