from collections.abc import Iterator, Sequence
from logging import getLogger
from pathlib import Path

from more_itertools import duplicates_everseen
from pydantic import BaseModel

from ..common import config_hash
from ..errors import LayoutError
from ..imaging.io import is_image_path
from .manifest import MANIFEST_NAME, WARNING_EMPTY
from .model import FORGERY_METHOD_NONE, DatasetManifest, Label, Layout, ManifestEntry, ManifestMetadata

_logger = getLogger(__name__)

# flat_labeled: root/pristine/*, root/fake_<Method>/*
_FLAT_PRISTINE = "pristine"
_FLAT_FAKE_PREFIX = "fake_"

# ffpp_like: root/original_sequences/**/<video>/<frame>.png, root/manipulated_sequences/<Method>/**/<video>/<frame>.png
_FFPP_ORIGINAL = "original_sequences"
_FFPP_MANIPULATED = "manipulated_sequences"

# synthetic_pairs: root/<generator>/[<subset>/]0_real|1_fake/*
_PAIRS_REAL = "0_real"
_PAIRS_FAKE = "1_fake"


class _BuildConfig(BaseModel):
    # hashed into manifest metadata
    root_dir: str
    layout: Layout


def build_manifest(root_dir: Path, layout: Layout) -> DatasetManifest:
    root_dir = root_dir.absolute()
    if not root_dir.is_dir():
        raise LayoutError(root_dir, "Dataset root is not a directory")

    match layout:
        case Layout.FLAT_LABELED:
            entries = list(_build_flat_labeled(root_dir))
        case Layout.FFPP_LIKE:
            entries = list(_build_ffpp_like(root_dir))
        case Layout.SYNTHETIC_PAIRS:
            entries = list(_build_synthetic_pairs(root_dir))
        case _:
            assert False

    # ids drop the file suffix, so `a.png` and `a.jpg` collide
    duplicate = next(duplicates_everseen(entries, key=lambda entry: entry.entry_id), None)
    if duplicate is not None:
        raise LayoutError(duplicate.path, f"Another file maps to the same entry id `{duplicate.entry_id}`")

    warnings = list[str]()
    if not entries:
        _logger.warning("No images found in `%s` (layout %s).", root_dir, layout)
        warnings.append(WARNING_EMPTY)

    return DatasetManifest(
        entries=entries,
        metadata=ManifestMetadata(
            source=root_dir.name,
            config_hash=config_hash(_BuildConfig(root_dir=str(root_dir), layout=layout)),
            warnings=warnings,
        ),
        root=root_dir,
    )


def _children_sorted(directory: Path) -> Sequence[Path]:
    # manifests written into the dataset tree are not part of the layout
    return sorted(path for path in directory.iterdir() if path.name != MANIFEST_NAME)


def _images_sorted(directory: Path) -> Iterator[Path]:
    # recursive, stable order, anything that is not an image is a layout violation
    for path in _children_sorted(directory):
        if path.is_dir():
            yield from _images_sorted(path)
        elif is_image_path(path):
            yield path
        else:
            raise LayoutError(path, "Unexpected non-image file")


def _entry_id(root_dir: Path, path: Path) -> str:
    return path.relative_to(root_dir).with_suffix("").as_posix()


def _frame_index(path: Path) -> int | None:
    return int(path.stem) if path.stem.isdigit() else None


def _build_flat_labeled(root_dir: Path) -> Iterator[ManifestEntry]:
    for directory in _children_sorted(root_dir):
        if not directory.is_dir():
            raise LayoutError(directory, "Expecting only `pristine` and `fake_<method>` directories")

        if directory.name == _FLAT_PRISTINE:
            label = Label.PRISTINE
            forgery_method = FORGERY_METHOD_NONE
        elif directory.name.startswith(_FLAT_FAKE_PREFIX) and len(directory.name) > len(_FLAT_FAKE_PREFIX):
            label = Label.FAKE
            forgery_method = directory.name.removeprefix(_FLAT_FAKE_PREFIX)
        else:
            raise LayoutError(directory, "Expecting only `pristine` and `fake_<method>` directories")

        for path in _images_sorted(directory):
            yield ManifestEntry(
                entry_id=_entry_id(root_dir, path),
                path=path,
                label=label,
                forgery_method=forgery_method,
            )


def _build_ffpp_like(root_dir: Path) -> Iterator[ManifestEntry]:
    for directory in _children_sorted(root_dir):
        if not directory.is_dir() or directory.name not in (_FFPP_ORIGINAL, _FFPP_MANIPULATED):
            raise LayoutError(directory, f"Expecting only `{_FFPP_ORIGINAL}` and `{_FFPP_MANIPULATED}` directories")

        if directory.name == _FFPP_ORIGINAL:
            for path in _images_sorted(directory):
                yield _ffpp_entry(root_dir, path, Label.PRISTINE, FORGERY_METHOD_NONE)
        else:
            for method_directory in _children_sorted(directory):
                if not method_directory.is_dir():
                    raise LayoutError(method_directory, "Expecting forgery method directory")

                for path in _images_sorted(method_directory):
                    yield _ffpp_entry(root_dir, path, Label.FAKE, method_directory.name)


def _ffpp_entry(root_dir: Path, path: Path, label: Label, forgery_method: str) -> ManifestEntry:
    # frames are stored as <video>/<frame index>.png
    return ManifestEntry(
        entry_id=_entry_id(root_dir, path),
        path=path,
        label=label,
        forgery_method=forgery_method,
        source_video=path.parent.name,
        frame_index=_frame_index(path),
    )


def _build_synthetic_pairs(root_dir: Path) -> Iterator[ManifestEntry]:
    for generator_directory in _children_sorted(root_dir):
        if not generator_directory.is_dir():
            raise LayoutError(generator_directory, "Expecting generator directory")

        yield from _build_synthetic_pairs_generator(root_dir, generator_directory, generator_directory.name)


def _build_synthetic_pairs_generator(root_dir: Path, directory: Path, generator: str) -> Iterator[ManifestEntry]:
    for child in _children_sorted(directory):
        if not child.is_dir():
            raise LayoutError(child, f"Expecting `{_PAIRS_REAL}` / `{_PAIRS_FAKE}` or subset directory")

        if child.name == _PAIRS_REAL:
            label, forgery_method = Label.PRISTINE, FORGERY_METHOD_NONE
        elif child.name == _PAIRS_FAKE:
            label, forgery_method = Label.FAKE, generator
        else:
            # subset (eg. generator training set / category), one level only
            if directory.parent != root_dir:
                raise LayoutError(child, "Subset directories may be nested only once")

            yield from _build_synthetic_pairs_generator(root_dir, child, generator)
            continue

        for path in _images_sorted(child):
            yield ManifestEntry(
                entry_id=_entry_id(root_dir, path),
                path=path,
                label=label,
                forgery_method=forgery_method,
            )
