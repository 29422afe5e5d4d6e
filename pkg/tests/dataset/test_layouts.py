from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from app.dataset.layouts import build_manifest
from app.dataset.manifest import MANIFEST_NAME, WARNING_EMPTY, write_manifest
from app.dataset.model import Label, Layout
from app.errors import LayoutError
from app.imaging.io import save_png
from app.imaging.model import ImageTensor


def _image(path: Path, value: int = 0) -> None:
    save_png(ImageTensor.filled(8, 8, value), path)


def test_flat_labeled(tmp_path: Path) -> None:
    for index in range(5):
        _image(tmp_path / "pristine" / f"{index:03d}.png")
        _image(tmp_path / "fake_Deepfakes" / f"{index:03d}.png")

    manifest = build_manifest(tmp_path, Layout.FLAT_LABELED)

    assert manifest.count(Label.PRISTINE) == 5
    assert manifest.count(Label.FAKE) == 5
    assert {entry.forgery_method for entry in manifest.entries if entry.label == Label.FAKE} == {"Deepfakes"}
    assert manifest.entries[0].entry_id == "fake_Deepfakes/000"
    assert manifest.metadata.source == tmp_path.name
    assert not manifest.metadata.warnings


def test_flat_labeled_is_stable(tmp_path: Path) -> None:
    for index in (3, 1, 2):
        _image(tmp_path / "pristine" / f"{index}.png")

    first = build_manifest(tmp_path, Layout.FLAT_LABELED)
    second = build_manifest(tmp_path, Layout.FLAT_LABELED)

    assert first == second
    assert [entry.entry_id for entry in first.entries] == ["pristine/1", "pristine/2", "pristine/3"]


def test_written_manifest_is_not_part_of_layout(tmp_path: Path) -> None:
    _image(tmp_path / "pristine" / "0.png")
    _image(tmp_path / "fake_FaceSwap" / "0.png")

    manifest = build_manifest(tmp_path, Layout.FLAT_LABELED)
    write_manifest(manifest, tmp_path / MANIFEST_NAME)

    assert build_manifest(tmp_path, Layout.FLAT_LABELED) == manifest


def test_empty_root_warns(tmp_path: Path) -> None:
    manifest = build_manifest(tmp_path, Layout.FLAT_LABELED)

    assert len(manifest) == 0
    assert manifest.metadata.warnings == [WARNING_EMPTY]


def test_layout_violations(tmp_path: Path) -> None:
    with pytest.raises(LayoutError):
        build_manifest(tmp_path / "missing", Layout.FLAT_LABELED)

    _image(tmp_path / "unknown" / "0.png")
    with pytest.raises(LayoutError) as error:
        build_manifest(tmp_path, Layout.FLAT_LABELED)
    assert error.value.path == tmp_path / "unknown"


def test_non_image_file(tmp_path: Path) -> None:
    _image(tmp_path / "pristine" / "0.png")
    (tmp_path / "pristine" / "notes.txt").write_text("x", encoding="utf-8")

    with pytest.raises(LayoutError):
        build_manifest(tmp_path, Layout.FLAT_LABELED)


def test_ffpp_like(tmp_path: Path) -> None:
    for frame in range(3):
        _image(tmp_path / "original_sequences" / "youtube" / "c23" / "000" / f"{frame:04d}.png")
        _image(tmp_path / "manipulated_sequences" / "Face2Face" / "c23" / "000_003" / f"{frame:04d}.png")
        _image(tmp_path / "manipulated_sequences" / "NeuralTextures" / "c23" / "000_003" / f"{frame:04d}.png")

    manifest = build_manifest(tmp_path, Layout.FFPP_LIKE)

    assert manifest.count(Label.PRISTINE) == 3
    assert manifest.count(Label.FAKE) == 6

    methods = {entry.forgery_method for entry in manifest.entries if entry.label == Label.FAKE}
    assert methods == {"Face2Face", "NeuralTextures"}

    pristine = [entry for entry in manifest.entries if entry.label == Label.PRISTINE]
    assert [entry.source_video for entry in pristine] == ["000"] * 3
    assert [entry.frame_index for entry in pristine] == [0, 1, 2]


def test_synthetic_pairs(tmp_path: Path) -> None:
    for index in range(2):
        _image(tmp_path / "progan" / "car" / "0_real" / f"{index}.png")
        _image(tmp_path / "progan" / "car" / "1_fake" / f"{index}.png")
        _image(tmp_path / "stylegan" / "0_real" / f"{index}.png")
        _image(tmp_path / "stylegan" / "1_fake" / f"{index}.png")

    manifest = build_manifest(tmp_path, Layout.SYNTHETIC_PAIRS)

    assert manifest.count(Label.PRISTINE) == 4
    assert manifest.count(Label.FAKE) == 4
    assert {entry.forgery_method for entry in manifest.entries if entry.label == Label.FAKE} == {"progan", "stylegan"}
    assert manifest.by_entry_id["progan/car/1_fake/0"].forgery_method == "progan"


def test_synthetic_pairs_nesting_limit(tmp_path: Path) -> None:
    _image(tmp_path / "progan" / "car" / "deeper" / "0_real" / "0.png")

    with pytest.raises(LayoutError):
        build_manifest(tmp_path, Layout.SYNTHETIC_PAIRS)


def test_colliding_entry_ids(tmp_path: Path) -> None:
    _image(tmp_path / "pristine" / "0.png")
    _image(tmp_path / "pristine" / "1.png")
    Image.fromarray(np.zeros((8, 8, 3), dtype=np.uint8)).save(tmp_path / "pristine" / "1.jpg", format="JPEG")

    with pytest.raises(LayoutError, match="pristine/1") as error:
        build_manifest(tmp_path, Layout.FLAT_LABELED)
    assert error.value.path == tmp_path / "pristine" / "1.png"
