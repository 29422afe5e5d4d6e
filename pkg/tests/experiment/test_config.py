import json
from pathlib import Path
from typing import Any

import pytest

from app.errors import SpecError
from app.experiment.config import load_experiment_spec


def _write(path: Path, **update: Any) -> Path:
    spec = {
        "sr_attack": "experiment:v1",
        "name": "grid",
        "manifest_path": "corpus/manifest.jsonl",
        "output_dir": "out",
        "detectors": ["toy"],
        "attacks": [None, {"scale": 2}, {"scale": 4}],
    } | update

    path.write_text(json.dumps(spec), encoding="utf-8")
    return path


def test_load(tmp_path: Path) -> None:
    spec = load_experiment_spec(_write(tmp_path / "experiment.json"))

    assert spec.manifest_path == tmp_path / "corpus" / "manifest.jsonl"
    assert spec.output_dir == tmp_path / "out"

    cells = spec.cells
    assert len(cells) == 3
    assert cells[0] == ("toy", None)
    assert [attack.scale for _, attack in cells[1:] if attack is not None] == [2, 4]


def test_cells_are_detector_major(tmp_path: Path) -> None:
    path = _write(tmp_path / "experiment.json", detectors=["a", "b"], attacks=[None, {"scale": 2}])

    spec = load_experiment_spec(path)

    assert [(detector, attack is None) for detector, attack in spec.cells] == [
        ("a", True),
        ("a", False),
        ("b", True),
        ("b", False),
    ]


def test_empty_grid(tmp_path: Path) -> None:
    with pytest.raises(SpecError, match="grid is empty"):
        load_experiment_spec(_write(tmp_path / "experiment.json", attacks=[]))
    with pytest.raises(SpecError, match="grid is empty"):
        load_experiment_spec(_write(tmp_path / "experiment.json", detectors=[]))


def test_duplicated_cells(tmp_path: Path) -> None:
    with pytest.raises(SpecError, match="duplicated cells"):
        load_experiment_spec(_write(tmp_path / "experiment.json", attacks=[{"scale": 2}, {"scale": 2}]))


def test_invalid_spec(tmp_path: Path) -> None:
    with pytest.raises(SpecError):
        load_experiment_spec(tmp_path / "missing.json")
    with pytest.raises(SpecError):
        load_experiment_spec(_write(tmp_path / "experiment.json", sr_attack="experiment:v2"))
    with pytest.raises(SpecError):
        load_experiment_spec(_write(tmp_path / "experiment.json", attacks=[{"scale": 0}]))
