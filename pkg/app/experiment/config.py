from collections.abc import Sequence
from itertools import product
from pathlib import Path
from typing import Annotated, Literal, Self

from annotated_types import Ge, Le
from more_itertools import duplicates_everseen
from pydantic import BaseModel, Field, ValidationError, model_validator

from ..attack.config import Config as Attack
from ..attack.engine import MAX_FAILURE_FRACTION_DEFAULT
from ..errors import SpecError
from ..evaluation.config import Config as Detectors
from ..evaluation.metrics import THRESHOLD_DEFAULT
from ..evaluation.model import Aggregation
from ..faces.config import Config as FaceDetectors
from ..sr.config import Config as SRBackends


class ExperimentSpec(BaseModel):
    # experiment file, supplied by user
    # grid: every detector is evaluated on every attack, `null` attack is the unattacked cell

    # used to distinguish experiment versions if more then one is available
    sr_attack: Literal["experiment:v1"]

    name: str

    # relative paths are resolved against the experiment file directory
    manifest_path: Path
    output_dir: Path

    detectors: Sequence[str]
    attacks: Sequence[Attack | None]

    threshold: Annotated[float, Ge(0.0), Le(1.0)] = THRESHOLD_DEFAULT
    aggregation: Aggregation = Aggregation.FRAME

    # per attack similarity table (ssim / psnr)
    similarity: bool = True

    # fnr / fpr / auc vs scale plots
    plots: bool = True

    # grid cells evaluated in parallel
    workers: Annotated[int, Ge(1)] = 1
    max_failure_fraction: Annotated[float, Ge(0.0), Le(1.0)] = MAX_FAILURE_FRACTION_DEFAULT

    # see SRBackends for details
    sr_backends: SRBackends = Field(default_factory=SRBackends.default)

    # see FaceDetectors for details
    face_detectors: FaceDetectors = Field(default_factory=FaceDetectors.default)

    # see Detectors for details
    detectors_registry: Detectors = Field(default_factory=Detectors.default)

    @model_validator(mode="after")
    def validate_grid(self) -> Self:
        if not self.detectors or not self.attacks:
            raise ValueError("Experiment grid is empty, at least one detector and one attack (or `null`) is needed.")

        cells_duplicated = list(duplicates_everseen(product(self.detectors, self.attacks)))
        if cells_duplicated:
            raise ValueError(
                "Experiment grid has duplicated cells: "
                + ", ".join(
                    f"{detector} / {attack.key if attack is not None else "none"}"
                    for detector, attack in cells_duplicated
                )
            )

        return self

    @property
    def cells(self) -> Sequence[tuple[str, Attack | None]]:
        # detector-major order
        return list(product(self.detectors, self.attacks))


def load_experiment_spec(path: Path) -> ExperimentSpec:
    try:
        spec = ExperimentSpec.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as error:
        raise SpecError(f"Unable to read experiment `{path}`: {error}") from error
    except ValidationError as error:
        raise SpecError(f"Invalid experiment `{path}`:\n{error}") from error

    base = path.parent.absolute()
    return spec.model_copy(
        update={
            "manifest_path": base / spec.manifest_path,
            "output_dir": base / spec.output_dir,
        }
    )
