from collections.abc import Sequence
from enum import StrEnum
from pathlib import Path
from typing import Annotated, Self

from annotated_types import Ge, Le
from more_itertools import duplicates_everseen
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import SpecError
from ..sr.config import SR_BACKEND_ID_BICUBIC

SEED_MAX = 2**64 - 1


class BaselineOp(StrEnum):
    # gaussian noise, sigma drawn from [0, 10] intensity units
    NOISE = "noise"

    # jpeg re-encoding, quality drawn from [60, 95]
    JPEG_COMPRESSION = "jpeg_compression"

    # horizontal flip + small affine (+-5 deg rotation, +-5% translation)
    GEOMETRIC = "geometric"


class Composition(StrEnum):
    # sr round-trip first, then the baseline ops drawn for the sample
    ALONGSIDE = "alongside"

    # a sample gets either the sr round-trip or the baseline ops, never both
    REPLACE = "replace"


class SRChoice(BaseModel):
    model_config = ConfigDict(frozen=True)

    sr_backend_id: str
    scale: Annotated[int, Ge(1)]


class AugmentationPolicy(BaseModel):
    model_config = ConfigDict(frozen=True)

    sr_probability: Annotated[float, Ge(0.0), Le(1.0)] = 0.5

    # drawn uniformly when sr is triggered
    sr_choices: Sequence[SRChoice] = Field(min_length=1)

    # each applied independently with probability 0.5, in the listed order
    baseline_ops: Sequence[BaselineOp] = Field(default_factory=list)

    composition: Composition = Composition.ALONGSIDE

    seed: Annotated[int, Ge(0), Le(SEED_MAX)] = 0

    @classmethod
    def default(cls) -> Self:
        return cls(
            sr_choices=[
                SRChoice(sr_backend_id=SR_BACKEND_ID_BICUBIC, scale=2),
                SRChoice(sr_backend_id=SR_BACKEND_ID_BICUBIC, scale=4),
            ],
        )

    @classmethod
    def identity(cls) -> Self:
        # no augmentation at all
        return cls(
            sr_probability=0.0,
            sr_choices=[SRChoice(sr_backend_id=SR_BACKEND_ID_BICUBIC, scale=1)],
        )

    @model_validator(mode="after")
    def validate_baseline_ops(self) -> Self:
        baseline_ops_duplicated = list(duplicates_everseen(self.baseline_ops))
        if baseline_ops_duplicated:
            raise ValueError(f"Duplicated baseline ops: {", ".join(baseline_ops_duplicated)}")

        return self


def load_policy(path: Path) -> AugmentationPolicy:
    try:
        return AugmentationPolicy.model_validate_json(path.read_text(encoding="utf-8"))
    except OSError as error:
        raise SpecError(f"Unable to read policy `{path}`: {error}") from error
    except ValidationError as error:
        raise SpecError(f"Invalid policy `{path}`:\n{error}") from error
