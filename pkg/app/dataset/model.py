from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
from pathlib import Path
from typing import Annotated, Self

from annotated_types import Ge
from more_itertools import all_unique
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..faces.config import ConfigBox

FORGERY_METHOD_NONE = "none"
FORGERY_METHOD_SYNTHETIC_CORPUS = "synthetic-corpus"


class Label(StrEnum):
    PRISTINE = "pristine"
    FAKE = "fake"

    @property
    def positive(self) -> int:
        # fake is the positive class
        return 1 if self == Label.FAKE else 0


class Layout(StrEnum):
    FFPP_LIKE = "ffpp_like"
    FLAT_LABELED = "flat_labeled"
    SYNTHETIC_PAIRS = "synthetic_pairs"


class ManifestEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    entry_id: str
    path: Path
    label: Label
    forgery_method: str
    source_video: str | None = None
    frame_index: Annotated[int, Ge(0)] | None = None

    # filled in by the attack engine
    skipped_no_face: bool = False
    faces_attacked: Annotated[int, Ge(0)] | None = None
    face_boxes: Sequence[ConfigBox] | None = None
    error: str | None = None

    @model_validator(mode="after")
    def check_forgery_method(self) -> Self:
        if self.label == Label.PRISTINE and self.forgery_method != FORGERY_METHOD_NONE:
            raise ValueError(
                f"Pristine entry `{self.entry_id}` must have forgery method `{FORGERY_METHOD_NONE}`, "
                f"got `{self.forgery_method}`."
            )
        if self.label == Label.FAKE and self.forgery_method == FORGERY_METHOD_NONE:
            raise ValueError(f"Fake entry `{self.entry_id}` must name its forgery method.")

        return self

    @property
    def usable(self) -> bool:
        # entries excluded from metrics
        return not self.skipped_no_face and self.error is None


class ManifestAttack(BaseModel):
    # attack which produced this manifest
    model_config = ConfigDict(frozen=True)

    sr_backend_id: str
    scale: Annotated[int, Ge(1)]
    scope: str
    face_detector_id: str
    face_margin: float = 0.0


class ManifestMetadata(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: str
    split: str = "test"
    config_hash: str = ""

    # entries point at pre-cropped faces, detection is not needed
    face_crops: bool = False

    # single face region shared by all entries (synthetic corpus)
    face_box: ConfigBox | None = None

    frame_stride: Annotated[int, Ge(1)] | None = None

    attack: ManifestAttack | None = None

    warnings: Sequence[str] = Field(default_factory=list)

    @property
    def sr_method(self) -> str:
        return self.attack.sr_backend_id if self.attack is not None else "none"

    @property
    def scale(self) -> int:
        return self.attack.scale if self.attack is not None else 1


@dataclass(frozen=True, kw_only=True)
class DatasetManifest:
    entries: Sequence[ManifestEntry]
    metadata: ManifestMetadata

    # directory relative entry paths are resolved against, None for in-memory manifests
    root: Path | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        # entry ids must be unique
        assert all_unique(entry.entry_id for entry in self.entries)

        # paths must be distinct
        assert all_unique(entry.path for entry in self.entries)

    @cached_property
    def by_entry_id(self) -> Mapping[str, ManifestEntry]:
        return {entry.entry_id: entry for entry in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def resolve(self, entry: ManifestEntry) -> Path:
        if entry.path.is_absolute() or self.root is None:
            return entry.path
        return self.root / entry.path

    def count(self, label: Label) -> int:
        return sum(1 for entry in self.entries if entry.label == label)


@dataclass(frozen=True, kw_only=True)
class BalanceReport:
    pristine_count: int
    fake_count: int
    warning: str | None = None

    def __post_init__(self) -> None:
        assert self.pristine_count >= 0
        assert self.fake_count >= 0

    @property
    def balanced(self) -> bool:
        return self.pristine_count == self.fake_count
