from collections.abc import Set
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from ..imaging.model import ImageTensor


@dataclass(frozen=True, kw_only=True)
class SRBackendDescriptor:
    id: str

    # None - all scales (analytic backends), otherwise scales the model was trained for
    supported_scales: Set[int] | None

    model_artifact_path: Path | None = None

    # preprocessing applied by the adapter, recorded in run metadata
    preprocessing: str | None = None

    def __post_init__(self) -> None:
        assert self.id

        if self.supported_scales is not None:
            # model backends must support at least one scale
            assert self.supported_scales

            # scales are positive
            assert all(scale >= 1 for scale in self.supported_scales)

    def supports(self, K: int) -> bool:
        if K < 1:
            return False
        return self.supported_scales is None or K in self.supported_scales


class SRBackend(Protocol):
    # upscale by exactly K, 8-bit in / 8-bit out
    # neural backends hold a loaded model and must not be shared between workers

    @property
    def descriptor(self) -> SRBackendDescriptor: ...

    def upscale(self, img: ImageTensor, K: int) -> ImageTensor: ...
