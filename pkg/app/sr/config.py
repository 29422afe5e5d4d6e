from collections.abc import Mapping, Set
from pathlib import Path
from typing import Annotated, Literal, Self

from annotated_types import Ge
from pydantic import BaseModel, Field, RootModel, field_validator

SR_BACKEND_ID_BICUBIC = "bicubic"
SR_BACKEND_ID_IDENTITY = "identity"


class ConfigBicubic(BaseModel):
    # analytic reference upscaler, all scales
    kind: Literal["bicubic"] = "bicubic"


class ConfigIdentity(BaseModel):
    # pixel replication, no reconstruction. exact identity at K = 1
    kind: Literal["identity"] = "identity"


class ConfigTorchScript(BaseModel):
    # serialized tensor-in / tensor-out sr network (edsr-class, bsrgan-class)
    kind: Literal["torchscript"] = "torchscript"

    model_path: Path  # relative paths are resolved against model root
    scales: Set[Annotated[int, Ge(1)]]

    # value range the network expects: 255 for edsr-style models, 1 for bsrgan-style models
    input_range: Literal[1, 255] = 1

    device: str = "cpu"

    @field_validator("scales", mode="after")
    @classmethod
    def validate_scales(cls, scales: Set[int]) -> Set[int]:
        if not scales:
            raise ValueError("Scales must not be empty")

        return scales


type ConfigSRBackend = Annotated[ConfigBicubic | ConfigIdentity | ConfigTorchScript, Field(discriminator="kind")]


class Config(RootModel[Mapping[str, ConfigSRBackend]]):
    # sr backends registry, {id: backend}
    # `bicubic` and `identity` are always available, unless overridden

    @classmethod
    def default(cls) -> Self:
        return cls({})

    def get(self, backend_id: str) -> ConfigSRBackend | None:
        if backend_id in self.root:
            return self.root[backend_id]

        if backend_id == SR_BACKEND_ID_BICUBIC:
            return ConfigBicubic()
        if backend_id == SR_BACKEND_ID_IDENTITY:
            return ConfigIdentity()

        return None
