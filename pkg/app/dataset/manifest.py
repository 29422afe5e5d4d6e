from logging import getLogger
from pathlib import Path
from typing import Literal

from more_itertools import duplicates_everseen
from pydantic import BaseModel, ValidationError

from ..errors import IngestionError
from .model import BalanceReport, DatasetManifest, Label, ManifestEntry, ManifestMetadata

_logger = getLogger(__name__)

WARNING_EMPTY = "empty manifest"

# file name of manifests written next to the images they list
MANIFEST_NAME = "manifest.jsonl"


class ManifestHeader(BaseModel):
    # first line of every manifest file

    # used to distinguish manifest versions if more then one is available
    sr_attack: Literal["manifest:v1"]

    metadata: ManifestMetadata


def write_manifest(manifest: DatasetManifest, path: Path) -> None:
    # one utf-8 json record per line, header first
    # paths under the manifest directory are stored relative to it, so trees can be moved around
    path.parent.mkdir(parents=True, exist_ok=True)
    base = path.parent.absolute()

    lines = [ManifestHeader(sr_attack="manifest:v1", metadata=manifest.metadata).model_dump_json()]
    for entry in manifest.entries:
        entry_path = manifest.resolve(entry).absolute()
        if entry_path.is_relative_to(base):
            entry_path = entry_path.relative_to(base)

        lines.append(entry.model_copy(update={"path": entry_path}).model_dump_json(exclude_defaults=True))

    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path: Path) -> DatasetManifest:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as error:
        raise IngestionError(f"Unable to read manifest `{path}`: {error}") from error

    lines = [line for line in lines if line.strip()]
    if not lines:
        raise IngestionError(f"Manifest `{path}` has no header line.")

    try:
        header = ManifestHeader.model_validate_json(lines[0])
        entries = [ManifestEntry.model_validate_json(line) for line in lines[1:]]
    except ValidationError as error:
        raise IngestionError(f"Malformed manifest `{path}`: {error}") from error

    base = path.parent.absolute()
    entries = [
        entry if entry.path.is_absolute() else entry.model_copy(update={"path": base / entry.path})
        for entry in entries
    ]

    entry_ids_duplicate = set(duplicates_everseen(entry.entry_id for entry in entries))
    if entry_ids_duplicate:
        raise IngestionError(f"Manifest `{path}` has duplicated entry ids: {", ".join(sorted(entry_ids_duplicate))}")

    paths_duplicate = set(duplicates_everseen(entry.path for entry in entries))
    if paths_duplicate:
        raise IngestionError(f"Manifest `{path}` has duplicated paths: {", ".join(map(str, sorted(paths_duplicate)))}")

    return DatasetManifest(entries=entries, metadata=header.metadata, root=base)


def balance_check(manifest: DatasetManifest) -> BalanceReport:
    pristine_count = manifest.count(Label.PRISTINE)
    fake_count = manifest.count(Label.FAKE)

    warning: str | None = None
    if pristine_count == 0 and fake_count == 0:
        warning = WARNING_EMPTY
        _logger.warning("Manifest `%s` is empty.", manifest.metadata.source)
    elif pristine_count != fake_count:
        _logger.warning(
            "Manifest `%s` is not balanced: %d pristine, %d fake.",
            manifest.metadata.source,
            pristine_count,
            fake_count,
        )

    return BalanceReport(
        pristine_count=pristine_count,
        fake_count=fake_count,
        warning=warning,
    )
