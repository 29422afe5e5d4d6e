from pathlib import Path
from typing import Annotated

from rich.panel import Panel
from rich.table import Column, Table
from rich.text import Text
from typer import Option, Typer

from .._cli import ConfigPathOption, ModelRootOption, WorkersOption, console, exit_codes
from ..config import load_config, resolve_attack
from ..dataset.manifest import MANIFEST_NAME, balance_check, read_manifest
from ..dataset.model import DatasetManifest
from ..errors import IngestionError, RunError
from .config import AttackScope
from .config import Config as AttackConfig
from .engine import ATTACK_RUN_NAME, attack_dataset

app = Typer()


@app.command()
def attack(
    manifest_path: Annotated[Path, Option("--manifest", help="Dataset manifest (jsonl).")],
    out_dir: Annotated[Path, Option("--out", help="Directory for attacked images, manifest and run metadata.")],
    scale: Annotated[int | None, Option("--scale", min=1, help="Scale factor K.")] = None,
    sr_backend_id: Annotated[str | None, Option("--sr", help="SR backend id.")] = None,
    attack_scope: Annotated[AttackScope | None, Option("--scope", help="Attacked classes.")] = None,
    face_detector_id: Annotated[str | None, Option("--detector", help="Face detector id.")] = None,
    face_margin: Annotated[float | None, Option("--margin", min=0.0, help="Face box margin.")] = None,
    workers: WorkersOption = None,
    config_path: ConfigPathOption = None,
    model_root: ModelRootOption = None,
) -> None:
    with exit_codes():
        config = load_config(config_path)
        attack_config = resolve_attack(
            config,
            scale=scale,
            sr_backend_id=sr_backend_id,
            attack_scope=attack_scope,
            face_detector_id=face_detector_id,
            face_margin=face_margin,
        )

        try:
            manifest = read_manifest(manifest_path)
        except IngestionError as error:
            raise RunError(f"Unable to load manifest: {error}") from error
        balance_check(manifest)

        with console.status("Attacking..."):
            attacked = attack_dataset(
                manifest,
                attack_config,
                out_dir,
                sr_backends=config.sr_backends,
                face_detectors=config.face_detectors,
                model_root=model_root,
                workers=workers if workers is not None else config.workers,
                max_failure_fraction=config.max_failure_fraction,
            )

    display_attack(attack_config, attacked, out_dir)


def display_attack(config: AttackConfig, attacked: DatasetManifest, out_dir: Path) -> None:
    copied = sum(1 for entry in attacked.entries if entry.error is None and entry.faces_attacked is None)
    skipped_no_face = sum(1 for entry in attacked.entries if entry.skipped_no_face)
    failed = sum(1 for entry in attacked.entries if entry.error is not None)

    table = Table(
        Column("Entries", justify="right"),
        Column("Attacked", justify="right"),
        Column("Copied", justify="right"),
        Column("No face", justify="right"),
        Column("Failed", justify="right"),
        Column("Faces", justify="right"),
        title=f"Attack {config.key} ({config.attack_scope})",
    )
    table.add_row(
        Text(f"{len(attacked)}"),
        Text(f"{len(attacked) - copied - skipped_no_face - failed}", style="green"),
        Text(f"{copied}"),
        Text(f"{skipped_no_face}", style="yellow" if skipped_no_face else ""),
        Text(f"{failed}", style="red" if failed else ""),
        Text(f"{sum(entry.faces_attacked or 0 for entry in attacked.entries)}"),
    )
    console.print(table)

    console.print(
        Panel(
            Text(f"{out_dir / MANIFEST_NAME}\n{out_dir / ATTACK_RUN_NAME}"),
            title="Written",
            style="green",
        )
    )


if __name__ == "__main__":
    app()
