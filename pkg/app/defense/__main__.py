from pathlib import Path
from typing import Annotated

from rich.panel import Panel
from rich.table import Column, Table
from rich.text import Text
from typer import Option, Typer

from .._cli import ConfigPathOption, ModelRootOption, console, exit_codes
from ..config import load_config
from ..dataset.manifest import balance_check, read_manifest
from ..dataset.model import DatasetManifest
from ..errors import IngestionError, RunError
from ..evaluation.config import DetectorArtifact
from .config import AugmentationPolicy, load_policy
from .train import TRAINER_TOY, Trainer, ToyTrainer, load_trainer, train_with_augmentation, write_detector_artifact

app = Typer()


def _trainer(trainer_id: str, manifest: DatasetManifest) -> Trainer:
    if trainer_id == TRAINER_TOY:
        face_box = manifest.metadata.face_box
        return ToyTrainer(face_box.to_box() if face_box is not None else None)

    return load_trainer(trainer_id)


@app.command()
def train(
    manifest_path: Annotated[Path, Option("--manifest", help="Training manifest (jsonl).")],
    out: Annotated[Path, Option("--out", help="Detector artifact (JSON).")],
    policy_path: Annotated[
        Path | None,
        Option("--policy", help="Augmentation policy (JSON), overrides config."),
    ] = None,
    trainer_id: Annotated[str, Option("--trainer", help="`toy` or an external `module:callable`.")] = TRAINER_TOY,
    config_path: ConfigPathOption = None,
    model_root: ModelRootOption = None,
) -> None:
    with exit_codes():
        config = load_config(config_path)
        policy = load_policy(policy_path) if policy_path is not None else config.policy

        try:
            manifest = read_manifest(manifest_path)
        except IngestionError as error:
            raise RunError(f"Unable to load manifest: {error}") from error
        balance_check(manifest)

        trainer = _trainer(trainer_id, manifest)

        with console.status("Training..."):
            artifact = train_with_augmentation(
                manifest,
                policy,
                trainer,
                hyperparameters=config.hyperparameters,
                sr_backends=config.sr_backends,
                model_root=model_root,
            )
        write_detector_artifact(artifact, out)

    display_training(artifact, policy, out)


def display_training(artifact: DetectorArtifact, policy: AugmentationPolicy, out: Path) -> None:
    table = Table(
        Column("Key"),
        Column("Value", overflow="fold"),
        title=f"Trained `{artifact.training.trainer}` on {artifact.training.source}",
    )
    table.add_row(Text("detector"), Text(artifact.detector.model_dump_json()))
    table.add_row(Text("samples"), Text(f"{artifact.training.samples}"))
    table.add_row(
        Text("sr augmentation"),
        Text(
            f"p={policy.sr_probability} "
            + ", ".join(f"{choice.sr_backend_id}x{choice.scale}" for choice in policy.sr_choices)
            + f" ({policy.composition})",
            style="yellow" if policy.sr_probability > 0 else "",
        ),
    )
    for key, value in artifact.training.results.items():
        table.add_row(Text(key), Text(f"{value}"))

    console.print(table)
    console.print(Panel(Text(f"{out}"), title="Written", style="green"))


if __name__ == "__main__":
    app()
