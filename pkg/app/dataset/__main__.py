from pathlib import Path
from typing import Annotated

from rich.panel import Panel
from rich.table import Column, Table
from rich.text import Text
from typer import Argument, Option, Typer

from .._cli import console, exit_codes
from .corpus import make_synthetic_corpus
from .frames import DEFAULT_STRIDE, extract_videos
from .layouts import build_manifest
from .manifest import MANIFEST_NAME, balance_check, write_manifest
from .model import FORGERY_METHOD_NONE, BalanceReport, DatasetManifest, Label, Layout

app = Typer()


@app.command()
def corpus(
    out_dir: Annotated[Path, Option("--out", help="Corpus directory, manifest.jsonl is written inside.")],
    n_per_class: Annotated[int, Option("--n", min=1, help="Images per class.")] = 32,
    seed: Annotated[int, Option("--seed", min=0, help="Generator seed.")] = 0,
) -> None:
    with exit_codes():
        with console.status("Generating..."):
            manifest = make_synthetic_corpus(n_per_class, seed, out_dir)

    display_manifest(manifest, balance_check(manifest), out_dir / MANIFEST_NAME)


@app.command()
def ingest(
    root_dir: Annotated[Path, Argument(help="Dataset root directory.")],
    layout: Annotated[Layout, Option("--layout", help="Directory layout of the dataset.")],
    out: Annotated[Path | None, Option("--out", help="Manifest path, defaults to <root>/manifest.jsonl.")] = None,
) -> None:
    with exit_codes():
        manifest = build_manifest(root_dir, layout)
        out = out if out is not None else root_dir / MANIFEST_NAME
        write_manifest(manifest, out)

    display_manifest(manifest, balance_check(manifest), out)


@app.command()
def frames(
    video_paths: Annotated[list[Path], Argument(help="Video files.")],
    out_dir: Annotated[Path, Option("--out", help="Frames directory, manifest.jsonl is written inside.")],
    stride: Annotated[int, Option("--stride", min=1, help="Every stride-th frame is kept.")] = DEFAULT_STRIDE,
    label: Annotated[Label, Option("--label", help="Label of all extracted frames.")] = Label.PRISTINE,
    forgery_method: Annotated[str, Option("--forgery-method", help="Forgery method of fake videos.")] = (
        FORGERY_METHOD_NONE
    ),
) -> None:
    with exit_codes():
        with console.status("Extracting..."):
            manifest = extract_videos(video_paths, stride, out_dir, label=label, forgery_method=forgery_method)

    display_manifest(manifest, balance_check(manifest), out_dir / MANIFEST_NAME)


def display_manifest(manifest: DatasetManifest, balance: BalanceReport, path: Path) -> None:
    table = Table(
        Column("Forgery Method"),
        Column("Label"),
        Column("Entries", justify="right"),
        title=f"Manifest {manifest.metadata.source}",
    )

    methods = sorted({(entry.label, entry.forgery_method) for entry in manifest.entries})
    for label, method in methods:
        table.add_row(
            Text(method),
            Text(label, style="red" if label == Label.FAKE else "green"),
            Text(f"{sum(1 for entry in manifest.entries if (entry.label, entry.forgery_method) == (label, method))}"),
        )

    console.print(table)

    console.print(
        Panel(
            Text(
                f"{balance.pristine_count} pristine, {balance.fake_count} fake"
                + (f" ({balance.warning})" if balance.warning is not None else ""),
            ),
            title="Balanced" if balance.balanced else "Not balanced",
            style="green" if balance.balanced else "yellow",
        )
    )
    console.print(Panel(Text(f"{path}"), title="Written", style="green"))


if __name__ == "__main__":
    app()
