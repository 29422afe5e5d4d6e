# side-effect module to be used within __main__.py

import logging
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import Annotated

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.style import Style
from rich.table import Column, Table
from rich.text import Text
from rich.traceback import install
from typer import Exit, Option

from .errors import BackendUnavailableError, IngestionError, InvalidArgumentError, RunError, SpecError
from .evaluation.metrics import percent

console = Console()

install(
    console=console,
)

logging.basicConfig(
    level=logging.WARNING,
    format="%(message)s",
    datefmt="[%X]",
    handlers=[
        RichHandler(
            rich_tracebacks=True,
            markup=False,
        )
    ],
)
logging.getLogger("app").setLevel(logging.DEBUG)
logging.getLogger("__main__").setLevel(logging.DEBUG)

EXIT_RUN_ERROR = 1
EXIT_USAGE_ERROR = 2

# environment variable with the directory relative model artifact paths are resolved against
MODEL_ROOT_ENVVAR = "SR_ATTACK_MODEL_ROOT"

ConfigPathOption = Annotated[
    Path | None,
    Option("--config", help="Run config file (JSON), command line options override its keys."),
]
ModelRootOption = Annotated[
    Path | None,
    Option("--model-root", envvar=MODEL_ROOT_ENVVAR, help="Directory relative model artifact paths resolve against."),
]
WorkersOption = Annotated[int | None, Option("--workers", min=1, help="Worker threads, overrides config.")]


@contextmanager
def exit_codes() -> Iterator[None]:
    # usage errors exit with 2, run-level failures with 1
    try:
        yield
    except (SpecError, ValidationError) as error:
        console.print(Text(f"Invalid configuration: {error}", style="red"))
        raise Exit(EXIT_USAGE_ERROR) from error
    except (RunError, BackendUnavailableError, IngestionError, InvalidArgumentError) as error:
        console.print(Text(f"{type(error).__name__}: {error}", style="red"))
        raise Exit(EXIT_RUN_ERROR) from error


def percent_text(value: Fraction | None, *, higher_is_better: bool) -> Text:
    if value is None:
        return Text("-", style=Style(dim=True))

    # green when good, red when bad, neutral in between
    good = value >= Fraction(9, 10) if higher_is_better else value <= Fraction(1, 10)
    bad = value <= Fraction(6, 10) if higher_is_better else value >= Fraction(4, 10)

    return Text(percent(value), style="green" if good else "red" if bad else "")


def metrics_table(title: str, rows: Iterable[tuple[str, str, bool, str, int, dict[str, Fraction | None]]]) -> Table:
    # rows: (model, forgery method, sr, sr method, scale, {metric: value})
    table = Table(
        Column("Model"),
        Column("Forgery Method"),
        Column("SR"),
        Column("SR Method"),
        Column("K", justify="right"),
        Column("FNR (%)", justify="right"),
        Column("FPR (%)", justify="right"),
        Column("Recall (%)", justify="right"),
        Column("Precision (%)", justify="right"),
        Column("AUC (%)", justify="right"),
        Column("Accuracy (%)", justify="right"),
        title=title,
    )

    for model, forgery_method, sr, sr_method, scale, metrics in rows:
        table.add_row(
            Text(model),
            Text(forgery_method),
            Text("✓" if sr else "✗", style="yellow" if sr else Style(dim=True)),
            Text(sr_method),
            Text(f"{scale}"),
            percent_text(metrics.get("fnr"), higher_is_better=False),
            percent_text(metrics.get("fpr"), higher_is_better=False),
            percent_text(metrics.get("recall"), higher_is_better=True),
            percent_text(metrics.get("precision"), higher_is_better=True),
            percent_text(metrics.get("auc"), higher_is_better=True),
            percent_text(metrics.get("accuracy"), higher_is_better=True),
        )

    return table
