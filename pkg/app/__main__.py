from typer import Typer

from . import _cli as _  # noqa: F401
from .attack.__main__ import app as attack
from .common import toolkit_version
from .dataset.__main__ import app as dataset
from .defense.__main__ import app as defense
from .evaluation.__main__ import app as evaluation
from .experiment.__main__ import app as experiment

app = Typer(
    help=(
        "Super-resolution black-box attack on deepfake detectors. "
        "Faces are shrunk and restored by an SR backend, then detectors are scored on the result."
    ),
)

# sub apps are merged, every command is top level
app.add_typer(dataset)
app.add_typer(attack)
app.add_typer(evaluation)
app.add_typer(defense)
app.add_typer(experiment)


@app.command()
def version() -> None:
    print(toolkit_version())


if __name__ == "__main__":
    app()
