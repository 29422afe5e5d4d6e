import json
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import cache
from hashlib import sha256
from importlib import metadata
from math import floor, isinf
from threading import local

from pydantic import BaseModel

DISTRIBUTION = "sr-attack-toolkit"


def config_hash(config: BaseModel) -> str:
    # stable across runs: canonical json, sorted keys
    payload = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":")).encode()
    return sha256(payload).hexdigest()[:16]


@cache
def toolkit_version() -> str:
    try:
        return metadata.version(DISTRIBUTION)
    except metadata.PackageNotFoundError:
        # running from a source tree
        return "0+unknown"


class PerThread[T]:
    # one lazily built instance per worker thread, for stateful detectors and models
    def __init__(self, factory: Callable[[], T]) -> None:
        self._factory = factory
        self._local = local()

    def get(self) -> T:
        instance: T | None = getattr(self._local, "instance", None)
        if instance is None:
            instance = self._factory()
            self._local.instance = instance

        return instance


def map_ordered[T, R](function: Callable[[T], R], items: Iterable[T], workers: int) -> list[R]:
    # results in input order, regardless of completion order
    assert workers >= 1

    if workers == 1:
        return [function(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(function, items))


def exact(value: Fraction | float) -> Fraction:
    # floats are taken at their shortest repr, so 0.125 stays 1/8 and 0.1 becomes 1/10, not its binary neighbour
    if isinstance(value, Fraction):
        return value

    return Fraction(repr(float(value)))


def fixed(value: Fraction | float, places: int) -> str:
    # decimal rendering, rounded half away from zero
    if not isinstance(value, Fraction) and isinf(value):
        return "inf" if value > 0 else "-inf"

    scaled = exact(value) * 10**places
    rounded = floor(abs(scaled) + Fraction(1, 2))
    sign = "-" if scaled < 0 and rounded != 0 else ""

    if places == 0:
        return f"{sign}{rounded}"

    return f"{sign}{rounded // 10**places}.{rounded % 10**places:0{places}d}"
