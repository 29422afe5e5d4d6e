from fractions import Fraction
from math import inf
from threading import get_ident
from time import sleep

import pytest
from pydantic import BaseModel

from app.common import PerThread, config_hash, exact, fixed, map_ordered


class _Config(BaseModel):
    b: int
    a: str


@pytest.mark.parametrize(
    "value, places, expected",
    [
        (Fraction(1913, 2000) * 100, 1, "95.7"),
        (Fraction(5, 2), 0, "3"),
        (Fraction(-5, 2), 0, "-3"),
        (0.125, 2, "0.13"),
        (0.0, 3, "0.000"),
        (-0.0001, 1, "0.0"),
        (inf, 1, "inf"),
        (-inf, 1, "-inf"),
    ],
)
def test_fixed(value: Fraction | float, places: int, expected: str) -> None:
    assert fixed(value, places) == expected


def test_exact() -> None:
    assert exact(0.1) == Fraction(1, 10)
    assert exact(0.125) == Fraction(1, 8)
    assert exact(Fraction(2, 3)) == Fraction(2, 3)


def test_config_hash_is_stable() -> None:
    assert config_hash(_Config(a="x", b=1)) == config_hash(_Config(b=1, a="x"))
    assert config_hash(_Config(a="x", b=1)) != config_hash(_Config(a="x", b=2))
    assert len(config_hash(_Config(a="x", b=1))) == 16


def test_map_ordered_keeps_input_order() -> None:
    def slow_square(value: int) -> int:
        # later items finish first
        sleep((10 - value) * 0.002)
        return value * value

    assert map_ordered(slow_square, range(10), 4) == [value * value for value in range(10)]
    assert map_ordered(slow_square, range(10), 1) == [value * value for value in range(10)]


def test_per_thread_builds_once_per_thread() -> None:
    built = list[int]()

    def factory() -> int:
        built.append(get_ident())
        return get_ident()

    instances = PerThread(factory)

    assert instances.get() == instances.get()
    assert len(built) == 1

    owners = map_ordered(lambda _: instances.get(), range(20), 4)
    assert len(set(built)) == len(built)
    assert set(owners) <= set(built)
