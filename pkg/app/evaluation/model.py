from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction

from ..dataset.model import Label


class Aggregation(StrEnum):
    # every scored image is one sample
    FRAME = "frame"

    # one sample per source video, scored by the fraction of its frames voted fake
    VIDEO = "video"


@dataclass(frozen=True, kw_only=True)
class DetectionScore:
    entry_id: str
    label: Label

    # probability that the image is fake
    score: float

    # forgery method of the scored entry, used to split tables into rows
    forgery_method: str

    def __post_init__(self) -> None:
        assert 0.0 <= self.score <= 1.0


@dataclass(frozen=True, kw_only=True)
class ScoredManifest:
    # scores ordered by entry id
    scores: Sequence[DetectionScore]

    # {entry_id: error}, entries failed during attack or scoring
    errors: Mapping[str, str]

    # entries excluded because no face was found
    skipped_no_face: int

    def __post_init__(self) -> None:
        assert self.skipped_no_face >= 0

        # order-stable
        assert all(a.entry_id < b.entry_id for a, b in zip(self.scores, self.scores[1:]))


@dataclass(frozen=True, kw_only=True)
class ConfusionCounts:
    # fake is the positive class
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        assert self.tp >= 0
        assert self.fp >= 0
        assert self.tn >= 0
        assert self.fn >= 0

    @property
    def fake_count(self) -> int:
        return self.tp + self.fn

    @property
    def pristine_count(self) -> int:
        return self.tn + self.fp

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True, kw_only=True)
class MetricsReport:
    # exact ratios, rendered as percentages only at the edges
    counts: ConfusionCounts

    fnr: Fraction
    fpr: Fraction
    recall: Fraction
    precision: Fraction
    accuracy: Fraction
    auc: Fraction

    def __post_init__(self) -> None:
        for value in (self.fnr, self.fpr, self.recall, self.precision, self.accuracy, self.auc):
            assert 0 <= value <= 1

        # complementary rates
        assert self.recall + self.fnr == 1


@dataclass(frozen=True, kw_only=True)
class CellRow:
    # one table row: model x forgery method x sr x sr method
    model: str
    forgery_method: str
    sr_method: str  # `none` for the unattacked cell
    scale: int

    pristine_count: int
    fake_count: int

    # None if metrics are undefined for this row (eg. a class is missing)
    metrics: MetricsReport | None
    error: str | None = None

    def __post_init__(self) -> None:
        assert (self.metrics is None) != (self.error is None)

    @property
    def sr(self) -> bool:
        return self.sr_method != "none"


@dataclass(frozen=True, kw_only=True)
class CellReport:
    model: str
    sr_method: str
    scale: int
    threshold: float
    aggregation: Aggregation

    rows: Sequence[CellRow]

    skipped_no_face: int
    failed_entries: int

    # whole cell failed, rows are empty
    error: str | None = None

    def __post_init__(self) -> None:
        assert self.error is None or not self.rows

    @property
    def failed(self) -> bool:
        return self.error is not None
