from collections.abc import Sequence
from fractions import Fraction

import numpy as np
from scipy.stats import rankdata

from ..common import exact, fixed
from ..dataset.model import Label
from ..errors import InvalidArgumentError
from .model import ConfusionCounts, DetectionScore, MetricsReport

THRESHOLD_DEFAULT = 0.5


def confusion(scores: Sequence[DetectionScore], threshold: float = THRESHOLD_DEFAULT) -> ConfusionCounts:
    # predicted fake iff score > threshold, a score equal to the threshold is pristine
    if not scores:
        raise InvalidArgumentError("Confusion counts are undefined for an empty score list.")
    if not 0.0 <= threshold <= 1.0:
        raise InvalidArgumentError(f"Threshold must be within [0, 1], got {threshold}.")

    tp = fp = tn = fn = 0
    for score in scores:
        predicted_fake = bool(score.score > threshold)
        match score.label, predicted_fake:
            case Label.FAKE, True:
                tp += 1
            case Label.FAKE, False:
                fn += 1
            case Label.PRISTINE, True:
                fp += 1
            case Label.PRISTINE, False:
                tn += 1
            case _:
                assert False

    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def auc(scores: Sequence[DetectionScore]) -> Fraction:
    # mann-whitney statistic: fraction of (fake, pristine) pairs ordered correctly, ties count one half
    # U = sum of fake ranks - n_fake (n_fake + 1) / 2, ranks averaged over ties
    fake = np.array([score.label == Label.FAKE for score in scores], dtype=bool)
    fake_count = int(fake.sum())
    pristine_count = len(scores) - fake_count

    if fake_count == 0 or pristine_count == 0:
        raise InvalidArgumentError(
            f"AUC needs both classes, got {fake_count} fake and {pristine_count} pristine scores."
        )

    ranks = rankdata(np.array([score.score for score in scores], dtype=np.float64), method="average")

    # ranks are multiples of one half, sums are exact in float64
    ranks_fake = Fraction(float(ranks[fake].sum()))
    u = ranks_fake - Fraction(fake_count * (fake_count + 1), 2)

    return u / (fake_count * pristine_count)


def compute_metrics(counts: ConfusionCounts, auc_: Fraction | float) -> MetricsReport:
    if counts.fake_count == 0 or counts.pristine_count == 0:
        raise InvalidArgumentError(
            f"Metrics need both classes, got {counts.fake_count} fake and {counts.pristine_count} pristine samples."
        )

    fnr = Fraction(counts.fn, counts.fake_count)

    return MetricsReport(
        counts=counts,
        fnr=fnr,
        fpr=Fraction(counts.fp, counts.pristine_count),
        recall=1 - fnr,
        # no positive predictions, nothing predicted wrong
        precision=Fraction(counts.tp, counts.tp + counts.fp) if counts.tp + counts.fp > 0 else Fraction(1),
        accuracy=Fraction(counts.tp + counts.tn, counts.total),
        auc=exact(auc_),
    )


def percent(value: Fraction | float) -> str:
    # one decimal, half away from zero, as in published tables
    return fixed(exact(value) * 100, 1)
