import math

import numpy as np
import pytest

from metrics.services import pseudo_label_audit
from prototypes.ledger import PseudoLabelLedger
from utils.exceptions import DimensionMismatchException


@pytest.fixture
def truth():
    labels = np.zeros((8, 2))
    labels[[0, 4], 1] = 1.0
    return labels


def test_audit_counts_correct_tags(truth):
    ledger = PseudoLabelLedger.empty(8, [1]).tag(1, [0, 1], 1, 5).tag(1, [2, 3], 0, 5)

    report = pseudo_label_audit(ledger, truth)

    assert report.tagged == 4 and report.correct == 3
    assert report.precision == pytest.approx(0.75)
    assert report.coverage == pytest.approx(0.5)
    audit = report.per_class[1]
    assert audit.precision_1 == pytest.approx(0.5)
    assert audit.precision_0 == pytest.approx(1.0)
    assert audit.recall_1 == pytest.approx(0.5)


def test_audit_merges_clients_per_class(truth):
    first = PseudoLabelLedger.empty(8, [1]).tag(1, [0], 1, 5)
    second = PseudoLabelLedger.empty(8, [0, 1]).tag(1, [4], 1, 6).tag(0, [7], 1, 6)

    report = pseudo_label_audit([first, second], [truth, truth])

    assert report.class_ids() == (0, 1)
    assert report.per_class[1].correct_1 == 2
    assert report.per_class[0].correct == 0
    assert report.entries == 8 + 16


def test_audit_without_tags_has_zero_coverage(truth):
    report = pseudo_label_audit(PseudoLabelLedger.empty(8, [1]), truth)
    assert report.coverage == 0.0
    assert math.isnan(report.precision)


def test_audit_requires_matching_truth(truth):
    with pytest.raises(DimensionMismatchException):
        pseudo_label_audit([PseudoLabelLedger.empty(8, [1])], [])
    with pytest.raises(DimensionMismatchException):
        pseudo_label_audit(PseudoLabelLedger.empty(5, [1]), truth)
