import math

import numpy as np
import pytest

from metrics.services import auc, balanced_accuracy, evaluate, mean_average_precision
from unit_tests.oracles import pairwise_auc, ranked_average_precision
from utils.exceptions import (
    DimensionMismatchException, EmptyDatasetException, InvalidConfigurationException, InvalidLabelValuesException
)


@pytest.fixture
def random_problem():
    generator = np.random.default_rng(17)
    truth = generator.integers(0, 2, size=(200, 3))
    scores = np.round(generator.uniform(size=(200, 3)), 2)
    return scores, truth


def test_balanced_accuracy_hand_example():
    result = balanced_accuracy(np.array([0.9, 0.6, 0.4, 0.1]), np.array([1, 0, 1, 0]))
    assert result.value == pytest.approx(0.5)
    assert result.sensitivity[0] == pytest.approx(0.5)
    assert result.specificity[0] == pytest.approx(0.5)


def test_balanced_accuracy_threshold_is_inclusive():
    result = balanced_accuracy(np.array([0.5, 0.49]), np.array([1, 0]))
    assert result.value == pytest.approx(1.0)


def test_balanced_accuracy_rejects_threshold_outside_unit_interval():
    with pytest.raises(InvalidConfigurationException):
        balanced_accuracy(np.array([0.5]), np.array([1]), threshold=1.0)


def test_auc_credits_ties_with_one_half():
    assert auc(np.array([0.8, 0.8, 0.3]), np.array([1, 0, 0])).value == pytest.approx(0.75)


def test_average_precision_hand_example():
    assert mean_average_precision(np.array([0.9, 0.7, 0.4, 0.2]), np.array([0, 1, 0, 0])).value == pytest.approx(0.5)


def test_auc_and_ap_match_brute_force_oracles(random_problem):
    scores, truth = random_problem

    roc = auc(scores, truth)
    ap = mean_average_precision(scores, truth)

    for c in range(3):
        assert abs(roc.per_class[c] - pairwise_auc(scores[:, c], truth[:, c])) <= 1e-12
        assert abs(ap.per_class[c] - ranked_average_precision(scores[:, c].tolist(), truth[:, c].tolist())) <= 1e-12
    assert roc.value == pytest.approx(roc.per_class.mean())


def test_ranking_metrics_are_invariant_to_monotone_transforms(random_problem):
    scores, truth = random_problem
    assert auc(np.exp(3 * scores), truth).value == pytest.approx(auc(scores, truth).value, abs=1e-12)
    assert mean_average_precision(scores ** 3, truth).value == pytest.approx(
        mean_average_precision(scores, truth).value, abs=1e-12)


def test_negated_scores_flip_auc(random_problem):
    scores, truth = random_problem
    assert auc(-scores, truth).value == pytest.approx(1.0 - auc(scores, truth).value, abs=1e-12)


def test_single_valued_class_is_excluded(caplog):
    truth = np.array([[1, 0], [0, 0], [1, 0], [0, 0]])
    scores = np.array([[0.9, 0.1], [0.2, 0.4], [0.7, 0.3], [0.1, 0.2]])

    report = evaluate(scores, truth)

    assert math.isnan(report.per_class_auc[1]) and math.isnan(report.per_class_bacc[1])
    assert report.auc == pytest.approx(1.0)
    assert report.bacc == pytest.approx(1.0)
    assert report.map == pytest.approx(1.0)
    assert "excluded" in caplog.text


def test_invalid_inputs_are_rejected():
    with pytest.raises(EmptyDatasetException):
        auc(np.zeros((0, 2)), np.zeros((0, 2)))
    with pytest.raises(InvalidLabelValuesException):
        auc(np.array([0.2, 0.4]), np.array([0, 2]))
    with pytest.raises(DimensionMismatchException):
        auc(np.zeros((3, 2)), np.zeros((3, 1)))
