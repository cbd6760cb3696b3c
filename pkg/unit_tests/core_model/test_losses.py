import numpy as np
import pytest
from scipy.special import expit

from core_model.entities import ClassPriors
from core_model.enums import LossNormalizer
from core_model.losses import adjust_probs, bce_loss, mse_consistency_loss, wpc_loss
from unit_tests.helpers import numeric_gradient, relative_error
from utils.exceptions import DegeneratePriorException, DimensionMismatchException, InvalidLabelValuesException


def _instance(seed, shape=(5, 4)):
    generator = np.random.default_rng(seed)
    logits = generator.uniform(-3.0, 3.0, size=shape)
    labels = generator.integers(0, 2, size=shape).astype(float)
    mask = generator.integers(0, 2, size=shape).astype(float)
    priors = ClassPriors.from_positive_rates(generator.uniform(0.05, 0.95, size=shape[1]))
    return logits, labels, mask, priors


@pytest.mark.parametrize("seed", range(20))
def test_bce_gradient_matches_finite_differences(seed):
    logits, labels, _, _ = _instance(seed)
    _, grad = bce_loss(expit(logits), labels)
    numeric = numeric_gradient(lambda: bce_loss(expit(logits), labels)[0], logits)
    assert relative_error(grad, numeric) < 1e-4


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("normalizer", [LossNormalizer.CLASSES, LossNormalizer.ACTIVE])
def test_wpc_gradient_matches_finite_differences(seed, normalizer):
    logits, labels, mask, priors = _instance(seed)
    _, grad = wpc_loss(expit(logits), labels, mask, priors, normalizer)
    numeric = numeric_gradient(lambda: wpc_loss(expit(logits), labels, mask, priors, normalizer)[0], logits)
    assert relative_error(grad, numeric) < 1e-4


@pytest.mark.parametrize("seed", range(20))
def test_wpc_gradient_is_exactly_zero_off_mask(seed):
    logits, labels, mask, priors = _instance(seed)
    _, grad = wpc_loss(expit(logits), labels, mask, priors)
    assert np.all(grad[mask == 0] == 0.0)


def test_wpc_with_empty_mask_is_zero():
    logits, labels, _, priors = _instance(1)
    loss, grad = wpc_loss(expit(logits), labels, np.zeros(labels.shape), priors)
    assert loss == 0.0
    assert not grad.any()


def test_wpc_with_full_mask_and_balanced_priors_equals_bce():
    logits, labels, _, _ = _instance(2)
    probs = expit(logits)
    priors = ClassPriors.balanced(labels.shape[1])

    wpc_value, wpc_grad = wpc_loss(probs, labels, np.ones(labels.shape), priors)
    bce_value, bce_grad = bce_loss(probs, labels)

    assert wpc_value == bce_value
    assert np.array_equal(wpc_grad, bce_grad)


def test_bce_rejects_non_binary_labels():
    with pytest.raises(InvalidLabelValuesException):
        bce_loss(np.full((2, 2), 0.5), np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_bce_rejects_shape_mismatch():
    with pytest.raises(DimensionMismatchException):
        bce_loss(np.full((2, 2), 0.5), np.ones((2, 3)))


def test_mse_single_entry_example():
    loss, grad = mse_consistency_loss(np.array([[0.9, 0.2]]), np.array([[0.4, 0.7]]), np.array([[1.0, 0.0]]))
    assert loss == pytest.approx(0.25, abs=1e-12)
    assert grad[0, 1] == 0.0
    assert grad[0, 0] == pytest.approx(2 * 0.5 * 0.9 * 0.1)


def test_mse_with_empty_mask_is_zero():
    loss, grad = mse_consistency_loss(np.full((3, 2), 0.7), np.full((3, 2), 0.1), np.zeros((3, 2)))
    assert loss == 0.0
    assert not grad.any()


@pytest.mark.parametrize("seed", range(20))
def test_mse_gradient_matches_finite_differences(seed):
    logits, _, mask, _ = _instance(seed)
    mask[0, 0] = 1.0
    teacher = np.random.default_rng(seed + 100).uniform(0.01, 0.99, size=logits.shape)
    _, grad = mse_consistency_loss(expit(logits), teacher, mask)
    numeric = numeric_gradient(lambda: mse_consistency_loss(expit(logits), teacher, mask)[0], logits)
    assert relative_error(grad, numeric) < 1e-4
    assert np.all(grad[mask == 0] == 0.0)


def test_adjust_probs_is_identity_for_balanced_priors():
    probs = np.random.default_rng(3).uniform(0.0, 1.0, size=(10_000, 1))
    adjusted = adjust_probs(probs, ClassPriors.from_positive_rates([0.5]))
    assert np.array_equal(adjusted, probs)


def test_adjust_probs_is_monotone_and_range_preserving():
    generator = np.random.default_rng(4)
    low = generator.uniform(0.01, 0.98, size=10_000)
    high = low + 1e-3
    for pi in generator.uniform(0.01, 0.99, size=20):
        priors = ClassPriors.from_positive_rates([pi])
        adjusted_low = adjust_probs(low[:, None], priors)[:, 0]
        adjusted_high = adjust_probs(high[:, None], priors)[:, 0]
        assert np.all(adjusted_low < adjusted_high)
        assert np.all((adjusted_low > 0.0) & (adjusted_high < 1.0))


def test_adjust_probs_shifts_towards_prior():
    adjusted = adjust_probs(np.array([[0.5, 0.5]]), ClassPriors.from_positive_rates([0.2, 0.8]))
    assert adjusted[0, 0] == pytest.approx(0.2)
    assert adjusted[0, 1] == pytest.approx(0.8)


def test_adjust_probs_rejects_degenerate_priors():
    priors = ClassPriors(pi1=np.array([1.0, 0.3]), pi0=np.array([0.0, 0.7]))
    with pytest.raises(DegeneratePriorException):
        adjust_probs(np.full((1, 2), 0.5), priors)


def test_la_temperature_one_matches_plain_adjustment():
    probs = np.array([[0.3, 0.6]])
    plain = adjust_probs(probs, ClassPriors.from_positive_rates([0.2, 0.7]))
    assert np.allclose(plain, probs * [0.2, 0.7] / (probs * [0.2, 0.7] + (1 - probs) * [0.8, 0.3]))
