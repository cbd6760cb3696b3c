import numpy as np
import pytest

from core_model.entities import ModelParams
from core_model.network import backward, forward, init_params
from unit_tests.helpers import numeric_gradient, relative_error
from utils.exceptions import DimensionMismatchException, NonFiniteValueException


def test_init_params_is_seeded_and_has_expected_shapes():
    first = init_params(6, 8, 3, np.random.default_rng(11))
    second = init_params(6, 8, 3, np.random.default_rng(11))

    assert first.W1.shape == (6, 8) and first.W2.shape == (8, 3)
    assert not first.b1.any() and not first.b2.any()
    for (_, a), (_, b) in zip(first.items(), second.items()):
        assert np.array_equal(a, b)


def test_forward_outputs_are_consistent(random_params, rng):
    params = random_params()
    result = forward(params, rng.normal(size=(7, 4)))

    assert result.features.shape == (7, 5)
    assert result.probs.shape == (7, 3)
    assert (result.features >= 0).all()
    assert ((result.probs > 0) & (result.probs < 1)).all()
    assert np.allclose(result.probs, 1.0 / (1.0 + np.exp(-result.logits)))


def test_forward_rejects_wrong_width(random_params, rng):
    with pytest.raises(DimensionMismatchException):
        forward(random_params(), rng.normal(size=(3, 5)))


def test_forward_rejects_non_finite_inputs(random_params):
    inputs = np.ones((2, 4))
    inputs[1, 2] = np.nan
    with pytest.raises(NonFiniteValueException):
        forward(random_params(), inputs)


def test_model_params_reject_inconsistent_shapes():
    with pytest.raises(DimensionMismatchException):
        ModelParams(W1=np.zeros((3, 4)), b1=np.zeros(5), W2=np.zeros((4, 2)), b2=np.zeros(2))


@pytest.mark.parametrize("seed", range(20))
def test_backward_matches_finite_differences(random_params, seed):
    generator = np.random.default_rng(seed)
    params = random_params(generator=generator)
    inputs = generator.normal(size=(6, 4))
    upstream = generator.normal(size=(6, 3))

    def objective():
        return float(np.sum(upstream * forward(params, inputs).logits))

    grads = backward(params, forward(params, inputs), upstream)
    for name, array in params.items():
        numeric = numeric_gradient(objective, array)
        assert relative_error(getattr(grads, name), numeric) < 1e-4, name


def test_backward_rejects_mismatched_gradient(random_params, rng):
    params = random_params()
    result = forward(params, rng.normal(size=(2, 4)))
    with pytest.raises(DimensionMismatchException):
        backward(params, result, np.zeros((2, 4)))
