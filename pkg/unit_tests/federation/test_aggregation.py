import numpy as np
import pytest

from core_model.entities import ModelParams
from federation.aggregation import fedavg_aggregate
from utils.exceptions import DimensionMismatchException, InvalidConfigurationException, ProtocolViolationException


def _scalar_model(value):
    return ModelParams(W1=np.array([[value]]), b1=np.array([value]), W2=np.array([[value]]), b2=np.array([value]))


def test_aggregate_hand_example():
    merged = fedavg_aggregate([_scalar_model(2.0), _scalar_model(6.0)], [1, 3])
    assert merged.W1[0, 0] == pytest.approx(5.0)
    assert merged.b2[0] == pytest.approx(5.0)


def test_single_client_is_identity(random_params):
    params = random_params()
    merged = fedavg_aggregate([params], [17])
    for name, value in params.items():
        assert np.array_equal(getattr(merged, name), value)


def test_aggregate_is_the_weighted_mean(random_params):
    models = [random_params(generator=np.random.default_rng(seed)) for seed in range(4)]
    sizes = [10, 30, 25, 35]

    merged = fedavg_aggregate(models, sizes)

    for name, _ in merged.items():
        expected = sum(size * getattr(model, name) for size, model in zip(sizes, models)) / sum(sizes)
        assert np.allclose(getattr(merged, name), expected, atol=1e-12)


def test_aggregate_is_linear_in_the_models(random_params):
    first = [random_params(generator=np.random.default_rng(seed)) for seed in range(3)]
    second = [random_params(generator=np.random.default_rng(seed + 10)) for seed in range(3)]
    combined = [a.zip_map(b, lambda x, y: 2.0 * x + y) for a, b in zip(first, second)]
    sizes = [5, 7, 9]

    merged = fedavg_aggregate(combined, sizes)
    expected = fedavg_aggregate(first, sizes).zip_map(fedavg_aggregate(second, sizes), lambda x, y: 2.0 * x + y)

    for name, value in merged.items():
        assert np.allclose(value, getattr(expected, name), atol=1e-12)


def test_invalid_aggregation_inputs_are_rejected(random_params):
    with pytest.raises(ProtocolViolationException):
        fedavg_aggregate([], [])
    with pytest.raises(DimensionMismatchException):
        fedavg_aggregate([random_params()], [1, 2])
    with pytest.raises(InvalidConfigurationException):
        fedavg_aggregate([random_params(), random_params()], [3, 0])
    with pytest.raises(DimensionMismatchException):
        fedavg_aggregate([random_params(), random_params(input_dim=2)], [1, 1])
