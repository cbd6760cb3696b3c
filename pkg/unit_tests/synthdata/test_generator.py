import numpy as np
import pytest

from synthdata.entities import SyntheticSpec
from synthdata.generator import generate_dataset
from utils.exceptions import GenerationException


def test_generation_is_deterministic(tiny_spec):
    first, second = generate_dataset(tiny_spec), generate_dataset(tiny_spec)
    assert np.array_equal(first.train_inputs, second.train_inputs)
    assert np.array_equal(first.test_labels, second.test_labels)
    assert np.array_equal(first.directions, second.directions)


def test_generated_shapes_and_binary_labels(tiny_spec):
    bundle = generate_dataset(tiny_spec)
    assert bundle.train_inputs.shape == (120, 6)
    assert bundle.test_labels.shape == (80, 3)
    assert set(np.unique(bundle.train_labels)) <= {0.0, 1.0}
    assert np.allclose(np.linalg.norm(bundle.directions, axis=1), 2.0)


def test_different_seeds_give_different_data(tiny_spec):
    other = SyntheticSpec(**{**tiny_spec.__dict__, "seed": 4})
    assert not np.array_equal(generate_dataset(tiny_spec).train_inputs, generate_dataset(other).train_inputs)


def test_zero_noise_places_equal_label_vectors_at_equal_inputs():
    spec = SyntheticSpec(num_classes=2, input_dim=4, n_train=200, n_test=10, positive_rates=(0.5, 0.5),
                         noise_scale=0.0, seed=1)
    bundle = generate_dataset(spec)
    for labels in ([0.0, 0.0], [1.0, 0.0], [1.0, 1.0]):
        rows = np.flatnonzero((bundle.train_labels == labels).all(axis=1))
        assert rows.size > 0
        assert np.all(bundle.train_inputs[rows] == bundle.train_inputs[rows[0]])


def test_marginal_positive_rate_matches_request():
    spec = SyntheticSpec(num_classes=1, input_dim=2, n_train=10000, n_test=10, positive_rates=(0.1,), seed=2)
    rate = generate_dataset(spec).train_labels.mean()
    assert abs(rate - 0.1) <= 0.02


def test_latent_correlation_carries_over_to_labels():
    correlated = SyntheticSpec(num_classes=2, input_dim=2, n_train=20000, n_test=10, positive_rates=(0.3, 0.3),
                               correlation=SyntheticSpec.uniform_correlation(2, 0.8), seed=6)
    independent = SyntheticSpec(num_classes=2, input_dim=2, n_train=20000, n_test=10, positive_rates=(0.3, 0.3),
                                seed=6)

    labels = generate_dataset(correlated).train_labels
    assert np.corrcoef(labels.T)[0, 1] > 0.3

    labels = generate_dataset(independent).train_labels
    assert abs(np.corrcoef(labels.T)[0, 1]) < 0.05


def test_non_positive_definite_correlation_is_rejected():
    spec = SyntheticSpec(num_classes=3, input_dim=2, n_train=10, n_test=10, positive_rates=(0.2, 0.2, 0.2),
                         correlation=SyntheticSpec.uniform_correlation(3, -0.9))
    with pytest.raises(GenerationException):
        generate_dataset(spec)


@pytest.mark.parametrize("overrides", [
    {"positive_rates": (0.2, 1.0, 0.2)},
    {"positive_rates": (0.2, 0.2)},
    {"n_train": 0},
    {"noise_scale": -1.0},
])
def test_invalid_specs_are_rejected(tiny_spec, overrides):
    spec = SyntheticSpec(**{**tiny_spec.__dict__, **overrides})
    with pytest.raises(GenerationException):
        generate_dataset(spec)
