from dataclasses import replace

import numpy as np
import pytest

from core_model.network import init_params
from federation.entities import FederationConfig
from synthdata.entities import SyntheticSpec
from synthdata.services import DatasetService


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def random_params(rng):
    def factory(input_dim=4, feature_dim=5, num_classes=3, generator=None):
        params = init_params(input_dim, feature_dim, num_classes, generator or rng)
        # non-zero biases so every term of the backward pass is exercised
        return replace(
            params,
            b1=(generator or rng).normal(scale=0.1, size=feature_dim),
            b2=(generator or rng).normal(scale=0.1, size=num_classes),
        )
    return factory


@pytest.fixture
def tiny_spec():
    return SyntheticSpec(
        num_classes=3,
        input_dim=6,
        n_train=120,
        n_test=80,
        positive_rates=(0.4, 0.3, 0.2),
        noise_scale=0.3,
        signal_scale=2.0,
        seed=3,
    )


@pytest.fixture
def tiny_dataset(tiny_spec):
    return DatasetService.prepare(tiny_spec, num_clients=3, missing=2)


@pytest.fixture
def tiny_config():
    def factory(**overrides):
        values = dict(
            num_clients=3,
            num_classes=3,
            warmup_rounds=3,
            total_rounds=6,
            learning_rate=1e-2,
            hidden_dim=8,
            batch_size=16,
            eval_interval=2,
            base_negative_ratio=0.2,
            base_positive_ratio=0.3,
            seed=5,
        )
        values.update(overrides)
        return FederationConfig(**values)
    return factory
