from unittest.mock import patch

import numpy as np
import pytest

from synthdata.masking import apply_mask, build_mask_plan, partition_clients
from synthdata.services import DatasetService
from utils.exceptions import InfeasibleMaskPlanException, InvalidConfigurationException


def _assert_valid_plan(plan, clients, classes, missing):
    assert plan.num_clients == clients
    for client_missing in plan.missing:
        assert len(client_missing) == missing
        assert list(client_missing) == sorted(set(client_missing))
        assert all(0 <= c < classes for c in client_missing)
    assert all(len(labelers) >= 1 for labelers in plan.annotation)


def test_partition_hands_remainder_to_last_clients():
    inputs = np.arange(11, dtype=np.float64).reshape(11, 1)
    shards = partition_clients(inputs, np.zeros((11, 2)), 5)

    assert [shard.num_samples for shard in shards] == [2, 2, 2, 2, 3]
    assert np.array_equal(np.concatenate([shard.indices for shard in shards]), np.arange(11))
    assert shards[4].inputs[:, 0].tolist() == [8.0, 9.0, 10.0]


def test_partition_rejects_more_clients_than_samples():
    with pytest.raises(InvalidConfigurationException):
        partition_clients(np.zeros((2, 1)), np.zeros((2, 1)), 3)


def test_mask_plan_invariants_hold_across_seeds():
    for seed in range(100):
        _assert_valid_plan(build_mask_plan(5, 5, 4, seed), 5, 5, 4)
        _assert_valid_plan(build_mask_plan(3, 6, 3, seed), 3, 6, 3)


def test_mask_plan_is_deterministic():
    assert build_mask_plan(5, 5, 4, seed=7) == build_mask_plan(5, 5, 4, seed=7)


def test_constructive_fallback_still_covers_every_class(caplog):
    with patch("synthdata.masking.MAX_REJECTION_ATTEMPTS", 0):
        for seed in range(20):
            _assert_valid_plan(build_mask_plan(5, 5, 4, seed), 5, 5, 4)
            _assert_valid_plan(build_mask_plan(3, 5, 3, seed), 3, 5, 3)
    assert "building one directly" in caplog.text


@pytest.mark.parametrize("missing", [0, 5])
def test_missing_count_outside_range_is_rejected(missing):
    with pytest.raises(InvalidConfigurationException):
        build_mask_plan(5, 5, missing, seed=0)


def test_infeasible_plan_is_rejected():
    with pytest.raises(InfeasibleMaskPlanException):
        build_mask_plan(2, 5, 4, seed=0)


def test_annotation_lists_labeling_clients():
    plan = build_mask_plan(4, 4, 2, seed=3)
    for c, labelers in enumerate(plan.annotation):
        assert labelers == frozenset(k for k in range(4) if c in plan.active_classes(k))


def test_apply_mask_matches_oracle():
    labels = np.random.default_rng(21).integers(0, 2, size=(50, 4)).astype(np.float64)

    masked = apply_mask(labels, [1, 3])

    for i in range(50):
        for c in range(4):
            if c in (1, 3):
                assert masked.observed[i, c] == 0.0 and not masked.active_mask[i, c]
            else:
                assert masked.observed[i, c] == labels[i, c] and masked.active_mask[i, c]
    assert np.array_equal(masked.truth, labels)


def test_prepared_dataset_conserves_samples(tiny_dataset):
    assert sum(shard.num_samples for shard in tiny_dataset.shards) == tiny_dataset.train_size == 120
    assert np.array_equal(np.concatenate([shard.indices for shard in tiny_dataset.shards]), np.arange(120))


def test_prepared_dataset_hides_missing_classes(tiny_dataset):
    for shard in tiny_dataset.shards:
        missing = list(tiny_dataset.plan.negative_classes(shard.client_id))
        assert len(missing) == 2
        assert np.all(shard.observed_labels[:, missing] == 0.0)
        assert not shard.active_mask[:, missing].any()
        active = list(tiny_dataset.plan.active_classes(shard.client_id))
        assert np.array_equal(shard.observed_labels[:, active], shard.truth_labels[:, active])


def test_prepared_dataset_is_deterministic(tiny_spec):
    first = DatasetService.prepare(tiny_spec, num_clients=3, missing=2)
    second = DatasetService.prepare(tiny_spec, num_clients=3, missing=2)
    assert first.plan == second.plan
    assert np.array_equal(first.train_truth(), second.train_truth())
