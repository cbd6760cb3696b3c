import logging
from typing import List, Sequence

import numpy as np

from synthdata.entities import ClientShard, MaskedLabels, MaskPlan
from utils.exceptions import InfeasibleMaskPlanException, InvalidConfigurationException

logger = logging.getLogger(__name__)

MAX_REJECTION_ATTEMPTS = 1000


def partition_clients(inputs: np.ndarray, labels: np.ndarray, num_clients: int) -> List[ClientShard]:
    """
    Contiguous equal shards; the n mod K leftover samples go one each to the last clients.
    """
    n = inputs.shape[0]
    if num_clients < 1:
        raise InvalidConfigurationException("At least one client is required.", clients=num_clients)
    if num_clients > n:
        raise InvalidConfigurationException(
            f"Cannot split {n} training samples across {num_clients} clients.", clients=num_clients, samples=n)

    base, remainder = divmod(n, num_clients)
    sizes = [base + (1 if k >= num_clients - remainder else 0) for k in range(num_clients)]
    boundaries = np.concatenate([[0], np.cumsum(sizes)])

    shards = []
    for client_id in range(num_clients):
        indices = np.arange(boundaries[client_id], boundaries[client_id + 1])
        shards.append(ClientShard(
            client_id=client_id,
            indices=indices,
            inputs=inputs[indices],
            truth_labels=labels[indices],
            observed_labels=labels[indices].copy(),
            active_mask=np.ones(labels[indices].shape, dtype=bool),
        ))
    return shards


def _covers_all(missing: Sequence[Sequence[int]], num_classes: int) -> bool:
    labeled = set()
    for client_missing in missing:
        labeled.update(c for c in range(num_classes) if c not in client_missing)
    return len(labeled) == num_classes


def _constructive_plan(num_clients: int, num_classes: int, missing: int, rng: np.random.Generator):
    active_size = num_classes - missing
    active = [[] for _ in range(num_clients)]
    for position, class_id in enumerate(rng.permutation(num_classes)):
        active[position % num_clients].append(int(class_id))
    for client_active in active:
        others = [c for c in range(num_classes) if c not in client_active]
        extra = rng.choice(others, size=active_size - len(client_active), replace=False)
        client_active.extend(int(c) for c in extra)
    return [tuple(c for c in range(num_classes) if c not in client_active) for client_active in active]


def build_mask_plan(num_clients: int, num_classes: int, missing: int, seed: int) -> MaskPlan:
    """
    Removes the same number of classes from every client at random, resampling until
    every class keeps at least one labeling client.
    """
    if not 1 <= missing <= num_classes - 1:
        raise InvalidConfigurationException(
            f"Missing classes per client must lie in [1, {num_classes - 1}], got {missing}.", missing=missing)
    if num_clients * (num_classes - missing) < num_classes:
        raise InfeasibleMaskPlanException(num_clients, num_classes, missing)

    rng = np.random.default_rng(seed)
    for _ in range(MAX_REJECTION_ATTEMPTS):
        plan = [
            tuple(sorted(int(c) for c in rng.choice(num_classes, size=missing, replace=False)))
            for _ in range(num_clients)
        ]
        if _covers_all(plan, num_classes):
            break
    else:
        logger.warning(
            f"No covering mask plan after {MAX_REJECTION_ATTEMPTS} draws "
            f"(K={num_clients}, C={num_classes}, m={missing}); building one directly."
        )
        plan = _constructive_plan(num_clients, num_classes, missing, rng)

    return MaskPlan(missing=tuple(plan), missing_per_client=missing, num_classes=num_classes)


def apply_mask(labels: np.ndarray, missing_classes: Sequence[int]) -> MaskedLabels:
    """
    Observed labels treat missing classes as negative; the active mask marks the
    entries a partial-class loss may supervise.
    """
    labels = np.asarray(labels, dtype=np.float64)
    active_mask = np.ones(labels.shape, dtype=bool)
    active_mask[:, list(missing_classes)] = False
    return MaskedLabels(observed=labels * active_mask, active_mask=active_mask, truth=labels)
