from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

import numpy as np

DESK_POSITIVE_RATES = (0.30, 0.20, 0.10, 0.05, 0.03)


@dataclass(frozen=True)
class SyntheticSpec:
    num_classes: int = 5
    input_dim: int = 32
    n_train: int = 5000
    n_test: int = 2000
    positive_rates: Tuple[float, ...] = DESK_POSITIVE_RATES
    correlation: Optional[np.ndarray] = None
    noise_scale: float = 0.5
    signal_scale: float = 2.0
    seed: int = 0

    def correlation_matrix(self) -> np.ndarray:
        if self.correlation is None:
            return np.eye(self.num_classes)
        return np.asarray(self.correlation, dtype=np.float64)

    @staticmethod
    def uniform_correlation(num_classes: int, rho: float) -> np.ndarray:
        matrix = np.full((num_classes, num_classes), float(rho))
        np.fill_diagonal(matrix, 1.0)
        return matrix


@dataclass(frozen=True)
class DatasetBundle:
    train_inputs: np.ndarray
    train_labels: np.ndarray
    test_inputs: np.ndarray
    test_labels: np.ndarray
    directions: np.ndarray


@dataclass(frozen=True)
class ClientShard:
    client_id: int
    indices: np.ndarray
    inputs: np.ndarray
    truth_labels: np.ndarray
    observed_labels: np.ndarray
    active_mask: np.ndarray

    @property
    def num_samples(self) -> int:
        return self.inputs.shape[0]


@dataclass(frozen=True)
class MaskPlan:
    missing: Tuple[Tuple[int, ...], ...]
    missing_per_client: int
    num_classes: int

    @property
    def num_clients(self) -> int:
        return len(self.missing)

    @property
    def annotation(self) -> Tuple[FrozenSet[int], ...]:
        """Per class, the clients that label it."""
        return tuple(
            frozenset(k for k, missing in enumerate(self.missing) if c not in missing)
            for c in range(self.num_classes)
        )

    def negative_classes(self, client_id: int) -> Tuple[int, ...]:
        return self.missing[client_id]

    def active_classes(self, client_id: int) -> Tuple[int, ...]:
        missing = set(self.missing[client_id])
        return tuple(c for c in range(self.num_classes) if c not in missing)


@dataclass(frozen=True)
class MaskedLabels:
    observed: np.ndarray
    active_mask: np.ndarray
    truth: np.ndarray


@dataclass(frozen=True)
class FederatedDataset:
    spec: SyntheticSpec
    plan: MaskPlan
    shards: Tuple[ClientShard, ...]
    test_inputs: np.ndarray
    test_labels: np.ndarray
    train_size: int

    @property
    def num_clients(self) -> int:
        return len(self.shards)

    def train_truth(self) -> np.ndarray:
        return np.vstack([shard.truth_labels for shard in self.shards])
