from typing import Sequence

import numpy as np

from core_model.entities import ModelParams
from utils.exceptions import DimensionMismatchException, InvalidConfigurationException, ProtocolViolationException


def fedavg_aggregate(models: Sequence[ModelParams], sizes: Sequence[int]) -> ModelParams:
    """
    Sample-count weighted average of client models, summed in the given order.
    """
    if not models:
        raise ProtocolViolationException("No client models to aggregate.")
    if len(models) != len(sizes):
        raise DimensionMismatchException("Each model needs exactly one sample count.")
    sizes = np.asarray(sizes, dtype=np.float64)
    if (sizes <= 0).any():
        raise InvalidConfigurationException("Client sample counts must be positive.", sizes=sizes.tolist())
    reference = models[0]
    if not all(reference.same_shape(model) for model in models[1:]):
        raise DimensionMismatchException("Client models have different shapes.")

    weights = sizes / sizes.sum()
    aggregated = {}
    for name, _ in reference.items():
        total = weights[0] * getattr(models[0], name)
        for weight, model in zip(weights[1:], models[1:]):
            total = total + weight * getattr(model, name)
        aggregated[name] = total
    return ModelParams(**aggregated)
