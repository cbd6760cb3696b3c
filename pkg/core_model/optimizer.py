from dataclasses import replace
from typing import Tuple

import numpy as np

from core_model.entities import Gradients, ModelParams, OptimizerState
from utils.exceptions import DimensionMismatchException, TrainingDivergedException


def optimizer_step(
        params: ModelParams,
        grads: Gradients,
        state: OptimizerState
) -> Tuple[ModelParams, OptimizerState]:
    """
    One Adam update with decoupled L2 weight decay. Returns fresh parameters and state.
    """
    if not params.same_shape(grads) or not params.same_shape(state.first_moment):
        raise DimensionMismatchException("Gradients or optimizer moments do not match the parameters.")
    if not grads.is_finite():
        raise TrainingDivergedException(what="gradient")

    step = state.step + 1
    beta1, beta2 = state.beta1, state.beta2
    first = state.first_moment.zip_map(grads, lambda m, g: beta1 * m + (1.0 - beta1) * g)
    second = state.second_moment.zip_map(grads, lambda v, g: beta2 * v + (1.0 - beta2) * g * g)
    correction1 = 1.0 - beta1 ** step
    correction2 = 1.0 - beta2 ** step

    updated = {}
    for name, value in params.items():
        m_hat = getattr(first, name) / correction1
        v_hat = getattr(second, name) / correction2
        update = m_hat / (np.sqrt(v_hat) + state.epsilon) + state.weight_decay * value
        updated[name] = value - state.learning_rate * update

    new_params = ModelParams(**updated)
    if not new_params.is_finite():
        raise TrainingDivergedException(what="parameter")
    return new_params, replace(state, first_moment=first, second_moment=second, step=step)
