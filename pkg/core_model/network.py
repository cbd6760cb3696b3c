import numpy as np
from scipy.special import expit

from core_model.entities import ForwardResult, Gradients, ModelParams
from utils.exceptions import DimensionMismatchException, NonFiniteValueException


def init_params(input_dim: int, feature_dim: int, num_classes: int, rng: np.random.Generator) -> ModelParams:
    """
    Glorot-uniform weights and zero biases, drawn from the given generator.
    """
    limit1 = np.sqrt(6.0 / (input_dim + feature_dim))
    limit2 = np.sqrt(6.0 / (feature_dim + num_classes))
    return ModelParams(
        W1=rng.uniform(-limit1, limit1, size=(input_dim, feature_dim)),
        b1=np.zeros(feature_dim),
        W2=rng.uniform(-limit2, limit2, size=(feature_dim, num_classes)),
        b2=np.zeros(num_classes),
    )


def forward(params: ModelParams, inputs: np.ndarray) -> ForwardResult:
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != params.input_dim:
        raise DimensionMismatchException(
            f"Expected inputs of width {params.input_dim}, got shape {inputs.shape}.",
            expected=params.input_dim, shape=tuple(inputs.shape),
        )
    if not np.isfinite(inputs).all():
        raise NonFiniteValueException("input")

    pre_activations = inputs @ params.W1 + params.b1
    features = np.maximum(pre_activations, 0.0)
    logits = features @ params.W2 + params.b2
    return ForwardResult(
        features=features,
        logits=logits,
        probs=expit(logits),
        inputs=inputs,
        pre_activations=pre_activations,
    )


def backward(params: ModelParams, result: ForwardResult, grad_logits: np.ndarray) -> Gradients:
    if grad_logits.shape != result.logits.shape:
        raise DimensionMismatchException(
            "Gradient and logits shapes differ.",
            gradient=tuple(grad_logits.shape), logits=tuple(result.logits.shape),
        )

    grad_W2 = result.features.T @ grad_logits
    grad_b2 = grad_logits.sum(axis=0)
    grad_features = grad_logits @ params.W2.T
    # ReLU passes gradient only where the pre-activation was positive
    grad_pre = grad_features * (result.pre_activations > 0.0)
    grad_W1 = result.inputs.T @ grad_pre
    grad_b1 = grad_pre.sum(axis=0)
    return Gradients(W1=grad_W1, b1=grad_b1, W2=grad_W2, b2=grad_b2)
