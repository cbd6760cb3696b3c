from typing import Tuple, Union

import numpy as np

from core_model.entities import ClassPriors
from core_model.enums import LossNormalizer
from utils.exceptions import (
    DegeneratePriorException, DimensionMismatchException, InvalidLabelValuesException
)

LOG_CLAMP = 1e-7

LossAndGradient = Tuple[float, np.ndarray]


def _as_matrix(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64)


def _check_same_shape(*arrays: np.ndarray) -> None:
    shapes = {arr.shape for arr in arrays}
    if len(shapes) != 1:
        raise DimensionMismatchException("Loss inputs have different shapes.", shapes=[a.shape for a in arrays])


def _check_binary(values: np.ndarray) -> None:
    if not np.isin(values, (0.0, 1.0)).all():
        raise InvalidLabelValuesException()


def adjust_probs(probs: np.ndarray, priors: ClassPriors) -> np.ndarray:
    """
    Multi-label logit adjustment: y' = y*pi1 / (y*pi1 + (1-y)*pi0), per class.
    The temperature raises both priors to la_tau, which leaves la_tau = 1 untouched.
    """
    probs = _as_matrix(probs)
    if probs.shape[-1] != priors.num_classes:
        raise DimensionMismatchException(
            f"Expected {priors.num_classes} classes, got {probs.shape[-1]}.",
        )
    degenerate = np.flatnonzero((priors.pi1 <= 0.0) | (priors.pi1 >= 1.0))
    if degenerate.size:
        raise DegeneratePriorException(degenerate.tolist())

    weight1 = priors.pi1 ** priors.la_tau
    weight0 = priors.pi0 ** priors.la_tau
    numerator = probs * weight1
    adjusted = numerator / (numerator + (1.0 - probs) * weight0)
    # equal weights are the identity map; skip the roundoff of the rational form
    return np.where(weight1 == weight0, probs, adjusted)


def _entry_weights(mask: np.ndarray, normalizer: LossNormalizer) -> np.ndarray:
    batch, num_classes = mask.shape
    if normalizer is LossNormalizer.CLASSES:
        return np.where(mask, 1.0 / (batch * num_classes), 0.0)

    active_counts = mask.sum(axis=1, keepdims=True)
    safe_counts = np.where(active_counts > 0, active_counts, 1)
    return np.where(mask, 1.0 / (batch * safe_counts), 0.0)


def _partial_bce(
        probs: np.ndarray,
        labels: np.ndarray,
        mask: np.ndarray,
        normalizer: LossNormalizer
) -> LossAndGradient:
    weights = _entry_weights(mask, normalizer)
    clamped = np.clip(probs, LOG_CLAMP, 1.0 - LOG_CLAMP)
    terms = labels * np.log(clamped) + (1.0 - labels) * np.log(1.0 - clamped)
    loss = -np.sum(np.where(mask, terms * weights, 0.0))
    # sigmoid cross-entropy differentiates to (p - y) wrt the logit
    grad = np.where(mask, (probs - labels) * weights, 0.0)
    return float(loss) + 0.0, grad


def bce_loss(probs: np.ndarray, labels: np.ndarray) -> LossAndGradient:
    probs, labels = _as_matrix(probs), _as_matrix(labels)
    _check_same_shape(probs, labels)
    _check_binary(labels)
    return _partial_bce(probs, labels, np.ones(probs.shape, dtype=bool), LossNormalizer.CLASSES)


def wpc_loss(
        probs: np.ndarray,
        labels: np.ndarray,
        active_mask: np.ndarray,
        priors: ClassPriors,
        normalizer: Union[LossNormalizer, str] = LossNormalizer.CLASSES
) -> LossAndGradient:
    """
    Weighted-partial-class loss: BCE on logit-adjusted probabilities, summed only
    over supervised entries. The gradient is exact zero off the mask.
    """
    probs, labels, active_mask = _as_matrix(probs), _as_matrix(labels), _as_matrix(active_mask)
    _check_same_shape(probs, labels, active_mask)
    _check_binary(labels)
    _check_binary(active_mask)
    adjusted = adjust_probs(probs, priors)
    return _partial_bce(adjusted, labels, active_mask.astype(bool), LossNormalizer(normalizer))


def mse_consistency_loss(
        student_probs: np.ndarray,
        teacher_probs: np.ndarray,
        uncertain_mask: np.ndarray
) -> LossAndGradient:
    student_probs, teacher_probs = _as_matrix(student_probs), _as_matrix(teacher_probs)
    uncertain_mask = _as_matrix(uncertain_mask)
    _check_same_shape(student_probs, teacher_probs, uncertain_mask)
    _check_binary(uncertain_mask)

    mask = uncertain_mask.astype(bool)
    count = int(mask.sum())
    if count == 0:
        return 0.0, np.zeros(student_probs.shape)

    diff = student_probs - teacher_probs
    loss = np.sum(np.where(mask, diff * diff, 0.0)) / count
    grad = np.where(mask, 2.0 * diff * student_probs * (1.0 - student_probs) / count, 0.0)
    return float(loss), grad
