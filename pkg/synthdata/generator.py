import logging
from typing import Tuple

import numpy as np
from scipy.stats import norm

from synthdata.entities import DatasetBundle, SyntheticSpec
from utils.exceptions import GenerationException

logger = logging.getLogger(__name__)


def _validate_spec(spec: SyntheticSpec) -> np.ndarray:
    if spec.num_classes < 1 or spec.input_dim < 1:
        raise GenerationException("Class count and input dimension must be positive.")
    if spec.n_train < 1 or spec.n_test < 1:
        raise GenerationException("Train and test sample counts must be positive.")
    if spec.noise_scale < 0 or spec.signal_scale <= 0:
        raise GenerationException("Noise scale must be non-negative and signal scale positive.")

    rates = np.asarray(spec.positive_rates, dtype=np.float64)
    if rates.shape != (spec.num_classes,):
        raise GenerationException(
            f"Expected {spec.num_classes} positive rates, got {rates.size}.", rates=rates.tolist())
    if ((rates <= 0.0) | (rates >= 1.0)).any():
        raise GenerationException("Positive rates must lie strictly between 0 and 1.", rates=rates.tolist())

    correlation = spec.correlation_matrix()
    if correlation.shape != (spec.num_classes, spec.num_classes):
        raise GenerationException("Correlation matrix must be C x C.", shape=list(correlation.shape))
    if not np.allclose(correlation, correlation.T) or not np.allclose(np.diag(correlation), 1.0):
        raise GenerationException("Correlation matrix must be symmetric with a unit diagonal.")
    try:
        return np.linalg.cholesky(correlation)
    except np.linalg.LinAlgError:
        raise GenerationException("Correlation matrix is not positive definite.")


def _class_directions(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    directions = rng.standard_normal((spec.num_classes, spec.input_dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * spec.signal_scale


def _draw_split(
        n: int,
        chol: np.ndarray,
        thresholds: np.ndarray,
        directions: np.ndarray,
        noise_scale: float,
        rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    # Gaussian copula: correlated latents thresholded at the per-class quantile
    latent = rng.standard_normal((n, chol.shape[0])) @ chol.T
    labels = (latent < thresholds).astype(np.float64)
    noise = rng.standard_normal((n, directions.shape[1]))
    inputs = labels @ directions + noise_scale * noise
    return inputs, labels


def generate_dataset(spec: SyntheticSpec) -> DatasetBundle:
    """
    Draws correlated Bernoulli label vectors and places each sample at the sum of
    its positive classes' directions plus isotropic Gaussian noise.
    """
    chol = _validate_spec(spec)
    rng = np.random.default_rng(spec.seed)
    thresholds = norm.ppf(np.asarray(spec.positive_rates, dtype=np.float64))

    directions = _class_directions(spec, rng)
    train_inputs, train_labels = _draw_split(spec.n_train, chol, thresholds, directions, spec.noise_scale, rng)
    test_inputs, test_labels = _draw_split(spec.n_test, chol, thresholds, directions, spec.noise_scale, rng)

    logger.info(
        f"Generated synthetic dataset: C={spec.num_classes}, d_in={spec.input_dim}, "
        f"train={spec.n_train}, test={spec.n_test}, "
        f"train positive rates={np.round(train_labels.mean(axis=0), 4).tolist()}"
    )
    return DatasetBundle(
        train_inputs=train_inputs,
        train_labels=train_labels,
        test_inputs=test_inputs,
        test_labels=test_labels,
        directions=directions,
    )
