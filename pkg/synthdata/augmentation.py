from typing import Tuple

import numpy as np

from utils.exceptions import InvalidConfigurationException


def augment_two_views(
        inputs: np.ndarray,
        weak: float,
        strong: float,
        rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weak and strong additive Gaussian views of the same samples. Both noise draws
    always happen so the stream position does not depend on the scales.
    """
    if weak < 0 or weak > strong:
        raise InvalidConfigurationException(
            f"Augmentation scales require 0 <= weak <= strong, got weak={weak}, strong={strong}.",
            weak=weak, strong=strong,
        )
    inputs = np.asarray(inputs, dtype=np.float64)
    weak_noise = rng.standard_normal(inputs.shape)
    strong_noise = rng.standard_normal(inputs.shape)
    return inputs + weak * weak_noise, inputs + strong * strong_noise
