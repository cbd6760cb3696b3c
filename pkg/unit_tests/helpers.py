import numpy as np

TINY_OVERRIDES = [
    "data.classes=3",
    "data.input_dim=6",
    "data.train_samples=120",
    "data.test_samples=80",
    "data.positive_rates=[0.4, 0.3, 0.2]",
    "partition.missing_classes=2",
    "federation.clients=3",
    "federation.rounds=6",
    "federation.warmup_rounds=3",
    "federation.hidden_dim=8",
    "federation.batch_size=16",
    "evaluation.interval=2",
]


def numeric_gradient(fn, array: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central differences of a scalar fn() wrt every entry of `array`, perturbed in place."""
    grad = np.zeros_like(array)
    for index in np.ndindex(array.shape):
        original = array[index]
        array[index] = original + h
        upper = fn()
        array[index] = original - h
        lower = fn()
        array[index] = original
        grad[index] = (upper - lower) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / scale))
