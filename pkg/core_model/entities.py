from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from utils.exceptions import DimensionMismatchException, NonFiniteValueException

PARAM_NAMES = ("W1", "b1", "W2", "b2")
PRIOR_EPSILON = 1e-3


@dataclass(frozen=True)
class ModelParams:
    """
    Two-layer perceptron weights. Also used as the container for gradients and
    optimizer moments, which share the exact same shapes.
    """
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        d_in, d_f = self.W1.shape
        if self.b1.shape != (d_f,) or self.W2.shape[0] != d_f or self.b2.shape != (self.W2.shape[1],):
            raise DimensionMismatchException(
                "ModelParams shapes are inconsistent.",
                shapes={name: tuple(arr.shape) for name, arr in self.items()},
            )

    @property
    def input_dim(self) -> int:
        return self.W1.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def num_classes(self) -> int:
        return self.W2.shape[1]

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        for name in PARAM_NAMES:
            yield name, getattr(self, name)

    def as_dict(self) -> Dict[str, np.ndarray]:
        return dict(self.items())

    def same_shape(self, other: "ModelParams") -> bool:
        return all(a.shape == b.shape for (_, a), (_, b) in zip(self.items(), other.items()))

    def is_finite(self) -> bool:
        return all(np.isfinite(arr).all() for _, arr in self.items())

    def map(self, fn) -> "ModelParams":
        return ModelParams(**{name: fn(arr) for name, arr in self.items()})

    def zip_map(self, other: "ModelParams", fn) -> "ModelParams":
        if not self.same_shape(other):
            raise DimensionMismatchException("Parameter sets have different shapes.")
        return ModelParams(**{name: fn(a, getattr(other, name)) for name, a in self.items()})

    def copy(self) -> "ModelParams":
        return self.map(np.copy)

    @classmethod
    def zeros_like(cls, params: "ModelParams") -> "ModelParams":
        return params.map(np.zeros_like)


Gradients = ModelParams


@dataclass(frozen=True)
class ForwardResult:
    features: np.ndarray
    logits: np.ndarray
    probs: np.ndarray
    inputs: np.ndarray = field(repr=False)
    pre_activations: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ClassPriors:
    pi1: np.ndarray
    pi0: np.ndarray
    la_tau: float = 1.0
    defaulted: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.pi1.shape != self.pi0.shape:
            raise DimensionMismatchException("pi1 and pi0 must have the same length.")
        if not (np.isfinite(self.pi1).all() and np.isfinite(self.pi0).all()):
            raise NonFiniteValueException("class prior")

    @property
    def num_classes(self) -> int:
        return self.pi1.shape[0]

    @classmethod
    def balanced(cls, num_classes: int, la_tau: float = 1.0) -> "ClassPriors":
        half = np.full(num_classes, 0.5)
        return cls(pi1=half, pi0=half.copy(), la_tau=la_tau)

    @classmethod
    def from_positive_rates(
            cls,
            positive_rates,
            la_tau: float = 1.0,
            epsilon: float = PRIOR_EPSILON,
            defaulted: Optional[np.ndarray] = None
    ) -> "ClassPriors":
        pi1 = np.clip(np.asarray(positive_rates, dtype=np.float64), epsilon, 1.0 - epsilon)
        return cls(pi1=pi1, pi0=1.0 - pi1, la_tau=la_tau, defaulted=defaulted)


@dataclass(frozen=True)
class OptimizerState:
    first_moment: ModelParams
    second_moment: ModelParams
    step: int = 0
    learning_rate: float = 3e-5
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def fresh(cls, params: ModelParams, learning_rate: float = 3e-5, weight_decay: float = 0.0,
              **kwargs) -> "OptimizerState":
        return cls(
            first_moment=ModelParams.zeros_like(params),
            second_moment=ModelParams.zeros_like(params),
            learning_rate=learning_rate,
            weight_decay=weight_decay,
            **kwargs,
        )
