from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class DualPrototype:
    """
    Negative (p0) and positive (p1) feature centroids of one class. A side with no
    supporting samples is absent (None) and has a zero support count.
    """
    class_id: int
    p0: Optional[np.ndarray]
    p1: Optional[np.ndarray]
    support_counts: Tuple[int, int] = (0, 0)

    @property
    def has_negative(self) -> bool:
        return self.p0 is not None

    @property
    def has_positive(self) -> bool:
        return self.p1 is not None

    @property
    def is_complete(self) -> bool:
        return self.has_negative and self.has_positive

    def side(self, label: int) -> Optional[np.ndarray]:
        return self.p1 if label == 1 else self.p0


@dataclass(frozen=True)
class DifficultyReport:
    local: Dict[int, float]
    confident_counts: Dict[int, int] = field(default_factory=dict)
    sample_count: int = 0


@dataclass(frozen=True)
class SelectionRatios:
    tau0: np.ndarray
    tau1: np.ndarray

    @classmethod
    def constant(cls, num_classes: int, base_negative: float, base_positive: float) -> "SelectionRatios":
        return cls(tau0=np.full(num_classes, float(base_negative)), tau1=np.full(num_classes, float(base_positive)))

    @classmethod
    def zeros(cls, num_classes: int) -> "SelectionRatios":
        return cls.constant(num_classes, 0.0, 0.0)
