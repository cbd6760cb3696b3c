from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np


@dataclass(frozen=True)
class MetricResult:
    """Macro value plus per-class values; excluded classes are NaN."""
    value: float
    per_class: np.ndarray


@dataclass(frozen=True)
class BalancedAccuracyResult(MetricResult):
    sensitivity: np.ndarray = field(default_factory=lambda: np.zeros(0))
    specificity: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass(frozen=True)
class EvalReport:
    bacc: float
    auc: float
    map: float
    per_class_bacc: np.ndarray
    per_class_auc: np.ndarray
    per_class_ap: np.ndarray
    sensitivity: np.ndarray
    specificity: np.ndarray
    threshold: float = 0.5


@dataclass(frozen=True)
class ClassAudit:
    tagged_0: int = 0
    correct_0: int = 0
    tagged_1: int = 0
    correct_1: int = 0
    missing_positives: int = 0

    @property
    def tagged(self) -> int:
        return self.tagged_0 + self.tagged_1

    @property
    def correct(self) -> int:
        return self.correct_0 + self.correct_1

    @property
    def precision(self) -> float:
        return self.correct / self.tagged if self.tagged else float("nan")

    @property
    def precision_0(self) -> float:
        return self.correct_0 / self.tagged_0 if self.tagged_0 else float("nan")

    @property
    def precision_1(self) -> float:
        return self.correct_1 / self.tagged_1 if self.tagged_1 else float("nan")

    @property
    def recall_1(self) -> float:
        """Share of the hidden positives that received a correct positive tag."""
        return self.correct_1 / self.missing_positives if self.missing_positives else float("nan")


@dataclass(frozen=True)
class AuditReport:
    per_class: Dict[int, ClassAudit]
    tagged: int
    correct: int
    entries: int

    @property
    def precision(self) -> float:
        return self.correct / self.tagged if self.tagged else float("nan")

    @property
    def coverage(self) -> float:
        return self.tagged / self.entries if self.entries else 0.0

    def class_ids(self) -> Tuple[int, ...]:
        return tuple(sorted(self.per_class))
