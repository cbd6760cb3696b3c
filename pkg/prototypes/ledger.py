from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from prototypes.enums import LabelState
from utils.exceptions import DimensionMismatchException, PermanentTagViolationException

UNTAGGED_ROUND = -1


@dataclass(frozen=True)
class PseudoLabelLedger:
    """
    Permanent pseudo-label record of one client, one column per missing class.
    Tagging returns a new ledger; an entry never leaves TAGGED_0 / TAGGED_1.
    """
    negative_classes: Tuple[int, ...]
    states: np.ndarray
    tagged_round: np.ndarray

    @classmethod
    def empty(cls, num_samples: int, negative_classes: Iterable[int]) -> "PseudoLabelLedger":
        classes = tuple(sorted(int(c) for c in negative_classes))
        return cls(
            negative_classes=classes,
            states=np.full((num_samples, len(classes)), LabelState.UNTAGGED.value, dtype=np.int8),
            tagged_round=np.full((num_samples, len(classes)), UNTAGGED_ROUND, dtype=np.int32),
        )

    @property
    def num_samples(self) -> int:
        return self.states.shape[0]

    def column(self, class_id: int) -> int:
        try:
            return self.negative_classes.index(class_id)
        except ValueError:
            raise DimensionMismatchException(
                f"Class {class_id} is not a missing class of this client.",
                negative_classes=list(self.negative_classes),
            )

    def state_of(self, class_id: int) -> np.ndarray:
        return self.states[:, self.column(class_id)]

    def residual(self, class_id: int) -> np.ndarray:
        return np.flatnonzero(self.state_of(class_id) == LabelState.UNTAGGED.value)

    def tag(self, class_id: int, indices: Sequence[int], label: int, round_index: int) -> "PseudoLabelLedger":
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size == 0:
            return self

        col = self.column(class_id)
        already = indices[self.states[indices, col] != LabelState.UNTAGGED.value]
        if already.size or np.unique(indices).size != indices.size:
            raise PermanentTagViolationException(class_id, already.tolist() or indices.tolist())

        states = self.states.copy()
        rounds = self.tagged_round.copy()
        states[indices, col] = LabelState.for_label(label).value
        rounds[indices, col] = round_index
        return PseudoLabelLedger(negative_classes=self.negative_classes, states=states, tagged_round=rounds)

    def tagged_mask(self) -> np.ndarray:
        return self.states != LabelState.UNTAGGED.value

    def tagged_count(self) -> int:
        return int(self.tagged_mask().sum())

    def coverage(self) -> float:
        total = self.states.size
        return self.tagged_count() / total if total else 1.0

    def hard_labels(self, num_classes: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Expands the ledger to full [N x C] label and mask matrices holding only the
        pseudo-tagged entries.
        """
        labels = np.zeros((self.num_samples, num_classes))
        mask = np.zeros((self.num_samples, num_classes), dtype=bool)
        for col, class_id in enumerate(self.negative_classes):
            tagged = self.states[:, col] != LabelState.UNTAGGED.value
            mask[:, class_id] = tagged
            labels[:, class_id] = self.states[:, col] == LabelState.TAGGED_1.value
        return labels, mask

    def untagged_mask(self, num_classes: int) -> np.ndarray:
        mask = np.zeros((self.num_samples, num_classes), dtype=bool)
        for col, class_id in enumerate(self.negative_classes):
            mask[:, class_id] = self.states[:, col] == LabelState.UNTAGGED.value
        return mask
