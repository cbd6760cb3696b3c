import logging
from typing import Sequence, Tuple, Union

import numpy as np
from sklearn.metrics import recall_score, roc_auc_score

from metrics.entities import AuditReport, BalancedAccuracyResult, ClassAudit, EvalReport, MetricResult
from prototypes.enums import LabelState
from prototypes.ledger import PseudoLabelLedger
from utils.exceptions import (
    DimensionMismatchException, EmptyDatasetException, InvalidConfigurationException, InvalidLabelValuesException
)

logger = logging.getLogger(__name__)


def _prepare(scores, truth) -> Tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if scores.ndim == 1:
        scores = scores[:, None]
    if truth.ndim == 1:
        truth = truth[:, None]
    if scores.shape != truth.shape:
        raise DimensionMismatchException("Scores and truth have different shapes.",
                                         scores=scores.shape, truth=truth.shape)
    if scores.shape[0] == 0:
        raise EmptyDatasetException("test set")
    if not np.isin(truth, (0.0, 1.0)).all():
        raise InvalidLabelValuesException()
    return scores, truth


def _evaluable_classes(truth: np.ndarray, metric: str) -> np.ndarray:
    positives = truth.sum(axis=0)
    evaluable = (positives > 0) & (positives < truth.shape[0])
    if not evaluable.all():
        logger.warning(
            f"{metric}: classes {np.flatnonzero(~evaluable).tolist()} have a single label value "
            f"in the test set and are excluded."
        )
    return evaluable


def _macro(per_class: np.ndarray) -> float:
    valid = per_class[~np.isnan(per_class)]
    return float(valid.mean()) if valid.size else float("nan")


def balanced_accuracy(probs, truth, threshold: float = 0.5) -> BalancedAccuracyResult:
    if not 0.0 < threshold < 1.0:
        raise InvalidConfigurationException(f"Threshold must lie in (0, 1), got {threshold}.")
    probs, truth = _prepare(probs, truth)
    evaluable = _evaluable_classes(truth, "BACC")
    predictions = (probs >= threshold).astype(int)

    num_classes = truth.shape[1]
    sensitivity = np.full(num_classes, np.nan)
    specificity = np.full(num_classes, np.nan)
    for c in np.flatnonzero(evaluable):
        y = truth[:, c].astype(int)
        sensitivity[c] = recall_score(y, predictions[:, c], pos_label=1, zero_division=0)
        specificity[c] = recall_score(y, predictions[:, c], pos_label=0, zero_division=0)

    per_class = (sensitivity + specificity) / 2.0
    return BalancedAccuracyResult(
        value=_macro(per_class), per_class=per_class, sensitivity=sensitivity, specificity=specificity)


def auc(scores, truth) -> MetricResult:
    """Macro ROC AUC; sklearn credits tied pairs with one half."""
    scores, truth = _prepare(scores, truth)
    evaluable = _evaluable_classes(truth, "AUC")
    per_class = np.full(truth.shape[1], np.nan)
    for c in np.flatnonzero(evaluable):
        per_class[c] = roc_auc_score(truth[:, c], scores[:, c])
    return MetricResult(value=_macro(per_class), per_class=per_class)


def _average_precision(scores: np.ndarray, truth: np.ndarray) -> float:
    # descending score, ties broken by ascending sample index
    order = np.argsort(-scores, kind="stable")
    hits = truth[order]
    ranks = np.arange(1, hits.size + 1)
    precision_at_rank = np.cumsum(hits) / ranks
    return float(precision_at_rank[hits == 1].mean())


def mean_average_precision(scores, truth) -> MetricResult:
    scores, truth = _prepare(scores, truth)
    evaluable = _evaluable_classes(truth, "mAP")
    per_class = np.full(truth.shape[1], np.nan)
    for c in np.flatnonzero(evaluable):
        per_class[c] = _average_precision(scores[:, c], truth[:, c])
    return MetricResult(value=_macro(per_class), per_class=per_class)


def evaluate(probs, truth, threshold: float = 0.5) -> EvalReport:
    bacc = balanced_accuracy(probs, truth, threshold)
    roc = auc(probs, truth)
    ap = mean_average_precision(probs, truth)
    return EvalReport(
        bacc=bacc.value,
        auc=roc.value,
        map=ap.value,
        per_class_bacc=bacc.per_class,
        per_class_auc=roc.per_class,
        per_class_ap=ap.per_class,
        sensitivity=bacc.sensitivity,
        specificity=bacc.specificity,
        threshold=threshold,
    )


def pseudo_label_audit(
        ledgers: Union[PseudoLabelLedger, Sequence[PseudoLabelLedger]],
        truths: Union[np.ndarray, Sequence[np.ndarray]]
) -> AuditReport:
    """
    Checks pseudo tags against the retained ground truth: a TAGGED_1 entry is correct
    when truly positive, a TAGGED_0 entry when truly negative.
    """
    if isinstance(ledgers, PseudoLabelLedger):
        ledgers, truths = [ledgers], [truths]
    if len(ledgers) != len(truths):
        raise DimensionMismatchException("Each ledger needs its own truth matrix.")

    counters = {}
    entries = 0
    for ledger, truth in zip(ledgers, truths):
        truth = np.asarray(truth)
        if truth.shape[0] != ledger.num_samples:
            raise DimensionMismatchException("Ledger and truth have different sample counts.")
        entries += ledger.states.size
        for col, class_id in enumerate(ledger.negative_classes):
            states = ledger.states[:, col]
            positive = truth[:, class_id] == 1
            tagged_0 = states == LabelState.TAGGED_0.value
            tagged_1 = states == LabelState.TAGGED_1.value
            previous = counters.get(class_id, ClassAudit())
            counters[class_id] = ClassAudit(
                tagged_0=previous.tagged_0 + int(tagged_0.sum()),
                correct_0=previous.correct_0 + int((tagged_0 & ~positive).sum()),
                tagged_1=previous.tagged_1 + int(tagged_1.sum()),
                correct_1=previous.correct_1 + int((tagged_1 & positive).sum()),
                missing_positives=previous.missing_positives + int(positive.sum()),
            )

    tagged = sum(audit.tagged for audit in counters.values())
    correct = sum(audit.correct for audit in counters.values())
    return AuditReport(per_class=counters, tagged=tagged, correct=correct, entries=entries)
