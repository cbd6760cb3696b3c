import logging
import math
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from prototypes.entities import DifficultyReport, DualPrototype, SelectionRatios
from utils.exceptions import (
    DimensionMismatchException, EmptyDatasetException, InvalidConfigurationException,
    InvalidSelectionRatioException, ProtocolViolationException, UndefinedCosineException
)

logger = logging.getLogger(__name__)

# guards floor(tau * count) against products like 0.29 * 100 = 28.999999999999996
RANK_ROUNDING_GUARD = 1e-9

PrototypeKey = Tuple[int, int]


def compute_local_prototypes(
        features: np.ndarray,
        labels: np.ndarray,
        active_classes: Iterable[int]
) -> Dict[int, DualPrototype]:
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if features.shape[0] != labels.shape[0]:
        raise DimensionMismatchException("Features and labels have different sample counts.")

    prototypes = {}
    for class_id in sorted(int(c) for c in active_classes):
        positive = labels[:, class_id] == 1
        negative = ~positive
        n1, n0 = int(positive.sum()), int(negative.sum())
        prototypes[class_id] = DualPrototype(
            class_id=class_id,
            p0=features[negative].mean(axis=0) if n0 else None,
            p1=features[positive].mean(axis=0) if n1 else None,
            support_counts=(n0, n1),
        )
    return prototypes


def aggregate_global_prototypes(
        local_prototypes: Mapping[PrototypeKey, DualPrototype],
        annotation: Sequence[Iterable[int]]
) -> Dict[int, DualPrototype]:
    """
    Unweighted mean of the local prototypes of the clients that label each class.
    Clients missing a side are skipped and the divisor shrinks accordingly.
    """
    global_prototypes = {}
    for class_id, labelers in enumerate(annotation):
        contributors = [
            local_prototypes[(client_id, class_id)]
            for client_id in sorted(labelers)
            if (client_id, class_id) in local_prototypes
        ]
        sides = []
        counts = []
        for label in (0, 1):
            vectors = [proto.side(label) for proto in contributors if proto.side(label) is not None]
            sides.append(np.mean(np.stack(vectors), axis=0) if vectors else None)
            counts.append(sum(proto.support_counts[label] for proto in contributors))

        prototype = DualPrototype(class_id=class_id, p0=sides[0], p1=sides[1], support_counts=tuple(counts))
        if not prototype.is_complete:
            logger.warning(
                f"Global prototype for class {class_id} is missing a side "
                f"(support n0={counts[0]}, n1={counts[1]}); class skipped for detection."
            )
        global_prototypes[class_id] = prototype
    return global_prototypes


def _cosine_to(features: np.ndarray, prototype: np.ndarray, feature_norms: np.ndarray) -> np.ndarray:
    proto_norm = np.linalg.norm(prototype)
    with np.errstate(divide="ignore", invalid="ignore"):
        cosine = (features @ prototype) / (feature_norms * proto_norm)
    cosine = np.clip(cosine, -1.0, 1.0)
    cosine[(feature_norms == 0.0) | (proto_norm == 0.0)] = np.nan
    return cosine


def confidence_scores(
        features: np.ndarray,
        global_prototypes: Mapping[int, DualPrototype],
        negative_classes: Iterable[int],
        strict: bool = False
) -> np.ndarray:
    """
    Z = cos(P0, F) - cos(P1, F) for every sample and missing class (columns in
    ascending class order). Negative Z leans positive. Entries with an undefined
    cosine, and whole columns of classes lacking a prototype side, are NaN unless
    strict is set.
    """
    features = np.asarray(features, dtype=np.float64)
    classes = sorted(int(c) for c in negative_classes)
    feature_norms = np.linalg.norm(features, axis=1)
    if strict and (feature_norms == 0.0).any():
        raise UndefinedCosineException("feature vector")

    scores = np.full((features.shape[0], len(classes)), np.nan)
    for col, class_id in enumerate(classes):
        prototype = global_prototypes.get(class_id)
        if prototype is None or not prototype.is_complete:
            continue
        if strict and (np.linalg.norm(prototype.p0) == 0.0 or np.linalg.norm(prototype.p1) == 0.0):
            raise UndefinedCosineException("prototype")
        scores[:, col] = _cosine_to(features, prototype.p0, feature_norms) - _cosine_to(
            features, prototype.p1, feature_norms)
    return scores


def _rank_count(ratio: float, candidates: int) -> int:
    return min(candidates, int(math.floor(ratio * candidates + RANK_ROUNDING_GUARD)))


def select_pseudo_labels(scores: np.ndarray, tau0: float, tau1: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tags the top floor(tau0 * |Z >= 0|) residual entries by Z as negatives and the
    top floor(tau1 * |Z < 0|) entries by -Z as positives. Ties go to the lower index;
    NaN entries are never selected. Returns positions into `scores`.
    """
    if tau0 < 0 or tau1 < 0:
        raise InvalidSelectionRatioException(tau0, tau1)

    scores = np.asarray(scores, dtype=np.float64)
    valid = ~np.isnan(scores)

    negative_candidates = np.flatnonzero(valid & (scores >= 0.0))
    order = negative_candidates[np.argsort(-scores[negative_candidates], kind="stable")]
    tagged_0 = np.sort(order[:_rank_count(tau0, negative_candidates.size)])

    positive_candidates = np.flatnonzero(valid & (scores < 0.0))
    order = positive_candidates[np.argsort(scores[positive_candidates], kind="stable")]
    tagged_1 = np.sort(order[:_rank_count(tau1, positive_candidates.size)])
    return tagged_0, tagged_1


def compute_local_difficulty(
        probs: np.ndarray,
        active_classes: Iterable[int],
        band_low: float,
        band_high: float
) -> DifficultyReport:
    if not 0.0 <= band_low < band_high <= 1.0:
        raise InvalidConfigurationException(
            f"Difficulty band requires 0 <= L < R <= 1, got L={band_low}, R={band_high}.",
            band_low=band_low, band_high=band_high,
        )
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape[0] == 0:
        raise EmptyDatasetException("local dataset")

    local, counts = {}, {}
    for class_id in sorted(int(c) for c in active_classes):
        column = probs[:, class_id]
        confident = int(np.count_nonzero((column < band_low) | (column > band_high)))
        counts[class_id] = confident
        local[class_id] = confident / probs.shape[0]
    return DifficultyReport(local=local, confident_counts=counts, sample_count=probs.shape[0])


def aggregate_global_difficulty(
        local_difficulty: Mapping[PrototypeKey, float],
        dataset_sizes: Mapping[int, int],
        annotation: Sequence[Iterable[int]]
) -> np.ndarray:
    d_global = np.zeros(len(annotation))
    for class_id, labelers in enumerate(annotation):
        contributors = sorted(labelers)
        if not contributors:
            raise ProtocolViolationException(f"Class {class_id} has no labeling client.", class_id=class_id)
        missing = [k for k in contributors if (k, class_id) not in local_difficulty]
        if missing:
            raise ProtocolViolationException(
                f"Clients {missing} did not report difficulty for class {class_id}.", class_id=class_id)

        total = sum(dataset_sizes[k] for k in contributors)
        d_global[class_id] = sum(
            (dataset_sizes[k] / total) * local_difficulty[(k, class_id)] for k in contributors
        )
    return d_global


def adaptive_thresholds(d_global: np.ndarray, base_negative: float, base_positive: float) -> SelectionRatios:
    if base_negative < 0 or base_positive < 0:
        raise InvalidSelectionRatioException(base_negative, base_positive)
    d_global = np.asarray(d_global, dtype=np.float64)
    return SelectionRatios(tau0=d_global * base_negative, tau1=d_global * base_positive)


def selection_ratios(
        d_global: Optional[np.ndarray],
        num_classes: int,
        base_negative: float,
        base_positive: float,
        adaptive: bool
) -> SelectionRatios:
    """
    Adaptive ratios scale the base percents by global difficulty; without it the
    base percents apply to every class.
    """
    if adaptive and d_global is not None:
        return adaptive_thresholds(d_global, base_negative, base_positive)
    if base_negative < 0 or base_positive < 0:
        raise InvalidSelectionRatioException(base_negative, base_positive)
    return SelectionRatios.constant(num_classes, base_negative, base_positive)
