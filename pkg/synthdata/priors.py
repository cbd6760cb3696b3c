import logging
from typing import Optional

import numpy as np

from core_model.entities import PRIOR_EPSILON, ClassPriors
from prototypes.ledger import PseudoLabelLedger
from utils.exceptions import DimensionMismatchException

logger = logging.getLogger(__name__)

DEFAULT_PRIOR = 0.5


def compute_class_priors(
        labels: np.ndarray,
        active_mask: np.ndarray,
        ledger: Optional[PseudoLabelLedger] = None,
        la_tau: float = 1.0,
        epsilon: float = PRIOR_EPSILON,
        warn_defaulted: bool = True
) -> ClassPriors:
    """
    Positive rate per class over supervised entries only (active labels plus
    pseudo-tagged entries). Classes without supervision default to 0.5 and are
    flagged in `defaulted`.
    """
    labels = np.asarray(labels, dtype=np.float64)
    supervised = np.asarray(active_mask, dtype=bool)
    if labels.shape != supervised.shape:
        raise DimensionMismatchException("Labels and active mask have different shapes.")

    targets = np.where(supervised, labels, 0.0)
    if ledger is not None:
        pseudo_labels, pseudo_mask = ledger.hard_labels(labels.shape[1])
        targets = np.where(pseudo_mask, pseudo_labels, targets)
        supervised = supervised | pseudo_mask

    counts = supervised.sum(axis=0)
    positives = (targets * supervised).sum(axis=0)
    defaulted = counts == 0
    rates = np.where(defaulted, DEFAULT_PRIOR, positives / np.maximum(counts, 1))
    if defaulted.any():
        log = logger.warning if warn_defaulted else logger.debug
        log(f"No supervised entries for classes {np.flatnonzero(defaulted).tolist()}; prior set to 0.5.")
    return ClassPriors.from_positive_rates(rates, la_tau=la_tau, epsilon=epsilon, defaulted=defaulted)
