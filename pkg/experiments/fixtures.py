import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Union

import numpy as np

from core_model.entities import ClassPriors, ModelParams
from core_model.losses import adjust_probs, bce_loss, mse_consistency_loss, wpc_loss
from experiments.repository import ResultRepository
from federation.aggregation import fedavg_aggregate
from metrics.services import auc, balanced_accuracy, mean_average_precision
from prototypes.engine import (
    adaptive_thresholds, aggregate_global_difficulty, aggregate_global_prototypes, compute_local_difficulty,
    compute_local_prototypes, confidence_scores, select_pseudo_labels
)
from prototypes.entities import DualPrototype
from synthdata.masking import build_mask_plan, partition_clients
from utils.files import ensure_directory

logger = logging.getLogger(__name__)


def _listed(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {key: _listed(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_listed(item) for item in value]
    return value


def _prototype_payload(prototype: DualPrototype) -> Dict[str, Any]:
    return {"p0": _listed(prototype.p0), "p1": _listed(prototype.p1), "support": list(prototype.support_counts)}


def logit_adjustment_table() -> Dict[str, Any]:
    probs = np.array([[0.1, 0.5, 0.9], [0.3, 0.5, 0.7], [0.01, 0.5, 0.99]])
    pi1 = np.array([0.5, 0.1, 0.8])
    priors = ClassPriors.from_positive_rates(pi1)
    return {"inputs": {"probs": probs, "pi1": pi1}, "expected": {"adjusted": adjust_probs(probs, priors)}}


def bce_instance() -> Dict[str, Any]:
    probs = np.array([[0.8, 0.3], [0.6, 0.1]])
    labels = np.array([[1.0, 0.0], [0.0, 1.0]])
    loss, grad = bce_loss(probs, labels)
    return {"inputs": {"probs": probs, "labels": labels}, "expected": {"loss": loss, "grad_logits": grad}}


def wpc_instance() -> Dict[str, Any]:
    probs = np.array([[0.8, 0.3, 0.6], [0.4, 0.9, 0.2]])
    labels = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]])
    mask = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]])
    pi1 = np.array([0.3, 0.2, 0.1])
    loss, grad = wpc_loss(probs, labels, mask, ClassPriors.from_positive_rates(pi1))
    return {
        "inputs": {"probs": probs, "labels": labels, "active_mask": mask, "pi1": pi1},
        "expected": {"loss": loss, "grad_logits": grad},
    }


def mse_instance() -> Dict[str, Any]:
    student = np.array([[0.9, 0.2]])
    teacher = np.array([[0.4, 0.7]])
    mask = np.array([[1.0, 0.0]])
    loss, grad = mse_consistency_loss(student, teacher, mask)
    return {
        "inputs": {"student": student, "teacher": teacher, "uncertain_mask": mask},
        "expected": {"loss": loss, "grad_logits": grad},
    }


def local_prototype_instance() -> Dict[str, Any]:
    features = np.array([[1.0, 0.0], [3.0, 2.0], [0.0, 4.0], [2.0, 2.0]])
    labels = np.array([[1, 0], [1, 1], [0, 1], [0, 1]])
    prototypes = compute_local_prototypes(features, labels, [0, 1])
    return {
        "inputs": {"features": features, "labels": labels, "active_classes": [0, 1]},
        "expected": {str(c): _prototype_payload(p) for c, p in prototypes.items()},
    }


def global_prototype_instance() -> Dict[str, Any]:
    local = {
        (0, 0): DualPrototype(0, np.array([0.0, 1.0]), np.array([2.0, 2.0]), (3, 1)),
        (1, 0): DualPrototype(0, np.array([2.0, 3.0]), None, (5, 0)),
        (1, 1): DualPrototype(1, np.array([1.0, 1.0]), np.array([4.0, 0.0]), (2, 2)),
    }
    annotation = [frozenset({0, 1}), frozenset({1})]
    merged = aggregate_global_prototypes(local, annotation)
    return {
        "inputs": {
            "local": [{"client": k, "class": c, **_prototype_payload(p)} for (k, c), p in sorted(local.items())],
            "annotation": [sorted(s) for s in annotation],
        },
        "expected": {str(c): _prototype_payload(p) for c, p in merged.items()},
    }


def confidence_instance() -> Dict[str, Any]:
    features = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.2, 0.9]])
    prototypes = {2: DualPrototype(2, np.array([1.0, 0.0]), np.array([0.0, 1.0]), (1, 1))}
    scores = confidence_scores(features, prototypes, [2])
    return {
        "inputs": {"features": features, "p0": [1.0, 0.0], "p1": [0.0, 1.0]},
        "expected": {"z": scores[:, 0]},
    }


def selection_instance() -> Dict[str, Any]:
    z = np.array([0.9, -0.4, 0.2, 0.9, -0.8, 0.0, -0.1, 0.5, -0.4, 0.3])
    tagged_0, tagged_1 = select_pseudo_labels(z, 0.5, 0.5)
    return {"inputs": {"z": z, "tau0": 0.5, "tau1": 0.5}, "expected": {"tagged_0": tagged_0, "tagged_1": tagged_1}}


def local_difficulty_instance() -> Dict[str, Any]:
    probs = np.array([[0.1, 0.5], [0.8, 0.65], [0.35, 0.95], [0.72, 0.2]])
    report = compute_local_difficulty(probs, [0, 1], 0.3, 0.7)
    return {
        "inputs": {"probs": probs, "band": [0.3, 0.7]},
        "expected": {"difficulty": {str(c): v for c, v in report.local.items()}},
    }


def global_difficulty_instance() -> Dict[str, Any]:
    local = {(0, 0): 0.5, (1, 0): 0.8, (1, 1): 0.25, (2, 1): 0.75}
    sizes = {0: 100, 1: 300, 2: 100}
    annotation = [frozenset({0, 1}), frozenset({1, 2})]
    d_global = aggregate_global_difficulty(local, sizes, annotation)
    return {
        "inputs": {
            "local": [{"client": k, "class": c, "d": v} for (k, c), v in sorted(local.items())],
            "sizes": [sizes[k] for k in sorted(sizes)],
            "annotation": [sorted(s) for s in annotation],
        },
        "expected": {"d_global": d_global},
    }


def adaptive_threshold_instance() -> Dict[str, Any]:
    d_global = np.array([0.2, 0.5, 1.0])
    ratios = adaptive_thresholds(d_global, 0.005, 0.01)
    return {
        "inputs": {"d_global": d_global, "T0": 0.005, "T1": 0.01},
        "expected": {"tau0": ratios.tau0, "tau1": ratios.tau1},
    }


def fedavg_instance() -> Dict[str, Any]:
    def scalar_model(value: float) -> ModelParams:
        return ModelParams(W1=np.array([[value]]), b1=np.array([value]), W2=np.array([[value]]), b2=np.array([value]))

    merged = fedavg_aggregate([scalar_model(2.0), scalar_model(6.0)], [1, 3])
    return {"inputs": {"values": [2.0, 6.0], "sizes": [1, 3]}, "expected": {"aggregate": merged.W1[0, 0]}}


def metric_instance() -> Dict[str, Any]:
    probs = np.array([0.9, 0.6, 0.4, 0.1])
    truth = np.array([1, 0, 1, 0])
    bacc = balanced_accuracy(probs, truth, 0.5)
    return {
        "inputs": {"probs": probs, "truth": truth, "threshold": 0.5},
        "expected": {
            "bacc": bacc.value,
            "sensitivity": bacc.sensitivity[0],
            "specificity": bacc.specificity[0],
        },
    }


def auc_instance() -> Dict[str, Any]:
    scores = np.array([0.8, 0.8, 0.3])
    truth = np.array([1, 0, 0])
    return {"inputs": {"scores": scores, "truth": truth}, "expected": {"auc": auc(scores, truth).value}}


def average_precision_instance() -> Dict[str, Any]:
    scores = np.array([0.9, 0.7, 0.4, 0.2])
    truth = np.array([0, 1, 0, 0])
    return {
        "inputs": {"scores": scores, "truth": truth},
        "expected": {"ap": mean_average_precision(scores, truth).value},
    }


def mask_plan_instance() -> Dict[str, Any]:
    plan = build_mask_plan(5, 5, 4, seed=7)
    return {
        "inputs": {"clients": 5, "classes": 5, "missing": 4, "seed": 7},
        "expected": {"missing": [list(m) for m in plan.missing], "annotation": [sorted(s) for s in plan.annotation]},
    }


def partition_instance() -> Dict[str, Any]:
    inputs = np.arange(11, dtype=np.float64).reshape(11, 1)
    labels = np.zeros((11, 1))
    shards = partition_clients(inputs, labels, 5)
    return {
        "inputs": {"samples": 11, "clients": 5},
        "expected": {"indices": [shard.indices for shard in shards]},
    }


FIXTURES: Dict[str, Callable[[], Dict[str, Any]]] = {
    "logit_adjustment": logit_adjustment_table,
    "bce_loss": bce_instance,
    "wpc_loss": wpc_instance,
    "mse_consistency": mse_instance,
    "local_prototypes": local_prototype_instance,
    "global_prototypes": global_prototype_instance,
    "confidence_scores": confidence_instance,
    "pseudo_label_selection": selection_instance,
    "local_difficulty": local_difficulty_instance,
    "global_difficulty": global_difficulty_instance,
    "adaptive_thresholds": adaptive_threshold_instance,
    "fedavg_aggregate": fedavg_instance,
    "balanced_accuracy": metric_instance,
    "auc": auc_instance,
    "average_precision": average_precision_instance,
    "mask_plan": mask_plan_instance,
    "partition": partition_instance,
}


class FixtureService:

    def __init__(self, result_repository: ResultRepository = None):
        self.result_repository = result_repository or ResultRepository()

    @staticmethod
    def build(name: str) -> Dict[str, Any]:
        payload = FIXTURES[name]()
        return {"name": name, "inputs": _listed(payload["inputs"]), "expected": _listed(payload["expected"])}

    def emit(self, out_dir: Union[str, Path]) -> List[Path]:
        out_dir = ensure_directory(out_dir)
        written = [
            self.result_repository.write_yaml(out_dir / f"{name}.yaml", self.build(name))
            for name in FIXTURES
        ]
        logger.info(f"Wrote {len(written)} fixtures to {out_dir}")
        return written
