"""
Straight-line reference implementations used to check the library. Everything here
works on plain lists with scalar loops and the math module; only the mask plan
replay touches numpy, because it must draw from the same generator.
"""
import math

import numpy as np

LOG_CLAMP = 1e-7
PRIOR_EPSILON = 1e-3
RANK_GUARD = 1e-9


def assert_matches(actual, expected, tol: float = 1e-12, path: str = "expected"):
    """Recursive equality with an absolute tolerance on floats; NaN equals NaN."""
    if isinstance(expected, dict):
        assert isinstance(actual, dict) and set(actual) == set(expected), f"{path}: keys differ"
        for key in expected:
            assert_matches(actual[key], expected[key], tol, f"{path}.{key}")
    elif isinstance(expected, (list, tuple)):
        assert isinstance(actual, (list, tuple)) and len(actual) == len(expected), f"{path}: length differs"
        for index, (a, e) in enumerate(zip(actual, expected)):
            assert_matches(a, e, tol, f"{path}[{index}]")
    elif expected is None:
        assert actual is None, f"{path}: {actual} is not None"
    elif isinstance(expected, float) or isinstance(actual, float):
        if math.isnan(expected):
            assert math.isnan(actual), f"{path}: {actual} is not NaN"
        else:
            assert abs(actual - expected) <= tol, f"{path}: {actual} != {expected}"
    else:
        assert actual == expected, f"{path}: {actual} != {expected}"


# losses

def _clipped_prior(pi1):
    return min(max(pi1, PRIOR_EPSILON), 1.0 - PRIOR_EPSILON)


def adjusted_prob(y, pi1, tau=1.0):
    pi1 = _clipped_prior(pi1)
    weight1, weight0 = pi1 ** tau, (1.0 - pi1) ** tau
    return y * weight1 / (y * weight1 + (1.0 - y) * weight0)


def _masked_bce(probs, labels, mask):
    batch, classes = len(probs), len(probs[0])
    scale = 1.0 / (batch * classes)
    loss = 0.0
    grad = [[0.0] * classes for _ in range(batch)]
    for i in range(batch):
        for j in range(classes):
            if not mask[i][j]:
                continue
            p = min(max(probs[i][j], LOG_CLAMP), 1.0 - LOG_CLAMP)
            y = labels[i][j]
            loss -= scale * (y * math.log(p) + (1.0 - y) * math.log(1.0 - p))
            grad[i][j] = scale * (probs[i][j] - y)
    return loss, grad


def bce_reference(probs, labels):
    return _masked_bce(probs, labels, [[1] * len(row) for row in probs])


def wpc_reference(probs, labels, mask, pi1):
    adjusted = [[adjusted_prob(y, pi1[j]) for j, y in enumerate(row)] for row in probs]
    return _masked_bce(adjusted, labels, mask)


def mse_reference(student, teacher, mask):
    count = sum(1 for row in mask for m in row if m)
    grad = [[0.0] * len(row) for row in student]
    if count == 0:
        return 0.0, grad
    loss = 0.0
    for i, row in enumerate(student):
        for j, s in enumerate(row):
            if mask[i][j]:
                diff = s - teacher[i][j]
                loss += diff * diff / count
                grad[i][j] = 2.0 * diff * s * (1.0 - s) / count
    return loss, grad


# prototypes and selection

def _mean(vectors):
    if not vectors:
        return None
    return [sum(column) / len(vectors) for column in zip(*vectors)]


def prototype_means(features, labels, class_id):
    positive = [list(f) for f, y in zip(features, labels) if y[class_id] == 1]
    negative = [list(f) for f, y in zip(features, labels) if y[class_id] != 1]
    return _mean(negative), _mean(positive), (len(negative), len(positive))


def merged_prototype(contributors):
    """Unweighted mean over (p0, p1, (n0, n1)) triples; absent sides are skipped."""
    p0 = _mean([p0 for p0, _, _ in contributors if p0 is not None])
    p1 = _mean([p1 for _, p1, _ in contributors if p1 is not None])
    support = (sum(n[0] for _, _, n in contributors), sum(n[1] for _, _, n in contributors))
    return p0, p1, support


def cosine(u, v):
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return float("nan")
    return max(-1.0, min(1.0, sum(a * b for a, b in zip(u, v)) / (nu * nv)))


def confidence_reference(features, p0, p1):
    return [cosine(f, p0) - cosine(f, p1) for f in features]


def ranked_selection(z, tau0, tau1):
    valid = [i for i in range(len(z)) if not math.isnan(z[i])]
    negatives = sorted((i for i in valid if z[i] >= 0), key=lambda i: (-z[i], i))
    positives = sorted((i for i in valid if z[i] < 0), key=lambda i: (z[i], i))
    tagged_0 = negatives[:math.floor(tau0 * len(negatives) + RANK_GUARD)]
    tagged_1 = positives[:math.floor(tau1 * len(positives) + RANK_GUARD)]
    return sorted(tagged_0), sorted(tagged_1)


def confident_share(column, low, high):
    return sum(1 for p in column if p < low or p > high) / len(column)


def weighted_difficulty(values, sizes):
    """values and sizes keyed by client."""
    total = sum(sizes[k] for k in values)
    return sum(sizes[k] * values[k] for k in values) / total


def weighted_average(values, sizes):
    return sum(n * v for v, n in zip(values, sizes)) / sum(sizes)


# metrics

def balanced_accuracy_reference(probs, truth, threshold):
    positives = [p for p, y in zip(probs, truth) if y == 1]
    negatives = [p for p, y in zip(probs, truth) if y == 0]
    sensitivity = sum(1 for p in positives if p >= threshold) / len(positives)
    specificity = sum(1 for p in negatives if p < threshold) / len(negatives)
    return (sensitivity + specificity) / 2.0, sensitivity, specificity


def pairwise_auc(scores, truth):
    positives = [s for s, y in zip(scores, truth) if y == 1]
    negatives = [s for s, y in zip(scores, truth) if y == 0]
    credit = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in positives for n in negatives)
    return credit / (len(positives) * len(negatives))


def ranked_average_precision(scores, truth):
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    hits, precisions = 0, []
    for rank, i in enumerate(order, start=1):
        if truth[i] == 1:
            hits += 1
            precisions.append(hits / rank)
    return sum(precisions) / len(precisions)


# data

def replay_mask_plan(clients, classes, missing, seed, attempts=1000):
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        plan = [sorted(int(c) for c in rng.choice(classes, size=missing, replace=False)) for _ in range(clients)]
        annotation = [[k for k, hidden in enumerate(plan) if c not in hidden] for c in range(classes)]
        if all(annotation):
            return plan, annotation
    raise AssertionError("no covering plan within the rejection budget")


def contiguous_partition(samples, clients):
    base, remainder = divmod(samples, clients)
    indices, start = [], 0
    for k in range(clients):
        size = base + (1 if k >= clients - remainder else 0)
        indices.append(list(range(start, start + size)))
        start += size
    return indices


# fixture payloads

def _prototype_payload(p0, p1, support):
    return {"p0": p0, "p1": p1, "support": list(support)}


def _loss_payload(loss, grad):
    return {"loss": loss, "grad_logits": grad}


def _local_prototypes(inputs):
    return {
        str(c): _prototype_payload(*prototype_means(inputs["features"], inputs["labels"], c))
        for c in inputs["active_classes"]
    }


def _global_prototypes(inputs):
    expected = {}
    for c, labelers in enumerate(inputs["annotation"]):
        contributors = [
            (entry["p0"], entry["p1"], entry["support"])
            for entry in inputs["local"]
            if entry["class"] == c and entry["client"] in labelers
        ]
        expected[str(c)] = _prototype_payload(*merged_prototype(contributors))
    return expected


def _global_difficulty(inputs):
    d_global = []
    for c, labelers in enumerate(inputs["annotation"]):
        values = {e["client"]: e["d"] for e in inputs["local"] if e["class"] == c and e["client"] in labelers}
        d_global.append(weighted_difficulty(values, dict(enumerate(inputs["sizes"]))))
    return {"d_global": d_global}


def _balanced_accuracy(inputs):
    bacc, sensitivity, specificity = balanced_accuracy_reference(
        inputs["probs"], inputs["truth"], inputs["threshold"])
    return {"bacc": bacc, "sensitivity": sensitivity, "specificity": specificity}


def _mask_plan(inputs):
    plan, annotation = replay_mask_plan(inputs["clients"], inputs["classes"], inputs["missing"], inputs["seed"])
    return {"missing": plan, "annotation": annotation}


def _selection(inputs):
    tagged_0, tagged_1 = ranked_selection(inputs["z"], inputs["tau0"], inputs["tau1"])
    return {"tagged_0": tagged_0, "tagged_1": tagged_1}


FIXTURE_ORACLES = {
    "logit_adjustment": lambda i: {
        "adjusted": [[adjusted_prob(y, i["pi1"][j]) for j, y in enumerate(row)] for row in i["probs"]]},
    "bce_loss": lambda i: _loss_payload(*bce_reference(i["probs"], i["labels"])),
    "wpc_loss": lambda i: _loss_payload(*wpc_reference(i["probs"], i["labels"], i["active_mask"], i["pi1"])),
    "mse_consistency": lambda i: _loss_payload(*mse_reference(i["student"], i["teacher"], i["uncertain_mask"])),
    "local_prototypes": _local_prototypes,
    "global_prototypes": _global_prototypes,
    "confidence_scores": lambda i: {"z": confidence_reference(i["features"], i["p0"], i["p1"])},
    "pseudo_label_selection": _selection,
    "local_difficulty": lambda i: {"difficulty": {
        str(c): confident_share([row[c] for row in i["probs"]], *i["band"]) for c in range(len(i["probs"][0]))}},
    "global_difficulty": _global_difficulty,
    "adaptive_thresholds": lambda i: {
        "tau0": [d * i["T0"] for d in i["d_global"]], "tau1": [d * i["T1"] for d in i["d_global"]]},
    "fedavg_aggregate": lambda i: {"aggregate": weighted_average(i["values"], i["sizes"])},
    "balanced_accuracy": _balanced_accuracy,
    "auc": lambda i: {"auc": pairwise_auc(i["scores"], i["truth"])},
    "average_precision": lambda i: {"ap": ranked_average_precision(i["scores"], i["truth"])},
    "mask_plan": _mask_plan,
    "partition": lambda i: {"indices": contiguous_partition(i["samples"], i["clients"])},
}
