"""From-scratch classifiers behind one train/predict/probability contract.

Five families: one-vs-rest logistic regression (full-batch gradient descent
with a backtracking step size, so the recorded loss trace never increases),
one-vs-rest linear SVM (Pegasos subgradient schedule), one-vs-rest RBF
kernel SVM (simplified sequential minimal optimization), a CART decision
tree, and a bagged random forest. Soft and hard voting combine trained
models. Sparse feature matrices are accepted natively by the linear
families; kernel and tree families densify within a configurable budget.
"""

from __future__ import annotations

import base64
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.special import expit

from .errors import DataError, FormatError, UsageError
from .util import canonical_json, derive_rng

MODEL_FORMAT = "ssd-model-v1"

_HYPER_DEFAULTS: dict[str, dict] = {
    "lr": {"C": 1.0, "learning_rate": 0.1, "max_iter": 1000, "tol": 1e-6},
    "svm_linear": {"lam": 1e-4, "epochs": 50},
    "svm_rbf": {
        "C": 1.0,
        "gamma": "scale",
        "tol": 1e-3,
        "max_passes": 10,
        "densify_budget": 20_000_000,
    },
    "dt": {
        "max_depth": None,
        "min_samples_split": 2,
        "max_features": None,
        "densify_budget": 20_000_000,
    },
    "rf": {
        "n_trees": 100,
        "bootstrap": True,
        "max_features": "sqrt",
        "densify_budget": 20_000_000,
    },
}


def _check_hyper(family: str, name: str, value) -> None:
    positive = {"C", "learning_rate", "lam"}
    at_least_one = {"max_iter", "epochs", "max_passes", "n_trees", "densify_budget"}
    if name in positive and not (isinstance(value, (int, float)) and value > 0):
        raise UsageError(f"{family}.{name} must be positive, got {value!r}")
    if name in at_least_one and not (isinstance(value, int) and value >= 1):
        raise UsageError(f"{family}.{name} must be an integer >= 1, got {value!r}")
    if name == "tol" and not (isinstance(value, (int, float)) and value >= 0):
        raise UsageError(f"{family}.tol must be >= 0, got {value!r}")
    if name == "gamma" and value != "scale" and not (
        isinstance(value, (int, float)) and value > 0
    ):
        raise UsageError(f"{family}.gamma must be 'scale' or positive, got {value!r}")
    if name == "max_depth" and value is not None and not (
        isinstance(value, int) and value >= 1
    ):
        raise UsageError(f"{family}.max_depth must be None or >= 1, got {value!r}")
    if name == "min_samples_split" and not (isinstance(value, int) and value >= 2):
        raise UsageError(f"{family}.min_samples_split must be >= 2, got {value!r}")
    if name == "max_features" and value is not None and value != "sqrt" and not (
        isinstance(value, int) and value >= 1
    ):
        raise UsageError(f"{family}.max_features must be None, 'sqrt', or >= 1")
    if name == "bootstrap" and not isinstance(value, bool):
        raise UsageError(f"{family}.bootstrap must be a bool, got {value!r}")


@dataclass(frozen=True)
class ModelSpec:
    family: str
    hyperparameters: dict
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in _HYPER_DEFAULTS:
            raise UsageError(f"unknown model family {self.family!r}")
        defaults = _HYPER_DEFAULTS[self.family]
        unknown = set(self.hyperparameters) - set(defaults)
        if unknown:
            raise UsageError(
                f"unknown {self.family} hyperparameters: {sorted(unknown)}"
            )
        for name, value in self.hyperparameters.items():
            _check_hyper(self.family, name, value)

    def hyper(self, name: str):
        return self.hyperparameters.get(name, _HYPER_DEFAULTS[self.family][name])


def make_spec(family: str, seed: int = 0, **hyperparameters) -> ModelSpec:
    return ModelSpec(family, hyperparameters, seed)


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    classes: tuple[str, ...]
    priors: np.ndarray
    n_features: int
    state: dict


# ---------------------------------------------------------------------------
# shared helpers


def _as_matrix(X):
    if sparse.issparse(X):
        return sparse.csr_matrix(X)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise UsageError(f"feature matrix must be 2-D, got shape {X.shape}")
    return X


def _ensure_dense(X, budget: int) -> np.ndarray:
    if sparse.issparse(X):
        if X.shape[0] * X.shape[1] > budget:
            raise DataError(
                f"densifying a {X.shape[0]}x{X.shape[1]} matrix exceeds the "
                f"budget of {budget} elements"
            )
        return X.toarray()
    return np.asarray(X, dtype=float)


def _resolve_classes(y: Sequence[str], classes: Sequence[str] | None):
    y = list(y)
    observed = set(y)
    if len(observed) < 2:
        raise DataError(f"training labels contain {len(observed)} distinct class(es); need >= 2")
    if classes is None:
        classes = tuple(sorted(observed))
    else:
        classes = tuple(classes)
        extra = observed - set(classes)
        if extra:
            raise DataError(f"labels outside the declared class list: {sorted(extra)}")
        absent = [c for c in classes if c not in observed]
        if absent:
            warnings.warn(
                f"classes absent from training data score zero probability: {absent}",
                stacklevel=3,
            )
    counts = np.array([sum(1 for v in y if v == c) for c in classes], dtype=float)
    return y, classes, counts / len(y)


def _check_layout(m: TrainedModel, X) -> None:
    if X.shape[1] != m.n_features:
        raise UsageError(
            f"feature layout mismatch: model fitted on {m.n_features} columns, "
            f"input has {X.shape[1]}"
        )


def _normalize_rows(scores: np.ndarray) -> np.ndarray:
    totals = scores.sum(axis=1, keepdims=True)
    totals[totals == 0] = 1.0
    return scores / totals


# ---------------------------------------------------------------------------
# logistic regression


def lr_objective_grad(w: np.ndarray, b: float, X, targets: np.ndarray, C: float):
    """Mean cross-entropy plus ||w||^2 / (2 C n); returns (J, dJ/dw, dJ/db)."""
    n = len(targets)
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - targets * z)) + float(w @ w) / (2 * C * n)
    p = expit(z)
    grad_w = X.T @ (p - targets) / n + w / (C * n)
    grad_b = float(np.mean(p - targets))
    return loss, np.asarray(grad_w).ravel(), grad_b


def _fit_binary_lr(X, targets, C, learning_rate, max_iter, tol):
    w = np.zeros(X.shape[1])
    b = 0.0
    step = learning_rate
    loss, gw, gb = lr_objective_grad(w, b, X, targets, C)
    trace = [loss]
    for _ in range(max_iter):
        while True:
            w2 = w - step * gw
            b2 = b - step * gb
            loss2, gw2, gb2 = lr_objective_grad(w2, b2, X, targets, C)
            if loss2 <= loss:
                break
            step *= 0.5
            if step < 1e-12:
                return w, b, trace
        improvement = loss - loss2
        w, b, loss, gw, gb = w2, b2, loss2, gw2, gb2
        trace.append(loss)
        if improvement < tol:
            break
    return w, b, trace


def train_lr(X, y, spec: ModelSpec, classes: Sequence[str] | None = None) -> TrainedModel:
    X = _as_matrix(X)
    y, classes, priors = _resolve_classes(y, classes)
    if len(y) != X.shape[0]:
        raise UsageError("X and y disagree on sample count")
    W = np.zeros((len(classes), X.shape[1]))
    b = np.zeros(len(classes))
    present = np.zeros(len(classes), dtype=bool)
    traces = []
    for k, cls in enumerate(classes):
        targets = np.array([1.0 if v == cls else 0.0 for v in y])
        if not targets.any():
            traces.append([])
            continue
        present[k] = True
        W[k], b[k], trace = _fit_binary_lr(
            X,
            targets,
            spec.hyper("C"),
            spec.hyper("learning_rate"),
            spec.hyper("max_iter"),
            spec.hyper("tol"),
        )
        traces.append(trace)
    state = {"W": W, "b": b, "present": present, "loss_traces": traces}
    return TrainedModel(spec, classes, priors, X.shape[1], state)


# ---------------------------------------------------------------------------
# linear SVM (Pegasos)


def svm_linear_objective(w: np.ndarray, b: float, X, targets: np.ndarray, lam: float):
    margins = np.asarray(X @ w).ravel() + b
    hinge = np.maximum(0.0, 1.0 - targets * margins)
    return lam / 2 * float(w @ w) + float(hinge.mean())


def _fit_binary_pegasos(X, targets, lam, epochs, rng):
    """Pegasos on the bias-augmented problem (constant last column), so the
    intercept shrinks with the rest of the weights instead of accumulating
    the huge early 1/(lambda t) steps."""
    n = X.shape[0]
    is_sparse = sparse.issparse(X)
    if is_sparse:
        Xa = sparse.hstack([X, np.ones((n, 1))], format="csr")
    else:
        Xa = np.hstack([X, np.ones((n, 1))])
    w = np.zeros(Xa.shape[1])
    objective_trace = []
    t = 0
    avg_w = w
    for _ in range(epochs):
        order = rng.permutation(n)
        # early epochs are dominated by the giant first steps, so the model
        # keeps the average of the final epoch's iterates
        epoch_w = np.zeros_like(w)
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            row = Xa[i]
            # sparse rows give a length-1 array; .item() covers both layouts
            margin = (row @ w).item()
            w *= 1.0 - eta * lam
            if targets[i] * margin < 1.0:
                if is_sparse:
                    w[row.indices] += eta * targets[i] * row.data
                else:
                    w += eta * targets[i] * row
            epoch_w += w
        avg_w = epoch_w / n
        objective_trace.append(
            svm_linear_objective(avg_w[:-1], float(avg_w[-1]), X, targets, lam)
        )
    return avg_w[:-1], float(avg_w[-1]), objective_trace


def train_svm_linear(
    X, y, spec: ModelSpec, classes: Sequence[str] | None = None
) -> TrainedModel:
    X = _as_matrix(X)
    y, classes, priors = _resolve_classes(y, classes)
    if len(y) != X.shape[0]:
        raise UsageError("X and y disagree on sample count")
    W = np.zeros((len(classes), X.shape[1]))
    b = np.zeros(len(classes))
    present = np.zeros(len(classes), dtype=bool)
    traces = []
    for k, cls in enumerate(classes):
        targets = np.array([1.0 if v == cls else -1.0 for v in y])
        if not (targets > 0).any():
            traces.append([])
            continue
        present[k] = True
        rng = derive_rng(spec.seed, "svm_linear", cls)
        W[k], b[k], trace = _fit_binary_pegasos(
            X, targets, spec.hyper("lam"), spec.hyper("epochs"), rng
        )
        traces.append(trace)
    state = {"W": W, "b": b, "present": present, "objective_traces": traces}
    return TrainedModel(spec, classes, priors, X.shape[1], state)


# ---------------------------------------------------------------------------
# RBF-kernel SVM (simplified SMO)


def _rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def resolve_gamma(gamma, X: np.ndarray) -> float:
    if gamma != "scale":
        return float(gamma)
    variance = float(X.var())
    if variance == 0.0:
        return 1.0
    return 1.0 / (X.shape[1] * variance)


def _fit_binary_smo(K, targets, C, tol, max_passes, rng):
    n = K.shape[0]
    alphas = np.zeros(n)
    b = 0.0
    passes = 0
    while passes < max_passes:
        changed = 0
        for i in range(n):
            err_i = float((alphas * targets) @ K[:, i]) + b - targets[i]
            if (targets[i] * err_i < -tol and alphas[i] < C) or (
                targets[i] * err_i > tol and alphas[i] > 0
            ):
                j = int(rng.integers(0, n - 1))
                if j >= i:
                    j += 1
                err_j = float((alphas * targets) @ K[:, j]) + b - targets[j]
                alpha_i, alpha_j = alphas[i], alphas[j]
                if targets[i] != targets[j]:
                    low = max(0.0, alpha_j - alpha_i)
                    high = min(C, C + alpha_j - alpha_i)
                else:
                    low = max(0.0, alpha_i + alpha_j - C)
                    high = min(C, alpha_i + alpha_j)
                if low == high:
                    continue
                eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
                if eta >= 0:
                    continue
                new_j = alpha_j - targets[j] * (err_i - err_j) / eta
                new_j = min(high, max(low, new_j))
                if abs(new_j - alpha_j) < 1e-5:
                    continue
                new_i = alpha_i + targets[i] * targets[j] * (alpha_j - new_j)
                b1 = (
                    b
                    - err_i
                    - targets[i] * (new_i - alpha_i) * K[i, i]
                    - targets[j] * (new_j - alpha_j) * K[i, j]
                )
                b2 = (
                    b
                    - err_j
                    - targets[i] * (new_i - alpha_i) * K[i, j]
                    - targets[j] * (new_j - alpha_j) * K[j, j]
                )
                if 0 < new_i < C:
                    b = b1
                elif 0 < new_j < C:
                    b = b2
                else:
                    b = (b1 + b2) / 2.0
                alphas[i], alphas[j] = new_i, new_j
                changed += 1
        passes = passes + 1 if changed == 0 else 0
    return alphas, b


def train_svm_rbf(
    X, y, spec: ModelSpec, classes: Sequence[str] | None = None
) -> TrainedModel:
    X = _ensure_dense(X, spec.hyper("densify_budget"))
    y, classes, priors = _resolve_classes(y, classes)
    if len(y) != X.shape[0]:
        raise UsageError("X and y disagree on sample count")
    gamma = resolve_gamma(spec.hyper("gamma"), X)
    K = _rbf_kernel(X, X, gamma)
    C = spec.hyper("C")
    machines = []
    present = np.zeros(len(classes), dtype=bool)
    for k, cls in enumerate(classes):
        targets = np.array([1.0 if v == cls else -1.0 for v in y])
        if not (targets > 0).any():
            machines.append(None)
            continue
        present[k] = True
        rng = derive_rng(spec.seed, "svm_rbf", cls)
        alphas, b = _fit_binary_smo(
            K, targets, C, spec.hyper("tol"), spec.hyper("max_passes"), rng
        )
        keep = alphas > 0
        machines.append(
            {
                "alphas": alphas[keep] * targets[keep],
                "sv": X[keep],
                "b": b,
                "all_alphas": alphas,
            }
        )
    state = {"machines": machines, "gamma": gamma, "present": present}
    return TrainedModel(spec, classes, priors, X.shape[1], state)


# ---------------------------------------------------------------------------
# decision tree and random forest


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return 1.0 - float(p @ p)


def _best_split(X, y_idx, rows, n_classes, max_features, rng):
    """Lowest weighted-child-impurity split over (sampled) features;
    ties resolved toward the lowest feature index, then lowest threshold."""
    d = X.shape[1]
    if max_features is not None and max_features < d:
        feats = np.sort(rng.choice(d, size=max_features, replace=False))
    else:
        feats = np.arange(d)
    parent_counts = np.bincount(y_idx[rows], minlength=n_classes)
    n = len(rows)
    best = None  # (weighted_impurity, feature, threshold)
    for f in feats:
        values = X[rows, f]
        order = np.argsort(values, kind="stable")
        sorted_rows = rows[order]
        sorted_values = values[order]
        left_counts = np.zeros(n_classes)
        right_counts = parent_counts.astype(float).copy()
        for split_at in range(1, n):
            cls = y_idx[sorted_rows[split_at - 1]]
            left_counts[cls] += 1
            right_counts[cls] -= 1
            if sorted_values[split_at] == sorted_values[split_at - 1]:
                continue
            threshold = (sorted_values[split_at - 1] + sorted_values[split_at]) / 2.0
            weighted = (
                split_at * _gini(left_counts) + (n - split_at) * _gini(right_counts)
            ) / n
            if best is None or weighted < best[0] - 1e-15:
                best = (weighted, int(f), float(threshold))
    if best is None:
        return None  # all sampled features constant on this node
    return best[1], best[2]


class _TreeBuilder:
    def __init__(self, n_classes):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.proba: list[np.ndarray] = []
        self.n_classes = n_classes

    def add(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.proba.append(np.zeros(self.n_classes))
        return len(self.feature) - 1


def _grow_tree(X, y_idx, n_classes, min_split, max_depth, max_features, rng):
    tree = _TreeBuilder(n_classes)
    root = tree.add()
    stack = [(root, np.arange(len(y_idx)), 0)]
    while stack:
        node, rows, depth = stack.pop()
        counts = np.bincount(y_idx[rows], minlength=n_classes).astype(float)
        tree.proba[node] = counts / counts.sum()
        if (
            len(rows) < min_split
            or (max_depth is not None and depth >= max_depth)
            or _gini(counts) == 0.0
        ):
            continue
        split = _best_split(X, y_idx, rows, n_classes, max_features, rng)
        if split is None:
            continue
        f, thr = split
        tree.feature[node] = f
        tree.threshold[node] = thr
        mask = X[rows, f] <= thr
        left_id = tree.add()
        right_id = tree.add()
        tree.left[node] = left_id
        tree.right[node] = right_id
        # push right first so the left child is expanded (and numbered) next
        stack.append((right_id, rows[~mask], depth + 1))
        stack.append((left_id, rows[mask], depth + 1))
    return {
        "feature": np.array(tree.feature, dtype=np.int64),
        "threshold": np.array(tree.threshold),
        "left": np.array(tree.left, dtype=np.int64),
        "right": np.array(tree.right, dtype=np.int64),
        "proba": np.vstack(tree.proba),
    }


def _tree_proba(tree: dict, X: np.ndarray) -> np.ndarray:
    out = np.empty((X.shape[0], tree["proba"].shape[1]))
    for i, row in enumerate(X):
        node = 0
        while tree["feature"][node] >= 0:
            if row[tree["feature"][node]] <= tree["threshold"][node]:
                node = tree["left"][node]
            else:
                node = tree["right"][node]
        out[i] = tree["proba"][node]
    return out


def _resolve_max_features(value, d: int) -> int | None:
    if value is None:
        return None
    if value == "sqrt":
        return int(np.ceil(np.sqrt(d)))
    return min(int(value), d)


def train_dt(X, y, spec: ModelSpec, classes: Sequence[str] | None = None) -> TrainedModel:
    X = _ensure_dense(X, spec.hyper("densify_budget"))
    y, classes, priors = _resolve_classes(y, classes)
    if len(y) != X.shape[0]:
        raise UsageError("X and y disagree on sample count")
    index = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([index[v] for v in y])
    max_features = _resolve_max_features(spec.hyper("max_features"), X.shape[1])
    rng = derive_rng(spec.seed, "tree", 0)
    tree = _grow_tree(
        X, y_idx, len(classes), spec.hyper("min_samples_split"),
        spec.hyper("max_depth"), max_features, rng,
    )
    return TrainedModel(spec, classes, priors, X.shape[1], {"trees": [tree]})


def train_rf(X, y, spec: ModelSpec, classes: Sequence[str] | None = None) -> TrainedModel:
    X = _ensure_dense(X, spec.hyper("densify_budget"))
    y, classes, priors = _resolve_classes(y, classes)
    if len(y) != X.shape[0]:
        raise UsageError("X and y disagree on sample count")
    index = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([index[v] for v in y])
    max_features = _resolve_max_features(spec.hyper("max_features"), X.shape[1])
    trees = []
    n = X.shape[0]
    for t in range(spec.hyper("n_trees")):
        rng = derive_rng(spec.seed, "tree", t)
        if spec.hyper("bootstrap"):
            rows = rng.integers(0, n, size=n)
        else:
            rows = np.arange(n)
        trees.append(
            _grow_tree(
                X[rows], y_idx[rows], len(classes), 2, None, max_features, rng
            )
        )
    return TrainedModel(spec, classes, priors, X.shape[1], {"trees": trees})


# ---------------------------------------------------------------------------
# prediction


def predict_proba(m, X) -> np.ndarray:
    """Per-class probabilities; rows sum to one."""
    if isinstance(m, VotingModel):
        return _voting_proba(m, X)
    X = _as_matrix(X)
    _check_layout(m, X)
    family = m.spec.family
    if X.shape[0] == 0:
        return np.zeros((0, len(m.classes)))
    if family in ("lr", "svm_linear"):
        margins = np.asarray(X @ m.state["W"].T) + m.state["b"]
        scores = expit(margins)
        scores[:, ~m.state["present"]] = 0.0
        return _normalize_rows(scores)
    if family == "svm_rbf":
        X = _ensure_dense(X, m.spec.hyper("densify_budget"))
        scores = np.zeros((X.shape[0], len(m.classes)))
        for k, machine in enumerate(m.state["machines"]):
            if machine is None:
                continue
            K = _rbf_kernel(X, machine["sv"], m.state["gamma"])
            scores[:, k] = expit(K @ machine["alphas"] + machine["b"])
        return _normalize_rows(scores)
    if family in ("dt", "rf"):
        X = _ensure_dense(X, m.spec.hyper("densify_budget"))
        acc = np.zeros((X.shape[0], len(m.classes)))
        for tree in m.state["trees"]:
            acc += _tree_proba(tree, X)
        return acc / len(m.state["trees"])
    raise UsageError(f"unknown model family {family!r}")


def predict(m, X) -> list[str]:
    """Argmax labels; exact ties resolve to the earlier fit-time class."""
    if isinstance(m, VotingModel) and m.kind == "hard":
        return _hard_vote_labels(m, X)
    proba = predict_proba(m, X)
    return [m.classes[i] for i in np.argmax(proba, axis=1)]


# ---------------------------------------------------------------------------
# voting ensembles


@dataclass(frozen=True)
class VotingModel:
    kind: str  # "soft" | "hard"
    members: tuple
    classes: tuple[str, ...]
    priors: np.ndarray

    @property
    def n_features(self) -> int:
        return self.members[0].n_features


def make_voting(kind: str, members: Sequence) -> VotingModel:
    if kind not in ("soft", "hard"):
        raise UsageError(f"voting kind must be 'soft' or 'hard', got {kind!r}")
    if not members:
        raise UsageError("a voting ensemble needs at least one member")
    base = set(members[0].classes)
    for m in members[1:]:
        if set(m.classes) != base:
            raise UsageError("voting members disagree on the class set")
    classes = members[0].classes
    aligned_priors = np.mean(
        [
            [m.priors[m.classes.index(c)] for c in classes]
            for m in members
        ],
        axis=0,
    )
    return VotingModel(kind, tuple(members), classes, aligned_priors)


def _aligned_proba(member, X, classes) -> np.ndarray:
    proba = predict_proba(member, X)
    if member.classes == classes:
        return proba
    cols = [member.classes.index(c) for c in classes]
    return proba[:, cols]


def _voting_proba(vm: VotingModel, X) -> np.ndarray:
    stacked = [_aligned_proba(m, X, vm.classes) for m in vm.members]
    if vm.kind == "soft":
        return np.mean(stacked, axis=0)
    # hard: vote shares
    n = stacked[0].shape[0]
    votes = np.zeros((n, len(vm.classes)))
    for proba in stacked:
        winners = np.argmax(proba, axis=1)
        votes[np.arange(n), winners] += 1
    return _normalize_rows(votes)


def _hard_vote_labels(vm: VotingModel, X) -> list[str]:
    member_preds = [predict(m, X) for m in vm.members]
    out = []
    for i in range(len(member_preds[0]) if member_preds else 0):
        votes = np.zeros(len(vm.classes))
        for preds in member_preds:
            votes[vm.classes.index(preds[i])] += 1
        top = votes.max()
        tied = [k for k in range(len(vm.classes)) if votes[k] == top]
        winner = max(tied, key=lambda k: (vm.priors[k], -k))
        out.append(vm.classes[winner])
    return out


def soft_vote(models: Sequence, X) -> tuple[list[str], np.ndarray]:
    vm = make_voting("soft", models)
    proba = predict_proba(vm, X)
    return [vm.classes[i] for i in np.argmax(proba, axis=1)], proba


def hard_vote(models: Sequence, X) -> list[str]:
    return predict(make_voting("hard", models), X)


# ---------------------------------------------------------------------------
# serialization


def _to_jsonable(value):
    if isinstance(value, np.ndarray):
        return {"__array__": value.tolist(), "dtype": str(value.dtype)}
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    return value


def _from_jsonable(value):
    if isinstance(value, dict):
        if "__array__" in value:
            return np.array(value["__array__"], dtype=value["dtype"])
        return {k: _from_jsonable(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_from_jsonable(v) for v in value]
    return value


def model_to_envelope(m) -> dict:
    if isinstance(m, VotingModel):
        state = {"members": [model_to_envelope(member) for member in m.members]}
        spec = {"family": f"{m.kind}_vote", "hyperparameters": {}, "seed": 0}
    else:
        state = _to_jsonable(m.state)
        spec = {
            "family": m.spec.family,
            "hyperparameters": _to_jsonable(m.spec.hyperparameters),
            "seed": m.spec.seed,
        }
    blob = base64.b64encode(canonical_json(state).encode("utf-8")).decode("ascii")
    return {
        "format": MODEL_FORMAT,
        "spec": spec,
        "labels": list(m.classes),
        "priors": [float(p) for p in m.priors],
        "n_features": m.n_features,
        "state": blob,
    }


def model_from_envelope(env: dict):
    if not isinstance(env, dict) or env.get("format") != MODEL_FORMAT:
        raise FormatError(
            f"expected a {MODEL_FORMAT} model file, got format "
            f"{env.get('format') if isinstance(env, dict) else type(env).__name__!r}"
        )
    import json

    state = _from_jsonable(
        json.loads(base64.b64decode(env["state"]).decode("utf-8"))
    )
    family = env["spec"]["family"]
    classes = tuple(env["labels"])
    priors = np.array(env["priors"], dtype=float)
    if family in ("soft_vote", "hard_vote"):
        members = tuple(model_from_envelope(e) for e in state["members"])
        return VotingModel(family.split("_")[0], members, classes, priors)
    spec = ModelSpec(family, env["spec"]["hyperparameters"], env["spec"]["seed"])
    return TrainedModel(spec, classes, priors, int(env["n_features"]), state)


def save_model(m, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(model_to_envelope(m)) + "\n")


def load_model(path: str):
    import json

    try:
        fh = open(path, encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"model file not found: {path}") from None
    with fh:
        try:
            env = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from None
    return model_from_envelope(env)
