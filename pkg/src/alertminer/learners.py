"""Low-capacity learners: L2-regularized logistic regression and a depth-bounded Gini tree."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class TrainingError(RuntimeError):
    pass


def loss_and_grad(weights: np.ndarray, intercept: float, X: np.ndarray, y: np.ndarray,
                  l2: float) -> tuple[float, np.ndarray, float]:
    """Mean log-loss plus ``l2/2 * |w|^2`` (intercept unpenalized) and its gradient."""
    z = X @ weights + intercept
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * l2 * float(weights @ weights)
    residual = _sigmoid(z) - y
    grad_w = X.T @ residual / len(y) + l2 * weights
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float
    losses: list[float] = field(default_factory=list)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(np.asarray(X, dtype=float) @ self.weights + self.intercept)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.predict_proba(X) >= 0.5

    def summary(self, names: Sequence[str] | None = None) -> str:
        names = names or [f"x{j}" for j in range(len(self.weights))]
        lines = [f"intercept {self.intercept:+.6f}"]
        order = sorted(range(len(self.weights)), key=lambda j: (-abs(self.weights[j]), j))
        lines += [f"{names[j]} {self.weights[j]:+.6f}" for j in order]
        return "\n".join(lines)


def train_logistic(X, y, learning_rate: float = 0.5, epochs: int = 500, l2: float = 0.0) -> LogisticModel:
    """Full-batch gradient descent from zero weights; fully deterministic."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("matrix rows must match the number of labels")
    if X.shape[0] == 0:
        raise ValueError("cannot train on an empty set")
    w = np.zeros(X.shape[1])
    b = 0.0
    losses = []
    # divergence is detected below, so numpy's overflow warnings are noise
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(epochs):
            loss, gw, gb = loss_and_grad(w, b, X, y, l2)
            if not np.isfinite(loss) or not np.all(np.isfinite(gw)):
                raise TrainingError(f"non-finite loss at epoch {epoch} (lr={learning_rate}, l2={l2}, "
                                    f"|w|={float(np.linalg.norm(w)):.3g})")
            losses.append(loss)
            w = w - learning_rate * gw
            b = b - learning_rate * gb
    return LogisticModel(w, b, losses)


@dataclass
class TreeNode:
    prediction: bool
    samples: int
    positives: int
    feature: int | None = None
    left: TreeNode | None = None  # feature false
    right: TreeNode | None = None  # feature true

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def gini(positives: int, n: int) -> float:
    if n == 0:
        return 0.0
    p = positives / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


@dataclass
class DecisionTree:
    root: TreeNode
    max_depth: int
    n_features: int

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=bool)
        return np.array([self._predict_row(row) for row in X], dtype=bool)

    def _predict_row(self, row: np.ndarray) -> bool:
        node = self.root
        while not node.is_leaf:
            node = node.right if row[node.feature] else node.left
        return node.prediction

    def depth(self) -> int:
        def walk(node: TreeNode) -> int:
            return 0 if node.is_leaf else 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)

    def rules(self, names: Sequence[str] | None = None) -> str:
        names = names or [f"x{j}" for j in range(self.n_features)]
        lines: list[str] = []

        def walk(node: TreeNode, indent: str) -> None:
            if node.is_leaf:
                lines.append(f"{indent}predict {str(node.prediction).lower()} "
                             f"({node.positives}/{node.samples} positive)")
                return
            lines.append(f"{indent}if not {names[node.feature]}:")
            walk(node.left, indent + "  ")
            lines.append(f"{indent}else:  # {names[node.feature]}")
            walk(node.right, indent + "  ")

        walk(self.root, "")
        return "\n".join(lines)


def train_tree(X, y, max_depth: int) -> DecisionTree:
    """Greedy top-down tree on boolean features.

    Each impure node above the depth bound is split on the feature with the
    lowest weighted Gini impurity among features that separate its rows
    (ties go to the lowest index). Leaves predict the majority label, with
    ties going to False.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    y = np.asarray(y, dtype=bool)
    X = np.asarray(X, dtype=bool).reshape(len(y), -1)
    return DecisionTree(_grow(X, y, max_depth), max_depth, X.shape[1])


def _grow(X: np.ndarray, y: np.ndarray, depth_left: int) -> TreeNode:
    n, pos = len(y), int(y.sum())
    node = TreeNode(prediction=pos * 2 > n, samples=n, positives=pos)
    if depth_left == 0 or pos in (0, n):
        return node
    best_j, best_score = None, None
    for j in range(X.shape[1]):
        mask = X[:, j]
        n_right = int(mask.sum())
        if n_right in (0, n):
            continue
        pos_right = int(y[mask].sum())
        score = (n_right * gini(pos_right, n_right) + (n - n_right) * gini(pos - pos_right, n - n_right)) / n
        if best_score is None or score < best_score - 1e-12:
            best_j, best_score = j, score
    if best_j is None:
        return node
    mask = X[:, best_j]
    node.feature = best_j
    node.left = _grow(X[~mask], y[~mask], depth_left - 1)
    node.right = _grow(X[mask], y[mask], depth_left - 1)
    return node
