"""Independent list-based reference implementations for the tree learner."""

from __future__ import annotations

from itertools import product


def _gini(ys):
    if not ys:
        return 0.0
    p = sum(ys) / len(ys)
    return 1.0 - p * p - (1.0 - p) ** 2


def _majority(ys):
    return sum(ys) * 2 > len(ys)


def greedy_tree(rows, ys, depth):
    """Nested tuples: ("leaf", prediction) or ("split", feature, left, right)."""
    if depth == 0 or len(set(ys)) <= 1:
        return ("leaf", _majority(ys))
    candidates = []
    for f in range(len(rows[0]) if rows else 0):
        left = [i for i, r in enumerate(rows) if not r[f]]
        right = [i for i, r in enumerate(rows) if r[f]]
        if not left or not right:
            continue
        score = (len(left) * _gini([ys[i] for i in left]) + len(right) * _gini([ys[i] for i in right])) / len(ys)
        candidates.append((round(score, 12), f, left, right))
    if not candidates:
        return ("leaf", _majority(ys))
    _, f, left, right = min(candidates, key=lambda c: (c[0], c[1]))
    return ("split", f,
            greedy_tree([rows[i] for i in left], [ys[i] for i in left], depth - 1),
            greedy_tree([rows[i] for i in right], [ys[i] for i in right], depth - 1))


def predict(tree, row):
    while tree[0] == "split":
        tree = tree[3] if row[tree[1]] else tree[2]
    return tree[1]


def best_accuracy(rows, ys, depth):
    """Most training rows any tree of at most ``depth`` levels can classify correctly."""
    best = max(sum(ys), len(ys) - sum(ys))
    if depth == 0 or not rows:
        return best
    for f in range(len(rows[0])):
        left = [i for i, r in enumerate(rows) if not r[f]]
        right = [i for i, r in enumerate(rows) if r[f]]
        if not left or not right:
            continue
        best = max(best, best_accuracy([rows[i] for i in left], [ys[i] for i in left], depth - 1)
                   + best_accuracy([rows[i] for i in right], [ys[i] for i in right], depth - 1))
    return best


def all_datasets(max_rows: int, n_features: int, limit_rows=None):
    """Every (rows, labels) over ``n_features`` boolean features with up to ``max_rows`` rows."""
    vectors = list(product([False, True], repeat=n_features))
    for n in range(1, max_rows + 1):
        for rows in product(vectors, repeat=n):
            for ys in product([False, True], repeat=n):
                yield [list(r) for r in rows], list(ys)
