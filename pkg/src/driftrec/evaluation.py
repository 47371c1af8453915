"""Ranking metrics, precision-recall curves, and cross-method aggregation.

The ranking metrics compare a recommended list against a time-ordered
held-out list.  The gain model rewards retrieving items the user picked
earlier: the j-th held-out item (1-indexed, out of L) carries relevance
L - j + 1, discounted by log2(rank + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _dedupe_keep_order(truth) -> list[int]:
    seen = set()
    out = []
    for item in truth:
        item = int(item)
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def precision_recall_at(recommended, truth, N: int) -> tuple[float, float]:
    """Fraction of the top-N that is held out, and of the held-out found.

    Repeated truth items count once (first occurrence wins), so both
    metrics count the same intersection.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    truth = _dedupe_keep_order(truth)
    if not truth:
        raise ValueError("truth must not be empty")
    hits = len(set(int(i) for i in recommended[:N]) & set(truth))
    return hits / N, hits / len(truth)


def ndcg_time_aware(recommended, truth, N: int) -> float:
    """Discounted gain against the time-ordered held-out list, normalized.

    Relevance of the j-th of L truth items is L - j + 1 and zero for
    everything else; both the achieved and the ideal gain truncate at N.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    truth = _dedupe_keep_order(truth)
    if not truth:
        raise ValueError("truth must not be empty")
    L = len(truth)
    relevance = {item: L - j for j, item in enumerate(truth)}
    dcg = 0.0
    for rank, item in enumerate(recommended[:N], start=1):
        dcg += relevance.get(int(item), 0) / math.log2(rank + 1)
    ideal = sum((L - j) / math.log2(j + 2) for j in range(min(N, L)))
    return dcg / ideal


def pr_curve(ranked_by_user: dict, truth_by_user: dict, n_grid) -> list[tuple[float, float]]:
    """Mean (precision, recall) across users at each list length in n_grid."""
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])) or not n_grid:
        raise ValueError("n_grid must be non-empty and strictly ascending")
    missing = set(truth_by_user) - set(ranked_by_user)
    if missing:
        raise ValueError(f"no ranking for users: {sorted(missing)[:5]}")
    users = sorted(truth_by_user)
    if not users:
        raise ValueError("no users to evaluate")
    points = []
    for n in n_grid:
        pr = [precision_recall_at(ranked_by_user[u], truth_by_user[u], n) for u in users]
        points.append((float(np.mean([p for p, _ in pr])), float(np.mean([r for _, r in pr]))))
    return points


def aggregate_cpd(per_method: dict[str, dict[str, tuple[int, int]]]) -> dict[str, float]:
    """Mean absolute displacement per method, over one shared user set."""
    if not per_method:
        raise ValueError("no methods to aggregate")
    user_sets = {method: set(results) for method, results in per_method.items()}
    reference = next(iter(user_sets.values()))
    for method, users in user_sets.items():
        if users != reference:
            raise ValueError(f"method {method!r} covers a different user set")
    if not reference:
        raise ValueError("no users to aggregate")
    return {
        method: float(
            np.mean([abs(truth - pred) for truth, pred in (results[u] for u in sorted(results))])
        )
        for method, results in per_method.items()
    }


@dataclass
class MethodMetrics:
    """Metrics for one method; fields not applicable to it stay empty."""

    mean_delta: float | None = None
    precision_at: dict[int, float] = field(default_factory=dict)
    recall_at: dict[int, float] = field(default_factory=dict)
    ndcg_at: dict[int, float] = field(default_factory=dict)
    pr_points: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.mean_delta is not None and self.mean_delta < 0:
            raise ValueError("mean_delta must be >= 0")
        for name, table in (
            ("precision_at", self.precision_at),
            ("recall_at", self.recall_at),
            ("ndcg_at", self.ndcg_at),
        ):
            if any(not 0.0 <= v <= 1.0 for v in table.values()):
                raise ValueError(f"{name} values must lie in [0, 1]")
        if any(
            not (0.0 <= p <= 1.0 and 0.0 <= r <= 1.0) for p, r in self.pr_points
        ):
            raise ValueError("pr_points must lie in the unit square")


@dataclass
class EvalReport:
    """All methods' metrics plus the run context they were computed under."""

    per_method: dict[str, MethodMetrics]
    n_users: int
    parameters: dict
