import math

import numpy as np
import pytest

from driftrec.evaluation import (
    EvalReport,
    MethodMetrics,
    aggregate_cpd,
    ndcg_time_aware,
    pr_curve,
    precision_recall_at,
)


class TestPrecisionRecall:
    def test_half_hits(self):
        truth = list(range(10))
        recommended = [0, 1, 2, 3, 4] + [100, 101, 102, 103, 104]
        assert precision_recall_at(recommended, truth, 10) == (0.5, 0.5)

    def test_disjoint(self):
        assert precision_recall_at([1, 2, 3], [7, 8, 9], 3) == (0.0, 0.0)

    def test_perfect_any_order(self):
        truth = list(range(10))
        recommended = list(reversed(truth))
        assert precision_recall_at(recommended, truth, 10) == (1.0, 1.0)

    def test_empty_truth_rejected(self):
        with pytest.raises(ValueError):
            precision_recall_at([1, 2], [], 2)
        with pytest.raises(ValueError):
            precision_recall_at([1, 2], [3], 0)

    def test_counting_identity(self):
        # precision * N and recall * |truth| count the same intersection
        rng = np.random.default_rng(3)
        for _ in range(50):
            m = 30
            truth = rng.choice(m, size=int(rng.integers(1, 12)), replace=False).tolist()
            ranked = rng.permutation(m).tolist()
            n = int(rng.integers(1, 15))
            p, r = precision_recall_at(ranked, truth, n)
            assert p * n == pytest.approx(r * len(truth), abs=1e-12)

    def test_duplicate_truth_counts_once(self):
        p, r = precision_recall_at([5, 6], [5, 5, 9], 2)
        assert (p, r) == (0.5, 0.5)


class TestNdcg:
    def test_ideal_order_scores_one(self):
        truth = [4, 9, 2, 7]
        assert ndcg_time_aware(truth + [0, 1], truth, 10) == pytest.approx(1.0)

    def test_disjoint_scores_zero(self):
        assert ndcg_time_aware([1, 2, 3], [8, 9], 3) == 0.0

    def test_two_item_swap_hand_value(self):
        got = ndcg_time_aware([11, 10], [10, 11], 2)
        # independent scalar evaluation of the same definition
        dcg = 1 / math.log2(2) + 2 / math.log2(3)
        idcg = 2 / math.log2(2) + 1 / math.log2(3)
        assert got == pytest.approx(dcg / idcg, rel=1e-12)
        assert got == pytest.approx(0.8597, abs=1e-4)

    def test_truncation_at_n(self):
        truth = [1, 2, 3]
        assert ndcg_time_aware([1], truth, 1) == pytest.approx(1.0)
        assert ndcg_time_aware([3], truth, 1) == pytest.approx(1.0 / 3.0)

    def test_any_transposition_loses(self):
        truth = [3, 1, 4, 1, 5, 9, 2, 6]  # dupes collapse, 7 distinct
        distinct = [3, 1, 4, 5, 9, 2, 6]
        base = ndcg_time_aware(distinct, truth, 10)
        assert base == pytest.approx(1.0)
        for a in range(len(distinct) - 1):
            swapped = distinct.copy()
            swapped[a], swapped[a + 1] = swapped[a + 1], swapped[a]
            assert ndcg_time_aware(swapped, truth, 10) < 1.0

    def test_always_in_unit_interval(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            m = 25
            truth = rng.choice(m, size=int(rng.integers(1, 10)), replace=False).tolist()
            ranked = rng.permutation(m).tolist()[: int(rng.integers(1, m))]
            v = ndcg_time_aware(ranked, truth, int(rng.integers(1, 15)))
            assert 0.0 <= v <= 1.0

    def test_empty_truth_rejected(self):
        with pytest.raises(ValueError):
            ndcg_time_aware([1], [], 1)


class TestPrCurve:
    def test_single_user_monotone_recall(self):
        ranked = {"u": [3, 1, 4, 1, 5, 9, 2, 6, 8, 7]}
        truth = {"u": [4, 9, 11]}
        points = pr_curve(ranked, truth, range(1, 11))
        assert len(points) == 10
        recalls = [r for _, r in points]
        assert all(b >= a for a, b in zip(recalls, recalls[1:]))

    def test_perfect_recommender_reaches_full_recall(self):
        truth = {"u": [5, 6, 7]}
        ranked = {"u": [5, 6, 7, 8, 9]}
        points = pr_curve(ranked, truth, [1, 2, 3])
        assert points[2][1] == pytest.approx(1.0)

    def test_random_recommender_matches_analytic_precision(self):
        rng = np.random.default_rng(11)
        m, k, users = 50, 5, 2000
        ranked, truth = {}, {}
        per_user_precision = {n: [] for n in (1, 5, 10)}
        for u in range(users):
            uid = f"u{u}"
            ranked[uid] = rng.permutation(m).tolist()
            truth[uid] = rng.choice(m, size=k, replace=False).tolist()
            for n in per_user_precision:
                p, _ = precision_recall_at(ranked[uid], truth[uid], n)
                per_user_precision[n].append(p)
        points = pr_curve(ranked, truth, [1, 5, 10])
        for (mean_p, _), n in zip(points, (1, 5, 10)):
            samples = np.array(per_user_precision[n])
            se = samples.std(ddof=1) / np.sqrt(users)
            assert abs(mean_p - k / m) <= 3 * se
            assert mean_p == pytest.approx(samples.mean())

    def test_rejects_missing_rankings(self):
        with pytest.raises(ValueError, match="no ranking"):
            pr_curve({}, {"u": [1]}, [1])

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            pr_curve({"u": [1]}, {"u": [1]}, [3, 2])
        with pytest.raises(ValueError):
            pr_curve({"u": [1]}, {"u": [1]}, [])


class TestAggregateCpd:
    def test_simple_mean(self):
        out = aggregate_cpd({"m": {"a": (40, 40), "b": (30, 20)}})
        assert out == {"m": 5.0}

    def test_rejects_mismatched_user_sets(self):
        with pytest.raises(ValueError, match="different user set"):
            aggregate_cpd({"m1": {"a": (1, 2)}, "m2": {"b": (1, 2)}})

    def test_matches_recount(self):
        rng = np.random.default_rng(13)
        users = [f"u{i}" for i in range(40)]
        per_method = {
            method: {u: (int(rng.integers(1, 80)), int(rng.integers(0, 80))) for u in users}
            for method in ("x", "y")
        }
        out = aggregate_cpd(per_method)
        for method in per_method:
            manual = np.mean(
                [abs(t - p) for t, p in per_method[method].values()]
            )
            assert out[method] == pytest.approx(manual)

    def test_user_order_invariant(self):
        fwd = {"m": {"a": (10, 0), "b": (20, 25), "c": (5, 5)}}
        rev = {"m": {"c": (5, 5), "b": (20, 25), "a": (10, 0)}}
        assert aggregate_cpd(fwd) == aggregate_cpd(rev)


class TestReportTypes:
    def test_metric_range_enforced(self):
        with pytest.raises(ValueError):
            MethodMetrics(precision_at={10: 1.5})
        with pytest.raises(ValueError):
            MethodMetrics(mean_delta=-1.0)
        with pytest.raises(ValueError):
            MethodMetrics(pr_points=[(0.5, 1.2)])

    def test_report_assembly(self):
        metrics = MethodMetrics(
            mean_delta=16.3,
            precision_at={10: 0.2},
            recall_at={10: 0.2},
            ndcg_at={10: 0.3},
            pr_points=[(0.2, 0.1)],
        )
        report = EvalReport(per_method={"m": metrics}, n_users=100, parameters={"seed": 1})
        assert report.per_method["m"].mean_delta == pytest.approx(16.3)
