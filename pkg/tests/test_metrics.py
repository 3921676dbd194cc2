"""Tests for consistency and segmentation metrics."""
from fractions import Fraction

import numpy as np
import pytest

from hiercloud.ensemble import hierarchical_ensemble
from hiercloud.errors import EmptyInputError, LevelError, ShapeError
from hiercloud.metrics import (
    ConsistencyStats,
    InstanceSet,
    LevelConfusion,
    accumulate,
    as_fraction,
    consistency_counts,
    consistency_proportion,
    consistency_rate,
    evaluate,
    mean_iou,
    overall_accuracy,
    per_class_iou,
    wcov,
)
from hiercloud.utilities import almostequal
from tests.conftest import random_distributions, random_labels


def brute_force_cp(hierarchy, y):
    best = max(sum(int(a == b) for a, b in zip(y, path)) for path in hierarchy.fc_paths())
    return Fraction(best, hierarchy.depth)


class TestConsistencyProportion:
    def test_fc_label_is_one(self, campus):
        # type: () -> None
        for path in campus.fc_paths():
            assert consistency_proportion(campus, path) == 1

    def test_roof_with_wrong_root(self, campus):
        # type: () -> None
        y = [1, 3, 5, 6, 10]  # ground, construction, construction, building, roof
        assert consistency_proportion(campus, y) == Fraction(4, 5)

    def test_single_level(self):
        # type: () -> None
        from hiercloud.hierarchy import parse_hierarchy

        h = parse_hierarchy("levels 1\nlevel 1: a,b,c\n")
        assert consistency_proportion(h, [2]) == 1

    def test_matches_brute_force(self, random_trees):
        # type: () -> None
        rng = np.random.default_rng(1)
        n_checked = 0
        for h in random_trees:
            ys = random_labels(rng, h, 350)
            counts = consistency_counts(h, ys)
            for y, k in zip(ys, counts):
                assert Fraction(int(k), h.depth) == brute_force_cp(h, y)
                n_checked += 1
        assert n_checked >= 10000

    def test_one_iff_consistent(self, random_trees):
        # type: () -> None
        rng = np.random.default_rng(2)
        for h in random_trees:
            ys = random_labels(rng, h, 100)
            for y in ys:
                assert (consistency_proportion(h, y) == 1) == h.is_fully_consistent(y)


class TestConsistencyRate:
    def test_three_labels(self, campus):
        # type: () -> None
        roof = campus.paths[10]
        ys = np.array([roof, [1, 3, 5, 6, 10], campus.paths[3]])
        assert almostequal(consistency_rate(campus, ys, 1.0), 2 / 3.0, places=12)

    def test_alpha_zero(self, campus):
        # type: () -> None
        ys = random_labels(np.random.default_rng(4), campus, 50)
        assert consistency_rate(campus, ys, 0) == 1.0

    def test_he_output(self, campus):
        # type: () -> None
        dists = random_distributions(np.random.default_rng(5), campus, 200)
        assert consistency_rate(campus, hierarchical_ensemble(campus, dists), 1.0) == 1.0

    def test_monotone_in_alpha(self, random_trees):
        # type: () -> None
        rng = np.random.default_rng(6)
        alphas = ["0", "0.2", "0.4", "0.6", "0.8", "1"]
        for h in random_trees:
            stats = ConsistencyStats(h.depth).update(h, random_labels(rng, h, 200))
            rates = [stats.cr(a) for a in alphas]
            assert rates == sorted(rates, reverse=True)
            assert rates[0] == 1.0

    def test_alpha_is_exact(self):
        # type: () -> None
        assert as_fraction(0.8) == Fraction(4, 5)
        assert as_fraction("0.2") == Fraction(1, 5)
        with pytest.raises(ValueError):
            as_fraction(1.5)

    def test_eighty_percent_threshold(self, campus):
        # type: () -> None
        # CP 4/5 passes alpha 0.8 even though 0.8 is not exactly 4/5 as a double
        ys = np.array([[1, 3, 5, 6, 10]])
        assert consistency_rate(campus, ys, 0.8) == 1.0

    def test_empty(self, campus):
        # type: () -> None
        with pytest.raises(EmptyInputError):
            consistency_rate(campus, np.zeros((0, 5), dtype=int))

    def test_ignored_ground_truth_left_out(self, campus):
        # type: () -> None
        ys = np.array([[1, 3, 5, 6, 10], campus.paths[10]])
        gt = np.array([campus.paths[0], campus.paths[10]])
        assert consistency_rate(campus, ys, 1.0, gt=gt) == 1.0

    def test_histogram_and_merge(self, campus):
        # type: () -> None
        ys = np.array([[1, 3, 5, 6, 10], campus.paths[10], campus.paths[2]])
        a = ConsistencyStats(5).update(campus, ys[:1])
        b = ConsistencyStats(5).update(campus, ys[1:])
        merged = a.merge(b)
        assert merged.histogram.tolist() == [0, 0, 0, 0, 1, 2]
        assert merged.proportions == [Fraction(4, 5), 1, 1]
        with pytest.raises(ShapeError):
            a.merge(ConsistencyStats(4))


class TestFixture:
    """The twelve-point fixture, computed by hand."""

    def test_level_2(self, small_hier, metric_labels):
        # type: () -> None
        gt, pred = metric_labels
        conf = LevelConfusion.from_labels(gt[:, 1], pred[:, 1], 3, level=2)
        assert conf.matrix.tolist() == [[3, 1, 0], [1, 2, 0], [1, 1, 3]]
        assert almostequal(overall_accuracy(conf), 2 / 3.0, places=12)
        assert almostequal(per_class_iou(conf), [0.5, 0.4, 0.6], places=12)
        assert almostequal(mean_iou(conf), 0.5, places=12)

    def test_level_1(self, small_hier, metric_labels):
        # type: () -> None
        gt, pred = metric_labels
        conf = LevelConfusion.from_labels(gt[:, 0], pred[:, 0], 2, level=1)
        assert conf.matrix.tolist() == [[6, 1], [1, 4]]
        assert almostequal(overall_accuracy(conf), 5 / 6.0, places=12)
        assert almostequal(per_class_iou(conf), [0.75, 2 / 3.0], places=12)
        assert almostequal(mean_iou(conf), 17 / 24.0, places=12)

    def test_consistency(self, small_hier, metric_labels):
        # type: () -> None
        _, pred = metric_labels
        assert almostequal(consistency_rate(small_hier, pred, 1.0), 10 / 12.0, places=12)
        assert consistency_rate(small_hier, pred, 0.5) == 1.0

    def test_evaluate(self, small_hier, metric_labels):
        # type: () -> None
        gt, pred = metric_labels
        report = evaluate(small_hier, gt, {"M": pred}, alphas=[1.0, 0.5])
        assert almostequal(report.oa[("M", 1)], 5 / 6.0, places=12)
        assert almostequal(report.miou[("M", 2)], 0.5, places=12)
        assert almostequal(report.cr[("M", 1.0)], 10 / 12.0, places=12)
        assert report.cr[("M", 0.5)] == 1.0
        assert report.histograms["M"] == [0, 2, 10]


class TestConfusion:
    def test_small_cases(self):
        # type: () -> None
        conf = LevelConfusion.from_labels([0, 1, 1], [0, 1, 0], 2)
        assert almostequal(overall_accuracy(conf), 2 / 3.0)
        perfect = LevelConfusion.from_labels([0, 1, 2], [0, 1, 2], 4)
        assert overall_accuracy(perfect) == 1.0
        iou = per_class_iou(perfect)
        assert iou[:3].tolist() == [1.0, 1.0, 1.0]
        assert np.isnan(iou[3])
        assert mean_iou(perfect) == 1.0

    def test_iou_of_overlapping_sets(self):
        # type: () -> None
        # pred {p1, p2}, gt {p2, p3}
        conf = LevelConfusion.from_labels([1, 0, 0], [0, 0, 1], 2)
        assert almostequal(per_class_iou(conf)[0], 1 / 3.0)

    def test_mean_over_classes(self):
        # type: () -> None
        conf = LevelConfusion.from_labels([1, 0, 0, 2], [0, 0, 1, 2], 3)
        iou = per_class_iou(conf)
        assert almostequal(iou, [1 / 3.0, 0.0, 1.0])
        assert almostequal(mean_iou(conf), 4 / 9.0)

    def test_ignore_class(self):
        # type: () -> None
        conf = LevelConfusion.from_labels([0, 0, 1, 2], [1, 0, 1, 0], 3, ignore_index=0)
        assert conf.ignored == 2
        assert conf.total + conf.ignored == 4
        assert overall_accuracy(conf) == 0.5
        assert np.isnan(per_class_iou(conf)[0])

    def test_all_ignored(self):
        # type: () -> None
        conf = LevelConfusion.from_labels([0, 0], [1, 0], 2, ignore_index=0)
        with pytest.raises(EmptyInputError):
            overall_accuracy(conf)
        with pytest.raises(EmptyInputError):
            mean_iou(conf)

    def test_oracles(self):
        # type: () -> None
        rng = np.random.default_rng(7)
        gt = rng.integers(6, size=1000)
        pred = rng.integers(6, size=1000)
        conf = LevelConfusion.from_labels(gt, pred, 6)
        assert almostequal(overall_accuracy(conf), sum(int(g == p) for g, p in zip(gt, pred)) / 1000.0)
        gt, pred = gt[:500], pred[:500]
        conf = LevelConfusion.from_labels(gt, pred, 6)
        for c, value in enumerate(per_class_iou(conf)):
            gt_set = {i for i in range(500) if gt[i] == c}
            pred_set = {i for i in range(500) if pred[i] == c}
            assert almostequal(value, len(gt_set & pred_set) / float(len(gt_set | pred_set)))

    def test_merge_is_chunk_independent(self):
        # type: () -> None
        rng = np.random.default_rng(8)
        gt, pred = rng.integers(4, size=300), rng.integers(4, size=300)
        whole = LevelConfusion.from_labels(gt, pred, 4, ignore_index=0)
        parts = LevelConfusion.from_labels(gt[:100], pred[:100], 4, ignore_index=0).merge(
            LevelConfusion.from_labels(gt[100:], pred[100:], 4, ignore_index=0)
        )
        assert np.array_equal(whole.matrix, parts.matrix)
        assert whole.ignored == parts.ignored


class TestWCov:
    def test_fixture(self):
        # type: () -> None
        gt = InstanceSet([0, 0, 0, 1, -1, -1])
        pred = InstanceSet([0, 0, -1, -1, 0, -1])
        assert almostequal(wcov(gt, pred), 0.375, places=12)

    def test_identical(self):
        # type: () -> None
        ids = [0, 0, 1, 1, 1, 2, -1]
        assert wcov(InstanceSet(ids), InstanceSet(ids)) == 1.0

    def test_disjoint(self):
        # type: () -> None
        assert wcov(InstanceSet([0, 0, -1, -1]), InstanceSet([-1, -1, 3, 3])) == 0.0

    def test_empty_prediction(self):
        # type: () -> None
        assert wcov(InstanceSet([0, 1]), InstanceSet([-1, -1])) == 0.0

    def test_no_ground_truth(self):
        # type: () -> None
        with pytest.raises(EmptyInputError):
            wcov(InstanceSet([-1, -1]), InstanceSet([0, 0]))

    def test_for_class(self):
        # type: () -> None
        restricted = InstanceSet.for_class([0, 0, 1, 2], [3, 3, 4, 3], 3)
        assert restricted.ids.tolist() == [0, 0, -1, 2]
        assert restricted.n_instances == 2


class TestEvaluate:
    def test_thread_count_does_not_matter(self, campus):
        # type: () -> None
        rng = np.random.default_rng(9)
        gt = campus.paths[rng.integers(campus.widths[-1], size=5000)]
        pred = random_labels(rng, campus, 5000)
        one = evaluate(campus, gt, {"MC": pred}, threads=1, chunk_size=700)
        many = evaluate(campus, gt, {"MC": pred}, threads=4, chunk_size=700)
        assert one.to_text() == many.to_text()

    def test_accumulate_counts_all_points(self, campus):
        # type: () -> None
        rng = np.random.default_rng(10)
        gt = campus.paths[rng.integers(campus.widths[-1], size=1000)]
        confusions, stats = accumulate(campus, gt, gt, threads=2, chunk_size=128)
        for conf in confusions:
            assert conf.total + conf.ignored == 1000
        assert len(stats) == confusions[0].total

    def test_wcov(self, small_hier):
        # type: () -> None
        gt = small_hier.paths[[0, 0, 0, 0, 2, 2]]
        gt_ids = np.array([0, 0, 0, 1, 5, 5])
        pred_ids = np.array([7, 7, -1, -1, 5, 5])
        report = evaluate(small_hier, gt, {"M": gt}, gt_instances=gt_ids, pred_instances=pred_ids, wcov_level=2)
        assert almostequal(report.wcov[("M", 2, 0)], 0.5, places=12)
        assert report.wcov[("M", 2, 2)] == 1.0
        assert ("M", 2, 1) not in report.wcov

    def test_wcov_level_defaults_to_leaves_of_shallow_tree(self, small_hier):
        # type: () -> None
        gt = small_hier.paths[[0, 0, 2, 2]]
        ids = np.array([0, 0, 1, 1])
        report = evaluate(small_hier, gt, {"M": gt}, gt_instances=ids, pred_instances=ids)
        assert sorted(report.wcov) == [("M", 2, 0), ("M", 2, 2)]
        for level in [0, 3, -1]:
            with pytest.raises(LevelError):
                evaluate(small_hier, gt, {"M": gt}, gt_instances=ids, pred_instances=ids, wcov_level=level)

    def test_self_evaluation_is_perfect(self, campus):
        # type: () -> None
        rng = np.random.default_rng(11)
        gt = campus.paths[rng.integers(1, campus.widths[-1], size=2000)]
        report = evaluate(campus, gt, {"GT": gt})
        for level in range(1, 6):
            assert report.oa[("GT", level)] == 1.0
            assert report.miou[("GT", level)] == 1.0
        assert report.cr[("GT", 1.0)] == 1.0
