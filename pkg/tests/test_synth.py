"""Tests for synthetic ground truth and predictions."""
import numpy as np
import pytest

from hiercloud.ensemble import hierarchical_ensemble, mc_decision
from hiercloud.hierarchy import parse_hierarchy
from hiercloud.metrics import InstanceSet, consistency_rate, wcov
from hiercloud.synth import SynthSpec, gen_ground_truth, gen_predictions, simulate_direction


def test_ground_truth_is_consistent(campus):
    # type: () -> None
    spec = SynthSpec(campus, n_points=3000, label_noise=0.2, seed=1)
    pc = gen_ground_truth(spec)
    labels = pc.hier_labels(campus)
    assert len(pc) == 3000
    assert consistency_rate(campus, labels, 1.0) == 1.0
    assert not (pc.leaf_labels() == campus.ignore_index(5)).any()
    assert pc.instance is None
    assert (pc.xyz[:, :2] <= 100.0).all() and (pc.xyz[:, 2] <= 20.0).all()


def test_noise_free_predictions_decode_to_truth(campus):
    # type: () -> None
    spec = SynthSpec(campus, n_points=2000, noise=0.0, seed=2)
    gt = gen_ground_truth(spec).hier_labels(campus)
    dists = gen_predictions(spec, gt)
    labels = mc_decision(campus, dists)
    assert np.array_equal(labels, gt)
    assert consistency_rate(campus, labels, 1.0) == 1.0


def test_default_remainder_is_uniform(campus):
    # type: () -> None
    spec = SynthSpec(campus, n_points=200, inconsistency_rate=0.5, seed=9)
    gt = gen_ground_truth(spec).hier_labels(campus)
    dists = gen_predictions(spec, gt)
    for p in dists.levels:
        top = p.argmax(axis=1)
        for row, target in zip(p, top):
            rest = np.delete(row, target)
            assert np.allclose(rest, rest[0], rtol=0, atol=1e-15)
            assert row[target] > rest[0]
        assert np.allclose(p.sum(axis=1), 1.0, rtol=0, atol=1e-9)


def test_sharp_predictions_recover_truth(campus):
    # type: () -> None
    spec = SynthSpec(campus, n_points=2000, sharpness=1e6, seed=3)
    gt = gen_ground_truth(spec).hier_labels(campus)
    assert np.array_equal(mc_decision(campus, gen_predictions(spec, gt)), gt)


def test_blobs_are_instances():
    # type: () -> None
    h = parse_hierarchy("levels 1\nlevel 1: a,b,c,d,e\n")
    spec = SynthSpec(h, n_points=500, geometry="clustered", blobs_per_class=1, seed=4)
    pc = gen_ground_truth(spec)
    assert len(np.unique(pc.instance)) == 5
    # every blob holds a single class
    for blob in range(5):
        assert len(np.unique(pc.leaf_labels()[pc.instance == blob])) == 1
    assert wcov(InstanceSet(pc.instance), InstanceSet(pc.instance)) == 1.0


def test_threads_and_chunks_do_not_matter(campus):
    # type: () -> None
    spec = SynthSpec(campus, n_points=5000, geometry="clustered", inconsistency_rate=0.3, seed=5)
    one = gen_ground_truth(spec, threads=1, chunk_size=1000)
    many = gen_ground_truth(spec, threads=4, chunk_size=1000)
    assert one == many
    gt = one.hier_labels(campus)
    a = gen_predictions(spec, gt, threads=1, chunk_size=1000)
    b = gen_predictions(spec, gt, threads=4, chunk_size=1000)
    for p, q in zip(a.levels, b.levels):
        assert np.array_equal(p, q)


def test_seed_changes_output(campus):
    # type: () -> None
    spec = SynthSpec(campus, n_points=100, seed=6)
    assert gen_ground_truth(spec) == gen_ground_truth(spec)
    assert gen_ground_truth(spec) != gen_ground_truth(spec.with_seed(7))


def test_full_inconsistency(campus):
    # type: () -> None
    spec = SynthSpec(campus, n_points=4000, inconsistency_rate=1.0, seed=8)
    gt = gen_ground_truth(spec).hier_labels(campus)
    dists = gen_predictions(spec, gt)
    assert consistency_rate(campus, mc_decision(campus, dists), 1.0) < 0.5
    assert consistency_rate(campus, hierarchical_ensemble(campus, dists), 1.0) == 1.0


def test_simulate_direction(campus):
    # type: () -> None
    spec = SynthSpec(campus, n_points=2000, inconsistency_rate=0.3)
    rows = simulate_direction(spec, seeds=range(20))
    assert [row["seed"] for row in rows] == list(range(20))
    for row in rows:
        assert row["cr_he"] == 1.0
        assert row["cr_mc"] < 1.0
        assert len(row["oa_delta"]) == 5
    table = rows[0]["report"].to_table()
    assert "CR_1" in table
    assert "HE" in table.splitlines()[0]


def test_empty(campus):
    # type: () -> None
    spec = SynthSpec(campus, n_points=0)
    pc = gen_ground_truth(spec)
    assert len(pc) == 0
    assert gen_predictions(spec, pc.hier_labels(campus)).n_points == 0


def test_spec_validation(campus):
    # type: () -> None
    for kwargs in [
        {"geometry": "grid"},
        {"label_noise": 1.5},
        {"inconsistency_rate": -0.1},
        {"sharpness": 0.0},
        {"noise": -1.0},
        {"blobs_per_class": 0},
    ]:
        with pytest.raises(ValueError):
            SynthSpec(campus, **kwargs)
