import math

import pytest

import unitask


def test_projection_values():
    assert unitask.microtask_time(32, 14) == pytest.approx(1.5, abs=1e-12)
    assert unitask.unitask_time([1.0] * 14) == pytest.approx(16 / 14, abs=1e-12)
    assert unitask.microtask_hetero_time(64, 8, 8, 1.5) == pytest.approx(1.25, abs=1e-12)


def test_synthetic_is_deterministic():
    x1, y1 = unitask.generate_synthetic(n=50, d=4, seed=9)
    x2, y2 = unitask.generate_synthetic(n=50, d=4, seed=9)
    assert x1 == x2 and y1 == y2
    assert len(x1) == 50 and all(len(row) == 4 for row in x1)
    assert set(y1) <= {-1.0, 1.0}


def test_train_and_metrics_roundtrip(tmp_path):
    config = {
        "algorithm": "cocoa",
        "dataset": {"synthetic": {"n": 400, "d": 5, "seed": 2}},
        "chunk_capacity_bytes": 2048,
        "trainer": {"target": 1e-3, "max_epochs": 200, "seed": 3},
        "scenario": {"total_work": 16, "nodes": 4},
        "output": str(tmp_path / "run.csv"),
    }
    records = unitask.train(config, write_csv=True)
    assert records and records[-1]["metric"] <= 1e-3
    assert all(math.isfinite(r["virtual_time"]) for r in records)
    rows = unitask.read_metrics(tmp_path / "run.csv")
    assert len(rows) == sum(len(r["worker_ids"]) for r in records)
    assert (tmp_path / "run.csv.json").exists()


def test_bad_config_raises():
    with pytest.raises(unitask.UnitaskError):
        unitask.train({"algorithm": "cocoa", "bogus": 1})
