"""Always-on acceptance gate.

One test per external guarantee of the package, at the stated tolerance;
`pytest -v tests/test_acceptance.py` prints one pass/fail line for each.
The real-dataset reproduction needs the field recordings on disk and is
gated behind URANUS_NATO_ROOT; everything else runs from scratch on any
machine. Nothing here may loosen a threshold to get green: a failure
means the package no longer does what it promises.
"""

import bisect
import json
import math
import os
import pathlib
import time

import numpy as np
import pytest

from uranus import cli, ingest, pipeline, prep, rfanalysis, synth
from uranus.forest import (
    RandomForestRegressor,
    load_model,
    save_model,
)
from uranus.metrics import accuracy, mae, mse, precision_recall_f1, r2, roc_auc


def test_metric_kernels_match_hand_oracles():
    """MAE/MSE/R2, accuracy/precision/recall/F1, and AUC against values
    computed by hand on paper, at 1e-9, in under a second."""
    start = time.perf_counter()
    y, yhat = [1.0, 2.0, 3.0], [2.0, 2.0, 2.0]
    assert mae(y, yhat) == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert mse(y, yhat) == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert r2(y, yhat) == pytest.approx(0.0, abs=1e-9)
    # TP=3, TN=2, FP=1, FN=0
    truth = ["d", "d", "d", "n", "n", "n"]
    pred = ["d", "d", "d", "n", "n", "d"]
    assert accuracy(truth, pred) == pytest.approx(5.0 / 6.0, abs=1e-9)
    p, r, f1, flags = precision_recall_f1(tp=3, fp=1, fn=0)
    assert p == pytest.approx(0.75, abs=1e-9)
    assert r == pytest.approx(1.0, abs=1e-9)
    assert f1 == pytest.approx(6.0 / 7.0, abs=1e-9)
    assert not flags
    # 2 positives vs 2 negatives, 3 of 4 pairs concordant
    assert roc_auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]) == pytest.approx(0.75, abs=1e-9)
    assert time.perf_counter() - start < 1.0


def test_silhouette_matches_hand_oracle():
    """[0,1,9,10] split {0,1}/{9,10}: per-point scores are 17/19 and 15/17,
    the mean is 0.8886 to 1e-4."""
    res = prep.silhouette([0.0, 1.0, 9.0, 10.0], [0, 0, 1, 1])
    hand = [17.0 / 19.0, 15.0 / 17.0, 15.0 / 17.0, 17.0 / 19.0]
    assert res.s.tolist() == pytest.approx(hand, abs=1e-12)
    assert res.mean == pytest.approx(0.8886, abs=1e-4)


def test_iqr_matches_hand_oracle():
    """[1..9, 100]: fences exactly [-3.5, 14.5], 100 the only outlier."""
    values = np.array([1, 2, 3, 4, 5, 6, 7, 8, 9, 100], dtype=np.float64)
    fences, retained, outlier_idx = prep.iqr_filter(values)
    assert fences.lower == -3.5
    assert fences.upper == 14.5
    assert values[outlier_idx].tolist() == [100.0]
    assert retained.tolist() == list(range(1, 10))


def test_anova_matches_hand_oracle():
    """Groups [1,2,3] vs [4,5,6]: F = 13.5 within 1e-9."""
    score = prep.anova_f([1, 2, 3, 4, 5, 6], ["a", "a", "a", "b", "b", "b"])
    assert score.f == pytest.approx(13.5, abs=1e-9)


# Reference metrics measured on the original field campaign, per scenario
# (columns: 1.1, 1.2, 1.3, 1.4, 2.1, 2.2, 3).
NATO_SCENARIO_KEYS = ("1.1", "1.2", "1.3", "1.4", "2.1", "2.2", "3")
NATO_REFERENCE_R2 = {
    "latitude": (0.9800, 0.8820, 0.8460, 0.9460, 0.8540, 0.9420, 0.7060),
    "longitude": (0.9800, 0.8760, 0.8440, 0.7460, 0.8400, 0.9420, 0.6980),
    "speed": (0.7900, 0.8700, 0.8680, 0.8480, 0.8460, 0.8920, 0.5760),
    "altitude": (0.8400, 0.8320, 0.8920, 0.9320, 0.9800, 0.8800, 0.8880),
}
NATO_REFERENCE_ACCURACY = 0.934


def _find_scenario_dir(root: pathlib.Path, key: str):
    for name in (f"Scenario {key}", f"Scenario_{key}", f"S{key}", key):
        if (root / name).is_dir():
            return root / name
    return None


def _paired_by_nearest_time(estimates, truth, tolerance_ms=1000):
    times = [rec.t for rec in truth]
    pairs = []
    for est in estimates:
        i = bisect.bisect_left(times, est.t)
        best = None
        for j in (i - 1, i):
            if 0 <= j < len(times):
                dt = abs(times[j] - est.t)
                if best is None or dt < best[0]:
                    best = (dt, truth[j])
        if best is not None and best[0] <= tolerance_ms:
            pairs.append((est, best[1]))
    return pairs


@pytest.mark.skipif(
    not os.environ.get("URANUS_NATO_ROOT"),
    reason="URANUS_NATO_ROOT not set; the field recordings are an external download",
)
def test_real_dataset_reproduction(tmp_path):
    """Field-recording reproduction: per-scenario regression R2 within 0.05
    of the reference table and pooled classification accuracy within 3
    percentage points of 93.4%.

    URANUS_NATO_ROOT must hold one directory per scenario (named like
    "Scenario 1.1", "S1.1", or "1.1") in the ingest CSV layout, each with
    a drone log; truth rows are matched to estimates by nearest timestamp
    within one second.
    """
    root = pathlib.Path(os.environ["URANUS_NATO_ROOT"])
    found = {key: _find_scenario_dir(root, key) for key in NATO_SCENARIO_KEYS}
    missing = sorted(k for k, v in found.items() if v is None)
    assert not missing, f"dataset at {root} is missing scenarios: {missing}"

    config = pipeline.PipelineConfig(
        data_root=str(root),
        scenarios=tuple(found[k].name for k in NATO_SCENARIO_KEYS),
        seed=42,
    )
    bundle, _ = pipeline.train(config)

    correct = total = 0
    failures = []
    for key in NATO_SCENARIO_KEYS:
        estimates = pipeline.predict(bundle, found[key])
        truth = ingest.load_scenario(found[key]).drone_log
        pairs = _paired_by_nearest_time(estimates, truth)
        assert pairs, f"scenario {key}: no estimate matched a truth row"
        pulls = {
            "latitude": (lambda e: e.latitude, lambda r: r.position.lat_deg),
            "longitude": (lambda e: e.longitude, lambda r: r.position.lon_deg),
            "speed": (lambda e: e.speed, lambda r: r.speed_mps),
            "altitude": (
                lambda e: e.altitude,
                lambda r: r.position.alt_m if r.position.alt_m is not None else 0.0,
            ),
        }
        for target, reference in NATO_REFERENCE_R2.items():
            pull_est, pull_rec = pulls[target]
            got = r2([pull_rec(rec) for _, rec in pairs], [pull_est(est) for est, _ in pairs])
            want = reference[NATO_SCENARIO_KEYS.index(key)]
            if abs(got - want) > 0.05:
                failures.append(f"{key}/{target}: R2 {got:.4f} vs reference {want:.4f}")
        correct += sum(est.drone_type == rec.type.value for est, rec in pairs)
        total += len(pairs)
    assert not failures, "; ".join(failures)
    assert abs(correct / total - NATO_REFERENCE_ACCURACY) <= 0.03


def test_synthetic_surrogate_cv_quality(tmp_path):
    """Always-runnable stand-in for the field recordings: train on all nine
    synthetic scenarios (seed 42, default noise), 5-fold CV. Accuracy at
    least 0.85, every tracking R2 at least 0.70, latitude/longitude MAE at
    most 0.002 degrees, total under five minutes."""
    start = time.perf_counter()
    root = tmp_path / "scenarios"
    for pid in synth.PATTERN_IDS:
        synth.emit_scenario(root / pid, pid, seed=42)
    config = pipeline.PipelineConfig(
        data_root=str(root), scenarios=synth.PATTERN_IDS, seed=42, cv_folds=5
    )
    bundle, _ = pipeline.train(config)

    cv = {target: bundle.cv[target]["mean"] for target in pipeline.ALL_TARGETS}
    assert cv["drone_type"]["accuracy"] >= 0.85
    for target in pipeline.REGRESSION_TARGETS:
        assert cv[target]["r2"] >= 0.70, f"{target}: CV R2 {cv[target]['r2']:.4f}"
    assert cv["latitude"]["mae"] <= 0.002
    assert cv["longitude"]["mae"] <= 0.002
    assert time.perf_counter() - start < 300.0


def test_train_and_predict_are_bit_deterministic(tmp_path):
    """Two CLI train runs from one config produce byte-identical bundles;
    two predict runs produce byte-identical prediction files."""
    root = tmp_path / "data"
    for pid in ("S1.3", "S2.2"):
        synth.emit_scenario(root / pid, pid, seed=7)
    config = tmp_path / "config.json"
    config.write_text(json.dumps({
        "data_root": str(root),
        "scenarios": ["S1.3", "S2.2"],
        "seed": 11,
        "forest": {"n_trees": 6},
        "cv_folds": 2,
    }))
    for run in ("one", "two"):
        assert cli.main(["train", "--config", str(config),
                         "--out", str(tmp_path / run)]) == 0
        assert cli.main(["predict", "--model", str(tmp_path / run),
                         "--scenario", str(root / "S1.3"),
                         "--out", str(tmp_path / f"pred-{run}.csv")]) == 0
    names = sorted(p.name for p in (tmp_path / "one").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "two").iterdir())
    for name in names:
        assert (tmp_path / "one" / name).read_bytes() == \
            (tmp_path / "two" / name).read_bytes(), f"bundle file differs: {name}"
    assert (tmp_path / "pred-one.csv").read_bytes() == (tmp_path / "pred-two.csv").read_bytes()


def test_forest_property_suite(tmp_path):
    """Range-bounded regression output on 1,000 random queries; serial and
    parallel training agree exactly; save/load round-trips bit-exact."""
    rng = np.random.Generator(np.random.PCG64(17))
    x = rng.uniform(-3.0, 3.0, size=(300, 4))
    y = 2.0 * x[:, 0] - 1.5 * x[:, 1] + 0.3 * np.sin(x[:, 2]) + rng.normal(scale=0.1, size=300)

    serial = RandomForestRegressor(n_trees=12, seed=5, n_jobs=1)
    serial.fit(x, y)
    queries = rng.uniform(-6.0, 6.0, size=(1000, 4))  # reaches outside training support
    preds = serial.predict(queries)
    assert np.all(preds >= y.min()) and np.all(preds <= y.max())

    parallel = RandomForestRegressor(n_trees=12, seed=5, n_jobs=4)
    parallel.fit(x, y)
    assert serial.trees_ == parallel.trees_
    assert np.array_equal(preds, parallel.predict(queries))

    path = tmp_path / "model.urns"
    save_model(serial, path)
    loaded = load_model(path)
    assert loaded.trees_ == serial.trees_
    assert np.array_equal(loaded.predict(queries), preds)


def test_separated_blob_clustering():
    """Three well-separated Gaussian blobs (centers 25 sigma apart): k-means
    recovers them with purity at least 0.99 and mean silhouette at least 0.9."""
    rng = np.random.Generator(np.random.PCG64(9))
    d = 25.0  # centers pairwise 25 sigma apart (sigma = 1)
    points = np.concatenate([
        rng.normal((0.0, 0.0), 1.0, size=(120, 2)),
        rng.normal((d, 0.0), 1.0, size=(120, 2)),
        rng.normal((d / 2.0, d * math.sqrt(3.0) / 2.0), 1.0, size=(120, 2)),
    ])
    truth = np.repeat([0, 1, 2], 120)
    labels, _ = prep.kmeans(points, 3, seed=4)
    purity = sum(
        np.bincount(truth[labels == c]).max() for c in range(3)
    ) / len(points)
    assert purity >= 0.99
    assert prep.silhouette(points, labels).mean >= 0.9


def test_rcs_recovery_and_parrot_channel_lock(tmp_path):
    """A 10,000-sample Normal(-14.05, 2) draw is refit to within 0.1 dBsm,
    and the Parrot Disco's synthetic RF emissions sit on one channel:
    PMF exactly {2440.0: 1.0}."""
    rng = np.random.Generator(np.random.PCG64(3))
    samples = rng.normal(-14.05, 2.0, size=10_000)
    model = rfanalysis.fit_rcs(samples, drone_type="DJI Mavic Pro")
    assert model.mean_dbsm == pytest.approx(-14.05, abs=0.1)

    synth.emit_scenario(tmp_path / "S3", "S3", seed=6)
    profile = rfanalysis.scenario_rf_profile(ingest.load_scenario(tmp_path / "S3"))
    like = rfanalysis.freq_likelihood(profile["freq"]["Parrot Disco"], "Parrot Disco")
    assert like.pmf == {2440.0: 1.0}
    assert like.mode_probability == 1.0
