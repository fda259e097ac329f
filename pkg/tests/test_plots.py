"""Figure renderers: every function must leave a real PNG on disk."""

import pytest

from uranus import ingest, pipeline, plots, rfanalysis, synth
from uranus.core import SENSOR_ORDER, SENSORS

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@pytest.fixture(scope="module")
def rendered_inputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("plotdata")
    synth.emit_scenario(root / "S1.3", "S1.3", seed=7)
    synth.emit_scenario(root / "S2.1", "S2.1", seed=7)
    config = pipeline.PipelineConfig(
        data_root=str(root),
        scenarios=("S1.3", "S2.1"),
        seed=3,
        forest={"n_trees": 6},
        cv_folds=2,
    )
    bundle, _ = pipeline.train(config)
    estimates = pipeline.predict(bundle, root / "S1.3")
    truth = ingest.load_scenario(root / "S1.3").drone_log
    summary = pipeline.report(estimates, truth=truth)
    profile = rfanalysis.scenario_rf_profile(ingest.load_scenario(root / "S2.1"))
    return estimates, truth, summary, profile


def _assert_png(path):
    data = path.read_bytes()
    assert data.startswith(PNG_MAGIC)
    assert len(data) > 1_000


def test_track_figure(rendered_inputs, tmp_path):
    estimates, truth, _, _ = rendered_inputs
    out = plots.save_track_figure(tmp_path / "track.png", estimates, truth=truth)
    _assert_png(tmp_path / "track.png")
    assert out == str(tmp_path / "track.png")


def test_track_figure_without_truth(rendered_inputs, tmp_path):
    estimates, _, _, _ = rendered_inputs
    plots.save_track_figure(tmp_path / "track.png", estimates)
    _assert_png(tmp_path / "track.png")


def test_regression_figure(rendered_inputs, tmp_path):
    estimates, truth, _, _ = rendered_inputs
    plots.save_regression_figure(tmp_path / "reg.png", estimates, truth)
    _assert_png(tmp_path / "reg.png")


def test_confusion_figure(rendered_inputs, tmp_path):
    _, _, summary, _ = rendered_inputs
    plots.save_confusion_figure(tmp_path / "conf.png", summary["classification"])
    _assert_png(tmp_path / "conf.png")


def test_rcs_figure(rendered_inputs, tmp_path):
    _, _, _, profile = rendered_inputs
    models = [
        rfanalysis.fit_rcs(samples, drone_type=name)
        for name, samples in sorted(profile["rcs"].items())
    ]
    plots.save_rcs_figure(tmp_path / "rcs.png", models)
    _assert_png(tmp_path / "rcs.png")


def test_freq_figure(rendered_inputs, tmp_path):
    _, _, _, profile = rendered_inputs
    likes = [
        rfanalysis.freq_likelihood(samples, drone_type=name)
        for name, samples in sorted(profile["freq"].items())
    ]
    plots.save_freq_figure(tmp_path / "freq.png", likes)
    _assert_png(tmp_path / "freq.png")


def test_distance_figure(rendered_inputs, tmp_path):
    _, _, _, profile = rendered_inputs
    name, track = sorted(profile["tracks"].items())[0]
    series = [rfanalysis.distance_series(track, SENSORS[s]) for s in SENSOR_ORDER]
    plots.save_distance_figure(tmp_path / "dist.png", series, title=name)
    _assert_png(tmp_path / "dist.png")
