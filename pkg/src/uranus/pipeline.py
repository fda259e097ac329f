"""End-to-end orchestration: train five per-target models, persist them as
a bundle, predict tracks for new scenarios, and report accuracy.

Training runs the preparation stages in a fixed order -- data analysis,
interquartile outlier removal on the 3D radar, clustering on the 2D radar
plots, time fusion, per-target feature scoring, then five forest fits --
and any failure aborts with the stage name attached. Preprocessing
parameters learned from training data (outlier fences, encodings, selected
features) are frozen into the bundle; prediction re-applies them verbatim
and never re-derives them from test data.

Everything is deterministic for a fixed config seed: per-target model
seeds and fold seeds are spawned from it, no stage reads the clock, and
bundles serialize through canonical JSON, so retraining on unchanged
inputs rewrites byte-identical artifacts.
"""

import hashlib
import json
import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import forest, ingest, metrics, prep
from .core import (
    DRONE_CLASS_ORDER,
    ConfigError,
    DataError,
    ModelError,
    ScenarioIncompleteError,
    UranusError,
)

BUNDLE_VERSION = 1
REGRESSION_TARGETS = metrics.REGRESSION_TARGETS
ALL_TARGETS = REGRESSION_TARGETS + (metrics.CLASS_TARGET,)
CLASS_NAMES = tuple(dt.value for dt in DRONE_CLASS_ORDER)

# Columns eligible for outlier fencing, per sensor.
_FENCE_COLUMNS = {
    "Alvira": ("lat_deg", "lon_deg", "rcs_dbsm"),
    "Arcus": ("lat_deg", "lon_deg", "alt_m", "rcs_dbsm"),
}

# Mean silhouette below which a k-way split of the 2D radar plots is
# treated as structureless and no clutter removal happens.
SILHOUETTE_GATE = 0.5

_DEFAULT_FOREST = {
    "n_trees": 30,
    "max_depth": None,
    "min_samples_leaf": None,
    "max_features": None,
}

_FOREST_KEYS = {"n_trees", "max_depth", "min_samples_leaf", "max_features", "n_jobs", "bootstrap"}

_CONFIG_KEYS = {
    "data_root",
    "scenarios",
    "tolerance_ms",
    "iqr_sensors",
    "kmeans_k",
    "anova_top_k",
    "shared_features",
    "forest",
    "forest_per_target",
    "cv_folds",
    "seed",
    "out_dir",
}


@dataclass(frozen=True)
class PipelineConfig:
    """Validated training configuration. The seed is mandatory: nothing in
    the pipeline may fall back to wall-clock entropy."""

    data_root: str
    scenarios: tuple
    seed: int
    tolerance_ms: int = ingest.DEFAULT_TOLERANCE_MS
    iqr_sensors: tuple = ("Arcus",)
    kmeans_k: int = 2
    anova_top_k: int = 10
    shared_features: bool = False
    forest: dict = field(default_factory=dict)
    forest_per_target: dict = field(default_factory=dict)
    cv_folds: int = 5
    out_dir: str | None = None

    def __post_init__(self):
        if not self.scenarios:
            raise ConfigError("config lists no scenarios")
        if self.tolerance_ms < 0:
            raise ConfigError(f"negative tolerance: {self.tolerance_ms}")
        if self.kmeans_k < 1:
            raise ConfigError(f"kmeans_k must be at least 1, got {self.kmeans_k}")
        if self.anova_top_k < 1:
            raise ConfigError(f"anova_top_k must be at least 1, got {self.anova_top_k}")
        if self.cv_folds < 2:
            raise ConfigError(f"cv_folds must be at least 2, got {self.cv_folds}")
        for sensor in self.iqr_sensors:
            if sensor not in _FENCE_COLUMNS:
                raise ConfigError(f"no fence columns defined for sensor {sensor!r}")
        unknown = set(self.forest_per_target) - set(ALL_TARGETS)
        if unknown:
            raise ConfigError(f"forest_per_target for unknown targets: {sorted(unknown)}")
        bad = set(self.forest) - _FOREST_KEYS
        if bad:
            raise ConfigError(f"unknown forest parameters: {sorted(bad)}")
        for target, params in self.forest_per_target.items():
            bad = set(params) - _FOREST_KEYS
            if bad:
                raise ConfigError(f"unknown forest parameters for {target}: {sorted(bad)}")

    def forest_params(self, target: str) -> dict:
        params = dict(_DEFAULT_FOREST)
        params.update(self.forest)
        params.update(self.forest_per_target.get(target, {}))
        return params

    def to_dict(self) -> dict:
        return {
            "data_root": self.data_root,
            "scenarios": list(self.scenarios),
            "seed": self.seed,
            "tolerance_ms": self.tolerance_ms,
            "iqr_sensors": list(self.iqr_sensors),
            "kmeans_k": self.kmeans_k,
            "anova_top_k": self.anova_top_k,
            "shared_features": self.shared_features,
            "forest": dict(self.forest),
            "forest_per_target": {k: dict(v) for k, v in self.forest_per_target.items()},
            "cv_folds": self.cv_folds,
        }


def load_config(path) -> PipelineConfig:
    """Parse and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("data_root", "scenarios", "seed"):
        if key not in raw:
            raise ConfigError(f"config is missing required key {key!r}")
    if not isinstance(raw["seed"], int) or isinstance(raw["seed"], bool):
        raise ConfigError("seed must be an integer")
    base = os.path.dirname(os.path.abspath(path))
    data_root = raw["data_root"]
    if not os.path.isabs(data_root):
        data_root = os.path.normpath(os.path.join(base, data_root))
    if not os.path.isdir(data_root):
        raise ConfigError(f"data root does not exist: {data_root}")
    cfg = PipelineConfig(
        data_root=data_root,
        scenarios=tuple(raw["scenarios"]),
        seed=raw["seed"],
        tolerance_ms=raw.get("tolerance_ms", ingest.DEFAULT_TOLERANCE_MS),
        iqr_sensors=tuple(raw.get("iqr_sensors", ("Arcus",))),
        kmeans_k=raw.get("kmeans_k", 2),
        anova_top_k=raw.get("anova_top_k", 10),
        shared_features=raw.get("shared_features", False),
        forest=dict(raw.get("forest", {})),
        forest_per_target={k: dict(v) for k, v in raw.get("forest_per_target", {}).items()},
        cv_folds=raw.get("cv_folds", 5),
        out_dir=raw.get("out_dir"),
    )
    for name in cfg.scenarios:
        if not os.path.isdir(os.path.join(cfg.data_root, name)):
            raise ConfigError(f"scenario directory not found: {name}")
    return cfg


@dataclass
class ModelBundle:
    """Five fitted models plus everything needed to reapply preprocessing."""

    models: dict
    features: dict
    fences: dict
    encodings: dict
    config: dict
    cv: dict
    seed: int
    inputs_digest: str
    version: int = BUNDLE_VERSION

    def __post_init__(self):
        if set(self.models) != set(ALL_TARGETS):
            raise ModelError(f"bundle must hold exactly {len(ALL_TARGETS)} models")
        if set(self.features) != set(ALL_TARGETS):
            raise ModelError("bundle must hold one feature list per target")
        for target, names in self.features.items():
            missing = [n for n in names if n not in ingest.FUSED_COLUMNS]
            if missing:
                raise ModelError(f"{target} selects unknown features: {missing}")


class _Stage:
    """Context manager that prefixes any pipeline error with the stage name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, UranusError):
            raise type(exc)(f"stage {self.name}: {exc}") from None
        return False


def _reading_value(r, col: str) -> float:
    if col in ("lat_deg", "lon_deg", "alt_m"):
        if r.position is None:
            return np.nan
        v = getattr(r.position, col)
    else:
        v = getattr(r, col)
    return np.nan if v is None else float(v)


def _sensor_matrix(readings, sensor: str, columns=None):
    if columns is None:
        columns = _FENCE_COLUMNS[sensor]
    rows = [[_reading_value(r, col) for col in columns] for r in readings]
    return columns, np.array(rows, dtype=np.float64).reshape(len(rows), len(columns))


def fit_fence_table(scenarios, iqr_sensors) -> dict:
    """Tukey fences per (sensor, column) over all training scenarios pooled."""
    table: dict = {}
    for sensor in iqr_sensors:
        pooled = [r for sc in scenarios for r in sc.sensors.get(sensor, [])]
        if not pooled:
            continue
        columns, matrix = _sensor_matrix(pooled, sensor)
        table[sensor] = {}
        for j, col in enumerate(columns):
            try:
                table[sensor][col] = prep.fit_fences(matrix[:, j])
            except DataError:
                continue  # not enough finite values to fence this column
    return table


def apply_fences(scenario, fence_table) -> ingest.Scenario:
    """Drop readings that fall outside any frozen fence. NaN passes."""
    sensors = dict(scenario.sensors)
    for sensor, fences in fence_table.items():
        readings = sensors.get(sensor)
        if not readings:
            continue
        columns, matrix = _sensor_matrix(readings, sensor)
        keep = np.ones(len(readings), dtype=bool)
        for j, col in enumerate(columns):
            if col not in fences:
                continue
            v = matrix[:, j]
            finite = np.isfinite(v)
            bad = finite & ((v < fences[col].lower) | (v > fences[col].upper))
            keep &= ~bad
        sensors[sensor] = [r for r, k in zip(readings, keep) if k]
    return replace(scenario, sensors=sensors)


def isolate_drone_cluster(scenario, k: int, seed: int, use_truth: bool) -> ingest.Scenario:
    """Cluster the 2D radar plots and drop the clusters that are not the drone.

    Two guards keep clean captures intact. A split whose mean silhouette
    falls below the gate is treated as structureless and nothing is removed.
    Past the gate, every cluster is tested independently -- by truth
    proximity when a log exists, by net displacement rate otherwise -- and
    only failing clusters go; a partition that merely cuts the flight track
    in half finds all parts qualifying and removes nothing. No qualifying
    cluster at all means the capture has no recognizable drone track.
    """
    readings = scenario.sensors.get("Alvira")
    if not readings:
        return scenario
    located = [r for r in readings if r.position is not None]
    unlocated = [r for r in readings if r.position is None]
    k_eff = min(k, len(located))
    if k_eff < 2:
        return scenario
    points = np.array(
        [[r.position.lat_deg, r.position.lon_deg] for r in located], dtype=np.float64
    )
    labels, _ = prep.kmeans(points, k_eff, seed=seed)
    if len(set(labels.tolist())) < 2:
        return scenario
    if prep.silhouette(points, labels).mean < SILHOUETTE_GATE:
        return scenario
    truth = scenario.drone_log if use_truth else None
    keep_ids = set(prep.qualifying_drone_clusters(located, labels, truth))
    if not keep_ids:
        raise DataError("no drone cluster")
    kept = [r for r, lab in zip(located, labels) if int(lab) in keep_ids]
    sensors = dict(scenario.sensors)
    # Positionless rows cannot be clustered; they ride along untouched.
    sensors["Alvira"] = sorted(kept + unlocated, key=lambda r: r.t)
    return replace(scenario, sensors=sensors)


def _concat_frames(frames) -> ingest.FusedFrame:
    X = np.vstack([f.X for f in frames])
    anchors = np.concatenate([f.anchors_ms for f in frames])
    contributors = [c for f in frames for c in f.contributors]
    targets: dict = {}
    for key in REGRESSION_TARGETS:
        targets[key] = np.concatenate([f.targets[key] for f in frames])
    targets["drone_type"] = [t for f in frames for t in f.targets["drone_type"]]
    return ingest.FusedFrame(
        columns=frames[0].columns,
        X=X,
        anchors_ms=anchors,
        contributors=contributors,
        targets=targets,
    )


def rank_features(frame, top_k: int, shared: bool) -> tuple[dict, dict]:
    """Per-target feature selection by univariate F scores.

    Features too sparse to score (fewer than 3 finite values in a class
    layout the statistic needs) count as F = 0 rather than failing the
    stage. Shared mode ranks by the best F a feature achieves across
    targets and gives every target that one list.
    """
    scores: dict = {target: [] for target in ALL_TARGETS}
    for target in ALL_TARGETS:
        y = frame.targets[target]
        for j, name in enumerate(frame.columns):
            try:
                score = prep.anova_f(frame.X[:, j], y, feature=name, target=target)
            except DataError:
                score = prep.AnovaScore(feature=name, f=0.0, df=(0, 0), target=target)
            scores[target].append(score)
    if shared:
        best: dict = {}
        for target in ALL_TARGETS:
            for sc in scores[target]:
                if sc.feature not in best or sc.f > best[sc.feature].f:
                    best[sc.feature] = sc
        shared_list = prep.select_features(list(best.values()), k=top_k)
        features = {target: list(shared_list) for target in ALL_TARGETS}
    else:
        features = {
            target: prep.select_features(scores[target], k=top_k) for target in ALL_TARGETS
        }
    return features, scores


def _column_matrix(frame, names):
    idx = [list(frame.columns).index(n) for n in names]
    return frame.X[:, idx]


def _inputs_digest(config: PipelineConfig, scenarios) -> str:
    h = hashlib.sha256()
    h.update(forest.canonical_json_bytes(config.to_dict()))
    for sc in scenarios:
        for entry in sorted(os.listdir(sc.path)):
            full = os.path.join(sc.path, entry)
            if os.path.isfile(full):
                h.update(entry.encode())
                with open(full, "rb") as fh:
                    h.update(fh.read())
    return h.hexdigest()


def train(config: PipelineConfig):
    """Run the full training pipeline; returns (bundle, reports).

    reports carries the per-scenario missingness audit and the fused-frame
    audit alongside cross-validation metrics per target.
    """
    with _Stage("ingest"):
        scenarios = []
        for name in config.scenarios:
            sc = ingest.load_scenario(os.path.join(config.data_root, name))
            if sc.drone_log is None:
                raise ScenarioIncompleteError(f"scenario incomplete: {name} has no drone log")
            scenarios.append(sc)
        digest = _inputs_digest(config, scenarios)

    with _Stage("data-analysis"):
        missing: dict = {"scenarios": {}}
        for sc in scenarios:
            per_sensor = {}
            for sensor in sorted(sc.sensors):
                fields = ingest._SENSOR_FILE_COLUMNS[sensor][1:]  # all but timestamp
                columns, matrix = _sensor_matrix(sc.sensors[sensor], sensor, columns=fields)
                if matrix.shape[0] == 0:
                    continue
                report = prep.missing_report(_RawFrame(columns, matrix))
                per_sensor[sensor] = report.to_dict()
            missing["scenarios"][sc.name] = per_sensor

    with _Stage("iqr"):
        fences = fit_fence_table(scenarios, config.iqr_sensors)
        scenarios = [apply_fences(sc, fences) for sc in scenarios]

    with _Stage("kmeans"):
        seeds = np.random.SeedSequence(config.seed).spawn(len(scenarios) + len(ALL_TARGETS) + 1)
        scenarios = [
            isolate_drone_cluster(
                sc, config.kmeans_k, int(seeds[i].generate_state(1)[0]), use_truth=True
            )
            for i, sc in enumerate(scenarios)
        ]

    with _Stage("merge"):
        frames = [ingest.fuse(sc, config.tolerance_ms) for sc in scenarios]
        frames = [f for f in frames if f.X.shape[0] > 0]
        if not frames:
            raise DataError("no rows survived fusion")
        frame = _concat_frames(frames)
        missing["fused"] = prep.missing_report(frame).to_dict()

    with _Stage("anova"):
        features, _ = rank_features(frame, config.anova_top_k, config.shared_features)

    with _Stage("fit"):
        models: dict = {}
        cv: dict = {}
        target_seeds = seeds[len(scenarios) : len(scenarios) + len(ALL_TARGETS)]
        cv_seed = int(seeds[-1].generate_state(1)[0])
        for target, sseq in zip(ALL_TARGETS, target_seeds):
            params = config.forest_params(target)
            model_seed = int(sseq.generate_state(1)[0])
            x = _column_matrix(frame, features[target])
            if target == "drone_type":
                y = frame.targets[target]

                def factory(s, _p=params):
                    return forest.RandomForestClassifier(
                        seed=s, class_order=CLASS_NAMES, target_name="drone_type", **_p
                    )

            else:
                y = frame.targets[target]

                def factory(s, _p=params, _t=target):
                    return forest.RandomForestRegressor(seed=s, target_name=_t, **_p)

            result = forest.cross_validate(factory, x, y, k=config.cv_folds, seed=cv_seed)
            cv[target] = {"folds": result["folds"], "mean": result["mean"]}
            model = factory(model_seed)
            model.fit(x, y, feature_names=features[target])
            models[target] = model

    bundle = ModelBundle(
        models=models,
        features=features,
        fences={
            sensor: {col: f.to_dict() for col, f in cols.items()}
            for sensor, cols in fences.items()
        },
        encodings={},
        config=config.to_dict(),
        cv=cv,
        seed=config.seed,
        inputs_digest=digest,
    )
    return bundle, {"missing": missing}


class _RawFrame:
    """Adapter giving raw sensor matrices the frame face prep expects."""

    def __init__(self, columns, X):
        self.columns = tuple(columns)
        self.X = X


def save_bundle(bundle: ModelBundle, out_dir, extra_reports=None) -> str:
    """Write the bundle directory; on failure nothing partial survives."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    try:
        for target in ALL_TARGETS:
            path = os.path.join(out_dir, f"{target}.urns")
            forest.save_model(bundle.models[target], path)
            written.append(path)
        manifest = {
            "version": bundle.version,
            "seed": bundle.seed,
            "inputs_digest": bundle.inputs_digest,
            "targets": {t: f"{t}.urns" for t in ALL_TARGETS},
            "features": {t: list(bundle.features[t]) for t in ALL_TARGETS},
            "fences": bundle.fences,
            "encodings": bundle.encodings,
            "config": bundle.config,
            "cv": bundle.cv,
        }
        path = os.path.join(out_dir, "bundle.json")
        with open(path, "wb") as fh:
            fh.write(forest.canonical_json_bytes(manifest))
        written.append(path)
        if extra_reports and "missing" in extra_reports:
            path = os.path.join(out_dir, "missing_report.json")
            with open(path, "wb") as fh:
                fh.write(forest.canonical_json_bytes(extra_reports["missing"]))
            written.append(path)
    except Exception:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise
    return str(out_dir)


def load_bundle(path) -> ModelBundle:
    manifest_path = os.path.join(path, "bundle.json")
    if not os.path.isfile(manifest_path):
        raise ModelError(f"not a model bundle: {path}")
    try:
        with open(manifest_path, "rb") as fh:
            manifest = json.loads(fh.read().decode("ascii"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelError(f"corrupt bundle manifest: {e}") from None
    if manifest.get("version") != BUNDLE_VERSION:
        raise ModelError(f"unsupported bundle version {manifest.get('version')}")
    models = {}
    for target, fname in manifest["targets"].items():
        models[target] = forest.load_model(os.path.join(path, fname))
    return ModelBundle(
        models=models,
        features={t: list(v) for t, v in manifest["features"].items()},
        fences=manifest["fences"],
        encodings=manifest.get("encodings", {}),
        config=manifest["config"],
        cv=manifest["cv"],
        seed=manifest["seed"],
        inputs_digest=manifest["inputs_digest"],
    )


def _slug(name: str) -> str:
    return "".join(c.lower() if c.isalnum() else "_" for c in name)


VOTE_COLUMNS = tuple(f"vote_{_slug(c)}" for c in CLASS_NAMES)


@dataclass(frozen=True)
class TrackEstimate:
    """One predicted state: where the drone is, how it moves, what it is."""

    t: int
    sensors: tuple
    latitude: float
    longitude: float
    speed: float
    altitude: float
    drone_type: str
    confidence: float
    votes: tuple  # fraction per class, Table order


def predict(bundle: ModelBundle, scenario_dir, tolerance_ms=None) -> list:
    """Track estimates for one scenario directory, one row per fused anchor.

    Applies the frozen preprocessing (fences, then clustering with the
    moving-target heuristic -- truth logs are never consulted at predict
    time), fuses, and runs the five models. An empty fused frame returns
    an empty list with a warning rather than failing.
    """
    scenario = ingest.load_scenario(scenario_dir)
    config = bundle.config
    if tolerance_ms is None:
        tolerance_ms = config.get("tolerance_ms", ingest.DEFAULT_TOLERANCE_MS)
    fence_table = {
        sensor: {col: prep.IqrFences.from_dict(d) for col, d in cols.items()}
        for sensor, cols in bundle.fences.items()
    }
    scenario = apply_fences(scenario, fence_table)
    scenario = isolate_drone_cluster(
        scenario,
        config.get("kmeans_k", 2),
        seed=bundle.seed,
        use_truth=False,
    )
    frame = ingest.fuse(scenario, tolerance_ms)
    if frame.X.shape[0] == 0:
        warnings.warn("no rows survived fusion; nothing to predict", stacklevel=2)
        return []
    preds = {}
    for target in REGRESSION_TARGETS:
        model = bundle.models[target]
        preds[target] = model.predict(_column_matrix(frame, model.feature_names_))
    clf = bundle.models["drone_type"]
    proba = clf.predict_proba(_column_matrix(frame, clf.feature_names_))
    picks = np.argmax(proba, axis=1)
    estimates = []
    for i in range(frame.X.shape[0]):
        votes = tuple(float(v) for v in proba[i])
        estimates.append(
            TrackEstimate(
                t=int(frame.anchors_ms[i]),
                sensors=tuple(sorted(frame.contributors[i])),
                latitude=float(preds["latitude"][i]),
                longitude=float(preds["longitude"][i]),
                speed=float(preds["speed"][i]),
                altitude=float(preds["altitude"][i]),
                drone_type=clf.classes_[int(picks[i])],
                confidence=float(proba[i, picks[i]]),
                votes=votes,
            )
        )
    return estimates


_PREDICTION_HEADER = (
    "timestamp",
    "sensors",
    "latitude",
    "longitude",
    "speed",
    "altitude",
    "drone_type",
    "confidence",
) + VOTE_COLUMNS


def write_predictions(path, estimates) -> None:
    """Delimited output, one row per estimate, stable float formatting."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_PREDICTION_HEADER)
        for est in estimates:
            writer.writerow(
                [
                    est.t,
                    ";".join(est.sensors),
                    repr(est.latitude),
                    repr(est.longitude),
                    repr(est.speed),
                    repr(est.altitude),
                    est.drone_type,
                    repr(est.confidence),
                ]
                + [repr(v) for v in est.votes]
            )


def read_predictions(path) -> list:
    import csv

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != _PREDICTION_HEADER:
            raise DataError(f"{path}: not a prediction file")
        out = []
        for row in reader:
            if len(row) != len(_PREDICTION_HEADER):
                raise DataError(f"{path}: malformed row {row!r}")
            out.append(
                TrackEstimate(
                    t=int(row[0]),
                    sensors=tuple(s for s in row[1].split(";") if s),
                    latitude=float(row[2]),
                    longitude=float(row[3]),
                    speed=float(row[4]),
                    altitude=float(row[5]),
                    drone_type=row[6],
                    confidence=float(row[7]),
                    votes=tuple(float(v) for v in row[8:]),
                )
            )
    return out


def report(estimates, truth=None) -> dict:
    """Metric suite against truth, or descriptive statistics without it.

    truth is a list of DroneLogRecord; rows pair by exact timestamp and
    every estimate must find its truth row (and vice versa), otherwise the
    lengths disagree and that is an error.
    """
    if not estimates:
        return {"n_rows": 0, "regression": {}, "classification": None}
    if truth is None:
        speeds = [e.speed for e in estimates]
        alts = [e.altitude for e in estimates]
        dist: dict = {}
        for e in estimates:
            dist[e.drone_type] = dist.get(e.drone_type, 0) + 1
        return {
            "n_rows": len(estimates),
            "t_start": min(e.t for e in estimates),
            "t_end": max(e.t for e in estimates),
            "speed": {"min": min(speeds), "max": max(speeds), "mean": sum(speeds) / len(speeds)},
            "altitude": {"min": min(alts), "max": max(alts), "mean": sum(alts) / len(alts)},
            "class_distribution": dict(sorted(dist.items())),
            "classification": None,
            "regression": {},
        }
    by_t = {}
    for rec in truth:
        if rec.t in by_t:
            raise DataError(f"duplicate truth timestamp {rec.t}")
        by_t[rec.t] = rec
    if len(by_t) != len(estimates):
        raise DataError(
            f"length mismatch: {len(estimates)} predictions vs {len(by_t)} truth rows"
        )
    pairs = []
    for est in estimates:
        rec = by_t.get(est.t)
        if rec is None:
            raise DataError(f"prediction timestamp {est.t} has no truth row")
        pairs.append((est, rec))
    out: dict = {"n_rows": len(pairs), "regression": {}}
    pulls = {
        "latitude": lambda est, rec: (est.latitude, rec.position.lat_deg),
        "longitude": lambda est, rec: (est.longitude, rec.position.lon_deg),
        "speed": lambda est, rec: (est.speed, rec.speed_mps),
        "altitude": lambda est, rec: (est.altitude, rec.position.alt_m or 0.0),
    }
    for target, pull in pulls.items():
        pred = [pull(est, rec)[0] for est, rec in pairs]
        true = [pull(est, rec)[1] for est, rec in pairs]
        out["regression"][target] = metrics.regression_report(true, pred)
    truth_labels = [rec.type.value for _, rec in pairs]
    pred_labels = [est.drone_type for est, _ in pairs]
    cls = metrics.classification_report(truth_labels, pred_labels, CLASS_NAMES)
    roc_per_class: dict = {}
    for i, name in enumerate(CLASS_NAMES):
        binary = [1.0 if lab == name else 0.0 for lab in truth_labels]
        scores = [est.votes[i] for est, _ in pairs]
        try:
            roc_per_class[name] = metrics.roc(scores, binary).to_dict()
        except DataError:
            roc_per_class[name] = {"auc": None, "flags": ["class-absent"]}
    cls["roc"] = roc_per_class
    out["classification"] = cls
    return out


def render_report(rep: dict) -> str:
    """Plain-text summary of a report dict, fit for a terminal."""
    lines = [f"rows: {rep['n_rows']}"]
    if rep.get("regression"):
        lines.append("")
        lines.append(f"{'target':<12} {'mae':>12} {'mse':>14} {'r2':>8}")
        for target, m in rep["regression"].items():
            r2s = "undef" if m["r2"] is None else f"{m['r2']:.4f}"
            lines.append(f"{target:<12} {m['mae']:>12.6f} {m['mse']:>14.8f} {r2s:>8}")
    cls = rep.get("classification")
    if cls:
        lines.append("")
        lines.append(f"accuracy: {cls['accuracy']:.4f}")
        lines.append(f"{'class':<20} {'prec':>7} {'rec':>7} {'f1':>7} {'auc':>7} {'n':>5}")
        for name, m in cls["per_class"].items():
            auc = cls["roc"].get(name, {}).get("auc")
            auc_s = "n/a" if auc is None else f"{auc:.4f}"
            lines.append(
                f"{name:<20} {m['precision']:>7.4f} {m['recall']:>7.4f} "
                f"{m['f1']:>7.4f} {auc_s:>7} {m['support']:>5}"
            )
    if rep.get("class_distribution"):
        lines.append("")
        for name, count in rep["class_distribution"].items():
            lines.append(f"{name:<20} {count:>5}")
    return "\n".join(lines) + "\n"
