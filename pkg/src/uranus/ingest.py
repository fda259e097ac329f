"""Scenario loading: delimited sensor/flight logs in, fused feature rows out.

A scenario is a directory holding one CSV per sensor (Alvira, Arcus, Diana,
Venus) and, for recorded flights, a drone_log.csv with ground truth. Column
headers are matched through an alias table so exports with slightly
different spellings load unchanged; values are validated against the sensor
contracts on the way in.
"""

import csv
import datetime as _dt
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .core import (
    SENSOR_ORDER,
    SENSORS,
    DataError,
    DroneLogRecord,
    GeoPosition,
    ScenarioIncompleteError,
    SchemaViolationError,
    SensorKind,
    SensorReading,
    parse_drone_type,
    reading_sort_key,
    validate_reading,
)

DEFAULT_TOLERANCE_MS = 1000

# Fused feature layout: sensors alphabetical, fields in fixed order per sensor.
FUSED_COLUMNS = (
    "alvira.lat_deg",
    "alvira.lon_deg",
    "alvira.rcs_dbsm",
    "arcus.lat_deg",
    "arcus.lon_deg",
    "arcus.alt_m",
    "arcus.rcs_dbsm",
    "diana.bearing_deg",
    "diana.rss_dbm",
    "diana.freq_mhz",
    "venus.bearing_deg",
    "venus.rss_dbm",
    "venus.freq_mhz",
)

TARGET_COLUMNS = ("latitude", "longitude", "speed", "altitude")

_SENSOR_FILE_COLUMNS = {
    "Alvira": ("timestamp", "lat_deg", "lon_deg", "rcs_dbsm"),
    "Arcus": ("timestamp", "lat_deg", "lon_deg", "alt_m", "rcs_dbsm"),
    "Diana": ("timestamp", "bearing_deg", "rss_dbm", "freq_mhz"),
    "Venus": ("timestamp", "bearing_deg", "rss_dbm", "freq_mhz"),
}

_DRONE_LOG_COLUMNS = ("timestamp", "latitude", "longitude", "speed", "altitude", "drone_type")

_HEADER_ALIASES = {
    "timestamp": {"timestamp", "time", "utc_time", "datetime", "date_time", "datetime_utc"},
    "lat_deg": {"lat_deg", "lat", "latitude", "latitude_deg"},
    "lon_deg": {"lon_deg", "lon", "lng", "longitude", "longitude_deg"},
    "alt_m": {"alt_m", "alt", "altitude", "altitude_m", "height", "height_m"},
    "rcs_dbsm": {"rcs_dbsm", "rcs", "rcs_db", "reflection"},
    "bearing_deg": {"bearing_deg", "bearing", "azimuth", "aoa", "doa", "angle_of_arrival"},
    "rss_dbm": {"rss_dbm", "rss", "rssi", "signal_strength", "power_dbm"},
    "freq_mhz": {"freq_mhz", "freq", "frequency", "frequency_mhz", "channel_mhz"},
    "latitude": {"latitude", "lat", "lat_deg"},
    "longitude": {"longitude", "lon", "lng", "lon_deg"},
    "speed": {"speed", "speed_mps", "ground_speed", "velocity"},
    "altitude": {"altitude", "alt", "alt_m", "height"},
    "drone_type": {"drone_type", "type", "model", "drone", "drone_model"},
    "drone_id": {"drone_id", "id", "track_id", "target_id"},
}


def _normalize_header(name: str) -> str:
    # "Alt (m)" -> "alt", "UTC Time" -> "utc_time".
    s = re.sub(r"\(.*?\)", "", name).strip().lower()
    return re.sub(r"[\s\-/]+", "_", s).strip("_")


def _map_headers(found: list[str], wanted: tuple[str, ...], path) -> dict[str, int]:
    out: dict[str, int] = {}
    normalized = [_normalize_header(h) for h in found]
    for canon in wanted:
        aliases = _HEADER_ALIASES.get(canon, {canon})
        hits = [i for i, h in enumerate(normalized) if h in aliases]
        if len(hits) > 1:
            raise SchemaViolationError(f"{path}: ambiguous column for {canon!r}")
        if hits:
            out[canon] = hits[0]
    return out


def parse_timestamp_ms(raw: str) -> int:
    """Epoch milliseconds from either an integer string or an ISO-8601 UTC time."""
    s = raw.strip()
    if re.fullmatch(r"-?\d+", s):
        return int(s)
    for sep in (" ", "T"):
        for fmt in (f"%Y-%m-%d{sep}%H:%M:%S.%f", f"%Y-%m-%d{sep}%H:%M:%S"):
            try:
                dt = _dt.datetime.strptime(s, fmt).replace(tzinfo=_dt.timezone.utc)
            except ValueError:
                continue
            return int(round(dt.timestamp() * 1000))
    raise SchemaViolationError(f"unparseable timestamp: {raw!r}")


def _parse_float(raw: str, path, line: int, col: str) -> float | None:
    s = raw.strip()
    if s == "":
        return None
    try:
        return float(s)
    except ValueError:
        raise SchemaViolationError(f"{path}:{line}: bad number in {col}: {raw!r}") from None


def read_sensor_csv(path, sensor: str) -> list[SensorReading]:
    """Load one sensor's log, validate every row, return readings sorted."""
    if sensor not in _SENSOR_FILE_COLUMNS:
        raise DataError(f"unknown sensor {sensor!r}")
    wanted = _SENSOR_FILE_COLUMNS[sensor]
    kind = SENSORS[sensor].kind
    readings = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaViolationError(f"{path}: empty file") from None
        cols = _map_headers(header, wanted, path)
        missing = [c for c in wanted if c not in cols]
        if missing:
            raise SchemaViolationError(f"{path}: missing columns {missing}")
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            get = lambda c: row[cols[c]] if cols[c] < len(row) else ""
            t = parse_timestamp_ms(get("timestamp"))
            if kind is SensorKind.RF_DF:
                reading = SensorReading(
                    t=t,
                    sensor=sensor,
                    bearing_deg=_parse_float(get("bearing_deg"), path, line, "bearing_deg"),
                    rss_dbm=_parse_float(get("rss_dbm"), path, line, "rss_dbm"),
                    freq_mhz=_parse_float(get("freq_mhz"), path, line, "freq_mhz"),
                )
            else:
                lat = _parse_float(get("lat_deg"), path, line, "lat_deg")
                lon = _parse_float(get("lon_deg"), path, line, "lon_deg")
                alt = None
                if "alt_m" in cols:
                    alt = _parse_float(get("alt_m"), path, line, "alt_m")
                if (lat is None) != (lon is None):
                    raise SchemaViolationError(f"{path}:{line}: half-missing position")
                pos = None
                if lat is not None:
                    try:
                        pos = GeoPosition(lat, lon, alt)
                    except ValueError as e:
                        raise SchemaViolationError(f"{path}:{line}: {e}") from None
                reading = SensorReading(
                    t=t,
                    sensor=sensor,
                    rcs_dbsm=_parse_float(get("rcs_dbsm"), path, line, "rcs_dbsm"),
                    position=pos,
                )
            problems = validate_reading(reading)
            if problems:
                raise SchemaViolationError(f"{path}:{line}: {'; '.join(problems)}")
            readings.append(reading)
    readings.sort(key=reading_sort_key)
    return readings


def write_sensor_csv(path, sensor: str, readings) -> None:
    """Write the canonical layout; floats use repr so reload is value-exact."""
    wanted = _SENSOR_FILE_COLUMNS[sensor]
    kind = SENSORS[sensor].kind
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(wanted)
        for r in sorted(readings, key=reading_sort_key):
            if kind is SensorKind.RF_DF:
                row = [r.t, _fmt(r.bearing_deg), _fmt(r.rss_dbm), _fmt(r.freq_mhz)]
            elif sensor == "Arcus":
                p = r.position
                row = [
                    r.t,
                    _fmt(p.lat_deg if p else None),
                    _fmt(p.lon_deg if p else None),
                    _fmt(p.alt_m if p else None),
                    _fmt(r.rcs_dbsm),
                ]
            else:
                p = r.position
                row = [
                    r.t,
                    _fmt(p.lat_deg if p else None),
                    _fmt(p.lon_deg if p else None),
                    _fmt(r.rcs_dbsm),
                ]
            w.writerow(row)


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def read_drone_log(path) -> list[DroneLogRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaViolationError(f"{path}: empty file") from None
        cols = _map_headers(header, _DRONE_LOG_COLUMNS, path)
        missing = [c for c in _DRONE_LOG_COLUMNS if c not in cols]
        if missing:
            raise SchemaViolationError(f"{path}: missing columns {missing}")
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            get = lambda c: row[cols[c]] if cols[c] < len(row) else ""
            vals = {}
            for c in ("latitude", "longitude", "speed", "altitude"):
                v = _parse_float(get(c), path, line, c)
                if v is None:
                    raise SchemaViolationError(f"{path}:{line}: missing {c}")
                vals[c] = v
            if vals["speed"] < 0.0:
                raise SchemaViolationError(f"{path}:{line}: negative speed")
            try:
                pos = GeoPosition(vals["latitude"], vals["longitude"], vals["altitude"])
                dtype = parse_drone_type(get("drone_type"))
            except (ValueError, DataError) as e:
                raise SchemaViolationError(f"{path}:{line}: {e}") from None
            records.append(
                DroneLogRecord(
                    t=parse_timestamp_ms(get("timestamp")),
                    position=pos,
                    speed_mps=vals["speed"],
                    type=dtype,
                )
            )
    records.sort(key=lambda r: (r.t, r.type.value, r.position.lat_deg, r.position.lon_deg))
    return records


def write_drone_log(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_DRONE_LOG_COLUMNS)
        ordered = sorted(
            records, key=lambda r: (r.t, r.type.value, r.position.lat_deg, r.position.lon_deg)
        )
        for r in ordered:
            w.writerow(
                [
                    r.t,
                    repr(float(r.position.lat_deg)),
                    repr(float(r.position.lon_deg)),
                    repr(float(r.speed_mps)),
                    repr(float(r.position.alt_m)),
                    r.type.value,
                ]
            )


@dataclass
class Scenario:
    name: str
    path: str
    sensors: dict[str, list[SensorReading]] = field(default_factory=dict)
    drone_log: list[DroneLogRecord] | None = None


def load_scenario(path) -> Scenario:
    """Read every recognized log in a scenario directory.

    At least one sensor file must be present; the drone log is optional
    (live captures have none).
    """
    if not os.path.isdir(path):
        raise DataError(f"not a scenario directory: {path}")
    entries = {e.lower(): e for e in sorted(os.listdir(path))}
    sensors: dict[str, list[SensorReading]] = {}
    for sensor in SENSOR_ORDER:
        fname = entries.get(f"{sensor.lower()}.csv")
        if fname:
            sensors[sensor] = read_sensor_csv(os.path.join(path, fname), sensor)
    if not sensors:
        raise ScenarioIncompleteError(f"{path}: no sensor files found")
    drone_log = None
    log_name = entries.get("drone_log.csv")
    if log_name:
        drone_log = read_drone_log(os.path.join(path, log_name))
    return Scenario(
        name=os.path.basename(os.path.normpath(path)),
        path=str(path),
        sensors=sensors,
        drone_log=drone_log,
    )


def discover_scenarios(root) -> list[str]:
    """Subdirectories of root that contain at least one sensor CSV, sorted."""
    if not os.path.isdir(root):
        raise DataError(f"not a directory: {root}")
    out = []
    for entry in sorted(os.listdir(root)):
        full = os.path.join(root, entry)
        if not os.path.isdir(full):
            continue
        files = {f.lower() for f in os.listdir(full)}
        if any(f"{s.lower()}.csv" in files for s in SENSOR_ORDER):
            out.append(full)
    return out


@dataclass
class FusedFrame:
    """Time-aligned feature rows: one row per anchor that matched a sensor.

    X columns follow FUSED_COLUMNS with NaN where a sensor had no reading
    within tolerance. contributors[i] maps sensor name to the source reading
    timestamp that filled row i. targets is None when no ground truth exists.
    """

    columns: tuple
    X: np.ndarray
    anchors_ms: np.ndarray
    contributors: list[dict[str, int]]
    targets: dict | None = None


def _reading_features(sensor: str, r: SensorReading) -> dict[str, float]:
    key = sensor.lower()
    if SENSORS[sensor].kind is SensorKind.RF_DF:
        return {
            f"{key}.bearing_deg": r.bearing_deg,
            f"{key}.rss_dbm": r.rss_dbm,
            f"{key}.freq_mhz": r.freq_mhz,
        }
    out = {
        f"{key}.lat_deg": r.position.lat_deg if r.position else None,
        f"{key}.lon_deg": r.position.lon_deg if r.position else None,
        f"{key}.rcs_dbsm": r.rcs_dbsm,
    }
    if sensor == "Arcus":
        out[f"{key}.alt_m"] = r.position.alt_m if r.position else None
    return out


def fuse(scenario: Scenario, tolerance_ms: int = DEFAULT_TOLERANCE_MS) -> FusedFrame:
    """Nearest-within-tolerance join of sensor streams onto anchor times.

    Anchors are the drone-log rows when ground truth exists, else the union
    of sensor timestamps. Per anchor and sensor, the reading minimizing
    |dt| wins, an exact tie going to the earlier reading. Anchors that match
    no sensor at all are dropped, so the output never has more rows than
    anchors. Input row order never matters: streams are re-sorted by a total
    key before matching.
    """
    if tolerance_ms < 0:
        raise DataError(f"negative tolerance: {tolerance_ms}")
    per_sensor: dict[str, list[SensorReading]] = {}
    for sensor, readings in scenario.sensors.items():
        per_sensor[sensor] = sorted(readings, key=reading_sort_key)
    if scenario.drone_log is not None:
        anchor_rows = sorted(
            scenario.drone_log,
            key=lambda r: (r.t, r.type.value, r.position.lat_deg, r.position.lon_deg),
        )
        anchors = [r.t for r in anchor_rows]
    else:
        anchor_rows = None
        seen = set()
        for readings in per_sensor.values():
            seen.update(r.t for r in readings)
        anchors = sorted(seen)
    times = {s: np.array([r.t for r in rs], dtype=np.int64) for s, rs in per_sensor.items()}
    rows = []
    kept_truth = []
    kept_anchors = []
    contributors = []
    for i, t in enumerate(anchors):
        feats: dict[str, float] = {}
        contrib: dict[str, int] = {}
        for sensor in SENSOR_ORDER:
            rs = per_sensor.get(sensor)
            if not rs:
                continue
            ts = times[sensor]
            j = int(np.searchsorted(ts, t))
            best = None
            # Tie on |dt| keeps the earlier reading: check j-1 first with >=.
            if j > 0:
                best = j - 1
            if j < len(ts):
                if best is None or abs(int(ts[j]) - t) < abs(int(ts[best]) - t):
                    best = j
            if best is None or abs(int(ts[best]) - t) > tolerance_ms:
                continue
            # Among equal timestamps the first in sorted order wins.
            while best > 0 and ts[best - 1] == ts[best]:
                best -= 1
            r = rs[best]
            feats.update(_reading_features(sensor, r))
            contrib[sensor] = int(r.t)
        if not contrib:
            continue
        rows.append([_nan(feats.get(c)) for c in FUSED_COLUMNS])
        contributors.append(contrib)
        kept_anchors.append(t)
        if anchor_rows is not None:
            kept_truth.append(anchor_rows[i])
    X = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(FUSED_COLUMNS)))
    anchors_kept = np.array(kept_anchors, dtype=np.int64)
    targets = None
    if anchor_rows is not None:
        targets = {
            "latitude": np.array([r.position.lat_deg for r in kept_truth]),
            "longitude": np.array([r.position.lon_deg for r in kept_truth]),
            "speed": np.array([r.speed_mps for r in kept_truth]),
            "altitude": np.array([r.position.alt_m for r in kept_truth]),
            "drone_type": [r.type.value for r in kept_truth],
        }
    return FusedFrame(
        columns=FUSED_COLUMNS,
        X=X,
        anchors_ms=anchors_kept,
        contributors=contributors,
        targets=targets,
    )


def _nan(v) -> float:
    return float("nan") if v is None else float(v)
