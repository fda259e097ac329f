"""Shared domain types for the sensor network, the drones, and geodesy.

Everything here is immutable after construction and safe to share across
threads. Angles are stored in degrees; math kernels convert to radians
internally. Optional fields are ``None`` when absent, never sentinel numbers,
so downstream missingness analysis stays unambiguous.
"""

import enum
import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0

# UNIX epoch milliseconds.
TimestampMs = int


class SensorKind(enum.Enum):
    RF_DF = "rf_df"
    RADAR_2D = "radar_2d"
    RADAR_3D = "radar_3d"


class Airframe(enum.Enum):
    MULTI_COPTER = "multi_copter"
    FIXED_WING = "fixed_wing"


class DroneType(enum.Enum):
    """The four commercial drone models the sensor network is calibrated for."""

    MAVIC_PRO = "DJI Mavic Pro"
    MAVIC_2 = "DJI Mavic 2"
    PHANTOM_4_PRO = "DJI Phantom 4 Pro"
    PARROT_DISCO = "Parrot Disco"

    @property
    def airframe(self) -> Airframe:
        if self is DroneType.PARROT_DISCO:
            return Airframe.FIXED_WING
        return Airframe.MULTI_COPTER


# Canonical class order used for every tie-break and vote vector.
DRONE_CLASS_ORDER = (
    DroneType.MAVIC_PRO,
    DroneType.MAVIC_2,
    DroneType.PHANTOM_4_PRO,
    DroneType.PARROT_DISCO,
)


@dataclass(frozen=True)
class GeoPosition:
    """WGS-84 latitude/longitude in degrees, optional altitude in meters."""

    lat_deg: float
    lon_deg: float
    alt_m: float | None = None

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat_deg}")
        if not -180.0 <= self.lon_deg <= 180.0:
            raise ValueError(f"longitude out of range: {self.lon_deg}")
        if self.alt_m is not None and self.alt_m < 0.0:
            raise ValueError(f"altitude below ground: {self.alt_m}")


@dataclass(frozen=True)
class SensorSpec:
    name: str
    kind: SensorKind
    position: GeoPosition
    bearing_ambiguous: bool = False


# Fixed deployment: two RF/DF stations, one 2D radar, one 3D radar.
# Sensor altitudes are not published for this deployment; 0 m AGL assumed.
# Diana's linear array folds every bearing into a single 180-degree sector.
SENSORS: dict[str, SensorSpec] = {
    "Diana": SensorSpec(
        "Diana", SensorKind.RF_DF, GeoPosition(51.51913, 5.85795, 0.0), bearing_ambiguous=True
    ),
    "Venus": SensorSpec("Venus", SensorKind.RF_DF, GeoPosition(51.51927, 5.85791, 0.0)),
    "Alvira": SensorSpec("Alvira", SensorKind.RADAR_2D, GeoPosition(51.52126, 5.85860, 0.0)),
    "Arcus": SensorSpec("Arcus", SensorKind.RADAR_3D, GeoPosition(51.52147, 5.87056, 0.0)),
}

SENSOR_ORDER = ("Alvira", "Arcus", "Diana", "Venus")


@dataclass(frozen=True)
class DroneSpec:
    type: DroneType
    weight_kg: float
    max_velocity_mps: float
    rcs_m2: float
    fcsf_m2: float


DRONES: dict[DroneType, DroneSpec] = {
    DroneType.MAVIC_PRO: DroneSpec(DroneType.MAVIC_PRO, 1.0, 20.0, 0.01, 0.02),
    DroneType.MAVIC_2: DroneSpec(DroneType.MAVIC_2, 1.0, 20.0, 0.01, 0.02),
    DroneType.PHANTOM_4_PRO: DroneSpec(DroneType.PHANTOM_4_PRO, 1.0, 20.0, 0.01, 0.02),
    DroneType.PARROT_DISCO: DroneSpec(DroneType.PARROT_DISCO, 1.0, 20.0, 0.005, 0.1),
}

# Slack over the nominal maximum speed so replayed logs with sensor noise
# still validate.
SPEED_SLACK = 1.25


@dataclass(frozen=True)
class SensorReading:
    """One timestamped observation from one sensor. Absent fields are None."""

    t: TimestampMs
    sensor: str
    bearing_deg: float | None = None
    range_m: float | None = None
    rss_dbm: float | None = None
    rcs_dbsm: float | None = None
    freq_mhz: float | None = None
    position: GeoPosition | None = None


@dataclass(frozen=True)
class DroneLogRecord:
    """Ground-truth flight-log row. Speed is horizontal ground speed."""

    t: TimestampMs
    position: GeoPosition
    speed_mps: float
    type: DroneType


def validate_reading(r: SensorReading) -> list[str]:
    """Return every invariant the reading violates; empty list means ok.

    The verdict is deterministic: violations always come back in the same
    order for the same reading, and the input is never mutated.
    """
    violations: list[str] = []
    if r.t < 0:
        violations.append("timestamp negative")
    spec = SENSORS.get(r.sensor)
    if spec is None:
        violations.append(f"unknown sensor {r.sensor!r}")
    if r.bearing_deg is not None and not 0.0 <= r.bearing_deg < 360.0:
        violations.append("bearing out of range")
    if r.range_m is not None and r.range_m < 0.0:
        violations.append("range negative")
    if r.freq_mhz is not None and r.freq_mhz <= 0.0:
        violations.append("frequency not positive")
    if spec is not None:
        if spec.kind is SensorKind.RF_DF:
            if r.range_m is not None:
                violations.append("RF/DF carries range")
            if r.position is not None:
                violations.append("RF/DF carries position")
            if r.rcs_dbsm is not None:
                violations.append("RF/DF carries rcs")
            if r.bearing_deg is None and r.rss_dbm is None:
                violations.append("RF/DF missing bearing and rss")
            if r.freq_mhz is None:
                violations.append("RF/DF missing frequency")
        else:
            if r.rss_dbm is not None:
                violations.append("radar carries rss")
            if r.freq_mhz is not None:
                violations.append("radar carries frequency")
            has_polar = r.bearing_deg is not None and r.range_m is not None
            if r.position is None and not has_polar:
                violations.append("radar missing position and bearing+range")
            if r.rcs_dbsm is None:
                violations.append("radar missing rcs")
            if (
                spec.kind is SensorKind.RADAR_2D
                and r.position is not None
                and r.position.alt_m is not None
            ):
                violations.append("2D radar carries altitude")
    return violations


def haversine_m(a: GeoPosition, b: GeoPosition) -> float:
    """Great-circle surface distance in meters (altitude ignored)."""
    lat1, lon1 = math.radians(a.lat_deg), math.radians(a.lon_deg)
    lat2, lon2 = math.radians(b.lat_deg), math.radians(b.lon_deg)
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def distance_3d_m(a: GeoPosition, b: GeoPosition) -> float:
    """Slant distance in meters; a missing altitude is taken as 0 m (ground)."""
    alt_a = a.alt_m if a.alt_m is not None else 0.0
    alt_b = b.alt_m if b.alt_m is not None else 0.0
    horiz = haversine_m(a, b)
    return math.hypot(horiz, alt_b - alt_a)


def destination_point(origin: GeoPosition, bearing_deg: float, distance_m: float) -> GeoPosition:
    """Point reached from origin along a bearing, flat-earth approximation.

    Sub-meter accurate at the few-kilometer ranges of the monitored zone;
    altitude is carried through unchanged.
    """
    br = math.radians(bearing_deg)
    dlat = distance_m * math.cos(br) / EARTH_RADIUS_M * (180.0 / math.pi)
    dlon = (
        distance_m
        * math.sin(br)
        / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat_deg)))
        * (180.0 / math.pi)
    )
    return GeoPosition(origin.lat_deg + dlat, origin.lon_deg + dlon, origin.alt_m)


def bearing_deg(origin: GeoPosition, target: GeoPosition) -> float:
    """Initial great-circle bearing from origin to target, in [0, 360)."""
    lat1, lon1 = math.radians(origin.lat_deg), math.radians(origin.lon_deg)
    lat2, lon2 = math.radians(target.lat_deg), math.radians(target.lon_deg)
    dlon = lon2 - lon1
    y = math.sin(dlon) * math.cos(lat2)
    x = math.cos(lat1) * math.sin(lat2) - math.sin(lat1) * math.cos(lat2) * math.cos(dlon)
    return math.degrees(math.atan2(y, x)) % 360.0


def parse_drone_type(name: str) -> DroneType:
    """Map a flight-log model-name string to its DroneType.

    Raises UnknownDroneTypeError for model names outside the calibrated set.
    """
    cleaned = name.strip()
    for dt in DroneType:
        if dt.value == cleaned:
            return dt
    raise UnknownDroneTypeError(f"unknown drone type: {name!r}")


class UranusError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(UranusError):
    """Invalid or unresolvable configuration."""


class DataError(UranusError):
    """Malformed, incomplete, or inconsistent input data."""


class ModelError(UranusError):
    """Model files or model/feature contracts violated."""


class ScenarioIncompleteError(DataError):
    pass


class SchemaViolationError(DataError):
    pass


class UnknownDroneTypeError(DataError):
    pass


def reading_sort_key(r: SensorReading) -> tuple:
    """Total order on readings: timestamp, then field values.

    Used everywhere readings are sorted so results never depend on input
    row order (None sorts before any value).
    """

    def k(v):
        return (v is not None, v if v is not None else 0.0)

    pos = r.position
    return (
        r.t,
        r.sensor,
        k(r.bearing_deg),
        k(r.range_m),
        k(r.rss_dbm),
        k(r.rcs_dbsm),
        k(r.freq_mhz),
        k(pos.lat_deg if pos else None),
        k(pos.lon_deg if pos else None),
        k(pos.alt_m if pos else None),
    )
