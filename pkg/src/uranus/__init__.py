"""Multi-sensor drone detection, tracking, and classification toolkit."""

__version__ = "0.1.0"

from .core import (
    DRONE_CLASS_ORDER,
    DRONES,
    SENSOR_ORDER,
    SENSORS,
    ConfigError,
    DataError,
    DroneLogRecord,
    DroneType,
    GeoPosition,
    ModelError,
    SensorReading,
    UranusError,
    distance_3d_m,
    haversine_m,
)

__all__ = [
    "DRONE_CLASS_ORDER",
    "DRONES",
    "SENSOR_ORDER",
    "SENSORS",
    "ConfigError",
    "DataError",
    "DroneLogRecord",
    "DroneType",
    "GeoPosition",
    "ModelError",
    "SensorReading",
    "UranusError",
    "distance_3d_m",
    "haversine_m",
    "__version__",
]
