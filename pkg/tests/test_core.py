"""Core types, sensor/drone constants, and geodesy kernels."""

import math
import random

import pytest

from uranus.core import (
    DRONE_CLASS_ORDER,
    DRONES,
    SENSOR_ORDER,
    SENSORS,
    Airframe,
    DroneType,
    GeoPosition,
    SensorKind,
    SensorReading,
    UnknownDroneTypeError,
    bearing_deg,
    destination_point,
    distance_3d_m,
    haversine_m,
    parse_drone_type,
    reading_sort_key,
    validate_reading,
)


def sphere_law_of_cosines_m(a: GeoPosition, b: GeoPosition) -> float:
    # Independent surface-distance formula used only as a cross-check.
    lat1, lon1 = math.radians(a.lat_deg), math.radians(a.lon_deg)
    lat2, lon2 = math.radians(b.lat_deg), math.radians(b.lon_deg)
    c = math.sin(lat1) * math.sin(lat2) + math.cos(lat1) * math.cos(lat2) * math.cos(lon2 - lon1)
    return 6_371_000.0 * math.acos(max(-1.0, min(1.0, c)))


class TestDeployment:
    def test_four_sensors(self):
        assert set(SENSORS) == {"Alvira", "Arcus", "Diana", "Venus"}
        assert SENSOR_ORDER == ("Alvira", "Arcus", "Diana", "Venus")

    def test_positions(self):
        assert SENSORS["Diana"].position == GeoPosition(51.51913, 5.85795, 0.0)
        assert SENSORS["Venus"].position == GeoPosition(51.51927, 5.85791, 0.0)
        assert SENSORS["Alvira"].position == GeoPosition(51.52126, 5.85860, 0.0)
        assert SENSORS["Arcus"].position == GeoPosition(51.52147, 5.87056, 0.0)

    def test_kinds(self):
        assert SENSORS["Diana"].kind is SensorKind.RF_DF
        assert SENSORS["Venus"].kind is SensorKind.RF_DF
        assert SENSORS["Alvira"].kind is SensorKind.RADAR_2D
        assert SENSORS["Arcus"].kind is SensorKind.RADAR_3D

    def test_only_diana_bearing_ambiguous(self):
        assert SENSORS["Diana"].bearing_ambiguous
        assert not any(SENSORS[n].bearing_ambiguous for n in ("Venus", "Alvira", "Arcus"))


class TestDroneCatalog:
    def test_class_order_is_fixed(self):
        assert DRONE_CLASS_ORDER == (
            DroneType.MAVIC_PRO,
            DroneType.MAVIC_2,
            DroneType.PHANTOM_4_PRO,
            DroneType.PARROT_DISCO,
        )

    def test_airframes(self):
        assert DroneType.PARROT_DISCO.airframe is Airframe.FIXED_WING
        for dt in (DroneType.MAVIC_PRO, DroneType.MAVIC_2, DroneType.PHANTOM_4_PRO):
            assert dt.airframe is Airframe.MULTI_COPTER

    def test_physical_parameters(self):
        for dt, spec in DRONES.items():
            assert spec.weight_kg == 1.0
            assert spec.max_velocity_mps == 20.0
            if dt is DroneType.PARROT_DISCO:
                assert spec.rcs_m2 == 0.005
                assert spec.fcsf_m2 == 0.1
            else:
                assert spec.rcs_m2 == 0.01
                assert spec.fcsf_m2 == 0.02

    def test_parse_round_trip(self):
        for dt in DroneType:
            assert parse_drone_type(dt.value) is dt
        assert parse_drone_type("  DJI Mavic Pro ") is DroneType.MAVIC_PRO
        with pytest.raises(UnknownDroneTypeError):
            parse_drone_type("DJI Mini 3")


class TestHaversine:
    def test_zero_distance(self):
        p = GeoPosition(51.52, 5.86)
        assert haversine_m(p, p) == 0.0

    def test_symmetry(self):
        a, b = SENSORS["Diana"].position, SENSORS["Arcus"].position
        assert haversine_m(a, b) == haversine_m(b, a)

    def test_rf_station_baseline(self):
        # ~15.6 m north, ~2.8 m west: frozen from hand-computed small-angle math.
        d = haversine_m(SENSORS["Diana"].position, SENSORS["Venus"].position)
        assert d == pytest.approx(15.8, abs=0.1)

    def test_radar_baseline(self):
        d = haversine_m(SENSORS["Alvira"].position, SENSORS["Arcus"].position)
        assert d == pytest.approx(828.0, abs=1.0)

    def test_one_degree_latitude(self):
        # One degree of latitude on the sphere: R * pi / 180.
        d = haversine_m(GeoPosition(0.0, 0.0), GeoPosition(1.0, 0.0))
        assert d == pytest.approx(6_371_000.0 * math.pi / 180.0, rel=1e-12)

    def test_agrees_with_law_of_cosines(self):
        rng = random.Random(7)
        for _ in range(200):
            a = GeoPosition(rng.uniform(-80, 80), rng.uniform(-179, 179))
            b = GeoPosition(
                a.lat_deg + rng.uniform(-0.5, 0.5), a.lon_deg + rng.uniform(-0.5, 0.5)
            )
            assert haversine_m(a, b) == pytest.approx(sphere_law_of_cosines_m(a, b), abs=1e-3)

    def test_antipodal_does_not_crash(self):
        d = haversine_m(GeoPosition(0.0, 0.0), GeoPosition(0.0, 180.0))
        assert d == pytest.approx(6_371_000.0 * math.pi, rel=1e-9)


class TestDistance3d:
    def test_pure_vertical(self):
        p = GeoPosition(51.52, 5.86, 0.0)
        q = GeoPosition(51.52, 5.86, 120.0)
        assert distance_3d_m(p, q) == pytest.approx(120.0)

    def test_pythagorean(self):
        a = GeoPosition(51.52, 5.86, 0.0)
        b = destination_point(GeoPosition(51.52, 5.86, 300.0), 90.0, 400.0)
        d = distance_3d_m(a, b)
        assert d == pytest.approx(500.0, abs=0.5)

    def test_missing_altitude_means_ground(self):
        a = GeoPosition(51.52, 5.86)
        b = GeoPosition(51.52, 5.86, 80.0)
        assert distance_3d_m(a, b) == pytest.approx(80.0)


class TestBearingAndDestination:
    def test_round_trip(self):
        rng = random.Random(11)
        origin = GeoPosition(51.52, 5.86, 0.0)
        for _ in range(50):
            br = rng.uniform(0.0, 360.0)
            dist = rng.uniform(50.0, 3000.0)
            dest = destination_point(origin, br, dist)
            assert haversine_m(origin, dest) == pytest.approx(dist, abs=1.0)
            got = bearing_deg(origin, dest)
            err = abs((got - br + 180.0) % 360.0 - 180.0)
            assert err < 0.5

    def test_cardinal_directions(self):
        origin = GeoPosition(51.52, 5.86)
        north = destination_point(origin, 0.0, 1000.0)
        assert north.lat_deg > origin.lat_deg
        assert north.lon_deg == pytest.approx(origin.lon_deg)
        east = destination_point(origin, 90.0, 1000.0)
        assert east.lon_deg > origin.lon_deg
        assert east.lat_deg == pytest.approx(origin.lat_deg)


class TestGeoPositionValidation:
    def test_rejects_bad_latitude(self):
        with pytest.raises(ValueError):
            GeoPosition(91.0, 0.0)

    def test_rejects_bad_longitude(self):
        with pytest.raises(ValueError):
            GeoPosition(0.0, 200.0)

    def test_rejects_negative_altitude(self):
        with pytest.raises(ValueError):
            GeoPosition(0.0, 0.0, -5.0)


class TestValidateReading:
    def test_valid_rf(self):
        r = SensorReading(t=1000, sensor="Venus", bearing_deg=45.0, rss_dbm=-60.0, freq_mhz=2440.0)
        assert validate_reading(r) == []

    def test_valid_radar(self):
        r = SensorReading(
            t=1000, sensor="Arcus", rcs_dbsm=-10.0, position=GeoPosition(51.52, 5.86, 50.0)
        )
        assert validate_reading(r) == []

    def test_unknown_sensor(self):
        r = SensorReading(t=0, sensor="Nobody", bearing_deg=10.0)
        assert any("unknown sensor" in v for v in validate_reading(r))

    def test_rf_with_position_flagged(self):
        r = SensorReading(
            t=0,
            sensor="Diana",
            bearing_deg=10.0,
            freq_mhz=2440.0,
            position=GeoPosition(51.5, 5.8),
        )
        assert any("position" in v for v in validate_reading(r))

    def test_radar_with_rss_flagged(self):
        r = SensorReading(
            t=0, sensor="Alvira", rss_dbm=-60.0, rcs_dbsm=-5.0, position=GeoPosition(51.5, 5.8)
        )
        assert any("rss" in v for v in validate_reading(r))

    def test_2d_radar_with_altitude_flagged(self):
        r = SensorReading(
            t=0, sensor="Alvira", rcs_dbsm=-5.0, position=GeoPosition(51.5, 5.8, 40.0)
        )
        assert any("altitude" in v for v in validate_reading(r))

    def test_negative_timestamp(self):
        r = SensorReading(t=-1, sensor="Venus", bearing_deg=0.0, freq_mhz=2440.0)
        assert any("timestamp" in v for v in validate_reading(r))

    def test_bearing_range(self):
        r = SensorReading(t=0, sensor="Venus", bearing_deg=360.0, freq_mhz=2440.0)
        assert any("bearing" in v for v in validate_reading(r))

    def test_deterministic_and_pure(self):
        r = SensorReading(t=-5, sensor="Nobody", bearing_deg=400.0, range_m=-2.0)
        first = validate_reading(r)
        for _ in range(5):
            assert validate_reading(r) == first


class TestReadingSortKey:
    def test_permutation_invariant(self):
        rng = random.Random(3)
        readings = []
        for i in range(40):
            readings.append(
                SensorReading(
                    t=rng.randrange(0, 5) * 1000,
                    sensor=rng.choice(("Venus", "Diana")),
                    bearing_deg=rng.choice((None, rng.uniform(0, 360))),
                    rss_dbm=rng.uniform(-90, -40),
                    freq_mhz=2440.0,
                )
            )
        base = sorted(readings, key=reading_sort_key)
        for seed in range(5):
            shuffled = readings[:]
            random.Random(seed).shuffle(shuffled)
            assert sorted(shuffled, key=reading_sort_key) == base
