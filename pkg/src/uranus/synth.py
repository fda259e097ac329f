"""Synthetic scenario generator: truth flight logs plus noisy sensor logs.

Nine flight patterns cover the deployment's corridor geometries: single
drones crossing the sensor field with stepped or ramped altitude, a
hovering segment, a turn, dual-drone parallel / diagonal / zig-zag runs at
fixed lateral separation, and a fixed-wing pass that never slows down.
Truth tracks are sampled on a fixed clock with speeds defined as the
forward difference of positions, so logged kinematics are self-consistent
by construction.

Sensor simulation follows each instrument's real output shape: the 2D
radar reports horizontal plots with radar cross-section (plus periodic
clutter returns from a static reflector), the 3D radar adds altitude and
suffers rare glitch returns, and the two RF direction-finders report
bearing, signal strength, and emitter channel -- one of them folding all
bearings into a 180-degree sector. All randomness flows from one seed
through named child streams, so identical inputs give identical files.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import ingest
from .core import (
    DRONES,
    SENSORS,
    SENSOR_ORDER,
    DataError,
    DroneLogRecord,
    DroneType,
    GeoPosition,
    SensorKind,
    SensorReading,
    bearing_deg,
    destination_point,
    distance_3d_m,
    reading_sort_key,
)

# Fixed epoch so regenerated scenarios are byte-identical; never wall clock.
T0_MS = 1_600_000_000_000
DEFAULT_SAMPLE_MS = 500
DEFAULT_CRUISE_MPS = 10.0

# Midpoint of the two RF stations; corridors are laid out around it.
CORRIDOR_ANCHOR = GeoPosition(51.51920, 5.85793, 0.0)

# Sensor readings trail the truth clock by one phase slot per sensor, and
# simultaneous drones are offset by half a sample. A reading sits within
# max-phase + jitter = 40 + 60 = 100 ms of its own drone's truth row but at
# least 250 - 100 = 150 ms from any other drone's, so nearest-timestamp
# matching (fusion and sample attribution) can never cross wires.
SENSOR_PHASE_STEP_MS = 10
DRONE_PHASE_MS = 250
JITTER_MS = 60

# Radar-cross-section model per type: Normal(mean dBsm, sigma).
RCS_MEAN_DBSM = {
    DroneType.MAVIC_PRO: -14.05,
    DroneType.MAVIC_2: -3.11,
    DroneType.PHANTOM_4_PRO: -8.55,
    DroneType.PARROT_DISCO: -10.82,
}

# Emitter channel distribution per type: the dominant channel carries the
# calibrated mode probability, the remainder spreads evenly over the
# +-5/+-10 MHz neighbors. The fixed-wing type is single-channel.
FREQ_PMF = {
    DroneType.MAVIC_PRO: {
        2396.5: 0.14,
        2401.5: 0.14,
        2406.5: 0.44,
        2411.5: 0.14,
        2416.5: 0.14,
    },
    DroneType.MAVIC_2: {
        2406.5: 0.16,
        2411.5: 0.16,
        2416.5: 0.36,
        2421.5: 0.16,
        2426.5: 0.16,
    },
    DroneType.PHANTOM_4_PRO: {
        2461.5: 0.155,
        2466.5: 0.155,
        2471.5: 0.38,
        2476.5: 0.155,
        2481.5: 0.155,
    },
    DroneType.PARROT_DISCO: {2440.0: 1.0},
}

PATTERN_IDS = ("S1.1", "S1.2", "S1.3", "S1.4", "S2.1", "S2.2", "S2.3", "S2.4", "S3")


@dataclass(frozen=True)
class Segment:
    """One leg of a waypoint program: a straight run or a hover."""

    kind: str  # "straight" | "hover"
    bearing_deg: float = 0.0
    length_m: float = 0.0
    duration_s: float = 0.0


def straight(bearing: float, length_m: float) -> Segment:
    return Segment(kind="straight", bearing_deg=bearing, length_m=length_m)


def hover(duration_s: float) -> Segment:
    return Segment(kind="hover", duration_s=duration_s)


@dataclass(frozen=True)
class DroneProgram:
    """One drone's flight: start point, legs, and altitude profile.

    altitude is ("const", alt), ("steps", ((fraction, alt), ...)) with
    fractions of total horizontal path, or ("ramp", start_alt, end_alt).
    """

    drone: DroneType
    start: GeoPosition
    segments: tuple
    altitude: tuple


@dataclass(frozen=True)
class FlightPattern:
    id: str
    programs: tuple

    def __post_init__(self):
        if self.id.startswith("S2") and len(self.programs) != 2:
            raise DataError(f"{self.id} must fly exactly two drones")
        if self.id == "S3" and any(
            s.kind == "hover" for p in self.programs for s in p.segments
        ):
            raise DataError("S3 is fixed-wing and cannot hover")


def _entry(bearing: float, back_m: float, perp_m: float = 0.0) -> GeoPosition:
    """Start point back_m before the corridor anchor along a bearing,
    shifted perp_m to the right of the track."""
    p = destination_point(CORRIDOR_ANCHOR, (bearing + 180.0) % 360.0, back_m)
    if perp_m:
        p = destination_point(p, (bearing + 90.0) % 360.0, perp_m)
    return p


_STEPPED_THIRDS = ("steps", ((0.0, 50.0), (1.0 / 3.0, 100.0), (2.0 / 3.0, 150.0)))


def flight_pattern(pattern_id: str) -> FlightPattern:
    """Build the waypoint program for one of the nine scenario patterns."""
    pid = pattern_id.strip()
    mp, m2 = DroneType.MAVIC_PRO, DroneType.MAVIC_2
    p4, pd = DroneType.PHANTOM_4_PRO, DroneType.PARROT_DISCO
    if pid == "S1.1":
        programs = (
            DroneProgram(mp, _entry(90, 1000), (straight(90, 2000),), _STEPPED_THIRDS),
        )
    elif pid == "S1.2":
        # Same stepped climb, pausing just past the entry to the middle
        # plateau (670 m is the first sampled point at or beyond one third).
        programs = (
            DroneProgram(
                p4,
                _entry(60, 1000),
                (straight(60, 670), hover(70), straight(60, 1330)),
                _STEPPED_THIRDS,
            ),
        )
    elif pid == "S1.3":
        programs = (
            DroneProgram(
                mp,
                _entry(135, 700),
                (straight(135, 700), straight(45, 700)),
                ("const", 50.0),
            ),
        )
    elif pid == "S1.4":
        programs = (
            DroneProgram(mp, _entry(0, 1000), (straight(0, 2000),), ("ramp", 20.0, 200.0)),
        )
    elif pid == "S2.1":
        programs = (
            DroneProgram(p4, _entry(90, 1000, 150), (straight(90, 2000),), ("const", 60.0)),
            DroneProgram(m2, _entry(90, 1000, -150), (straight(90, 2000),), ("const", 90.0)),
        )
    elif pid == "S2.2":
        # Crossing diagonals: each drone kinks 30 degrees toward the other.
        programs = (
            DroneProgram(
                p4,
                _entry(90, 750, 200),
                (straight(100, 750), straight(70, 750)),
                ("const", 70.0),
            ),
            DroneProgram(
                mp,
                _entry(90, 750, -200),
                (straight(80, 750), straight(110, 750)),
                ("const", 110.0),
            ),
        )
    elif pid == "S2.3":
        programs = (
            DroneProgram(
                p4,
                _entry(90, 750, 125),
                (straight(95, 750), straight(65, 750)),
                ("const", 65.0),
            ),
            DroneProgram(
                m2,
                _entry(90, 750, -125),
                (straight(85, 750), straight(115, 750)),
                ("const", 95.0),
            ),
        )
    elif pid == "S2.4":
        legs_a = tuple(straight(90 - 35 if i % 2 == 0 else 90 + 35, 250) for i in range(8))
        legs_b = tuple(straight(90 + 35 if i % 2 == 0 else 90 - 35, 250) for i in range(8))
        programs = (
            DroneProgram(p4, _entry(90, 1000, 150), legs_a, ("const", 75.0)),
            DroneProgram(mp, _entry(90, 1000, -150), legs_b, ("const", 105.0)),
        )
    elif pid == "S3":
        programs = (
            DroneProgram(pd, _entry(180, 1000), (straight(180, 2000),), ("const", 80.0)),
        )
    else:
        raise DataError(f"unknown pattern id {pattern_id!r}")
    return FlightPattern(id=pid, programs=programs)


def _altitude_at(profile: tuple, cum_m: float, total_m: float) -> float:
    kind = profile[0]
    if kind == "const":
        return float(profile[1])
    fraction = cum_m / total_m if total_m > 0.0 else 0.0
    if kind == "ramp":
        _, a0, a1 = profile
        return float(a0 + (a1 - a0) * fraction)
    if kind == "steps":
        alt = profile[1][0][1]
        for boundary, value in profile[1]:
            if fraction >= boundary - 1e-9:
                alt = value
        return float(alt)
    raise DataError(f"unknown altitude profile {kind!r}")


def generate_truth(
    pattern,
    sample_ms: int = DEFAULT_SAMPLE_MS,
    seed: int = 0,
    cruise_mps: float = DEFAULT_CRUISE_MPS,
) -> list:
    """Sampled truth tracks, one list of DroneLogRecord per drone.

    Straight legs are quantized to whole samples of cruise_mps, so the
    logged speed at each sample equals the forward difference to the next
    position exactly (the final sample repeats the previous speed). The
    seed is reserved for stochastic segments; the built-in programs are
    fully deterministic.
    """
    del seed  # current waypoint programs have no stochastic segments
    if isinstance(pattern, str):
        pattern = flight_pattern(pattern)
    if sample_ms <= 0:
        raise DataError(f"sample_ms must be positive, got {sample_ms}")
    if cruise_mps <= 0.0:
        raise DataError(f"cruise speed must be positive, got {cruise_mps}")
    step_m = cruise_mps * sample_ms / 1000.0
    tracks = []
    for d, program in enumerate(pattern.programs):
        if cruise_mps > DRONES[program.drone].max_velocity_mps:
            raise DataError(
                f"cruise {cruise_mps} m/s exceeds {program.drone.value} maximum"
            )
        pos = program.start
        points = [(pos, 0.0)]
        cum = 0.0
        for seg in program.segments:
            if seg.kind == "straight":
                n = max(1, round(seg.length_m / step_m))
                for _ in range(n):
                    pos = destination_point(pos, seg.bearing_deg, step_m)
                    cum += step_m
                    points.append((pos, cum))
            elif seg.kind == "hover":
                n = max(1, round(seg.duration_s * 1000.0 / sample_ms))
                for _ in range(n):
                    points.append((pos, cum))
            else:
                raise DataError(f"unknown segment kind {seg.kind!r}")
        total = points[-1][1]
        dt_s = sample_ms / 1000.0
        speeds = []
        for i in range(len(points) - 1):
            moved = points[i + 1][1] > points[i][1]
            speeds.append(step_m / dt_s if moved else 0.0)
        speeds.append(speeds[-1] if speeds else 0.0)
        t0 = T0_MS + d * DRONE_PHASE_MS
        records = []
        for i, ((p, cum_m), speed) in enumerate(zip(points, speeds)):
            alt = _altitude_at(program.altitude, cum_m, total)
            records.append(
                DroneLogRecord(
                    t=t0 + i * sample_ms,
                    position=GeoPosition(p.lat_deg, p.lon_deg, alt),
                    speed_mps=speed,
                    type=program.drone,
                )
            )
        tracks.append(records)
    return tracks


def _pmf_channels(pmf: dict) -> tuple[np.ndarray, np.ndarray]:
    channels = np.array(sorted(pmf), dtype=np.float64)
    probs = np.array([pmf[c] for c in sorted(pmf)], dtype=np.float64)
    return channels, probs


@dataclass(frozen=True)
class NoiseModel:
    """Knobs for every stochastic part of the sensor simulation.

    Clutter and glitches are environment artifacts: the 2D radar sees a
    static reflector at clutter_rate per truth sample, and the 3D radar
    occasionally reports a wildly displaced return with inflated
    cross-section. Setting every sigma and probability to zero makes the
    3D radar an exact witness of the truth track.
    """

    position_sigma_m: float = 2.5
    bearing_sigma_deg: float = 2.0
    rss_sigma_db: float = 2.0
    rcs_mean_dbsm: dict = field(default_factory=lambda: dict(RCS_MEAN_DBSM))
    rcs_sigma_dbsm: float = 2.0
    freq_pmf: dict = field(default_factory=lambda: {k: dict(v) for k, v in FREQ_PMF.items()})
    drop_probability: float = 0.1
    clutter_rate: float = 0.3
    clutter_sigma_m: float = 25.0
    glitch_probability: float = 0.01
    seed: int = 0

    def __post_init__(self):
        for name in (
            "position_sigma_m",
            "bearing_sigma_deg",
            "rss_sigma_db",
            "rcs_sigma_dbsm",
            "clutter_sigma_m",
        ):
            if getattr(self, name) < 0.0:
                raise DataError(f"{name} must be non-negative")
        if not 0.0 <= self.drop_probability < 1.0:
            raise DataError("drop probability must be in [0, 1)")
        if not 0.0 <= self.clutter_rate <= 1.0:
            raise DataError("clutter rate must be in [0, 1]")
        if not 0.0 <= self.glitch_probability < 1.0:
            raise DataError("glitch probability must be in [0, 1)")
        for dt, pmf in self.freq_pmf.items():
            total = sum(pmf.values())
            if abs(total - 1.0) > 1e-9:
                raise DataError(f"frequency PMF for {dt.value} sums to {total}")
            if any(p < 0.0 for p in pmf.values()):
                raise DataError(f"negative probability in PMF for {dt.value}")


def _offset_position(pos: GeoPosition, east_m: float, north_m: float, alt=None) -> GeoPosition:
    dlat = north_m / 6_371_000.0 * (180.0 / math.pi)
    dlon = east_m / (6_371_000.0 * math.cos(math.radians(pos.lat_deg))) * (180.0 / math.pi)
    return GeoPosition(pos.lat_deg + dlat, pos.lon_deg + dlon, alt)


def _rss_dbm(distance_m: float, rng, sigma: float) -> float:
    # Log-distance path loss referenced to -40 dBm at 100 m.
    d = max(distance_m, 1.0)
    return -40.0 - 20.0 * math.log10(d / 100.0) + (rng.normal(0.0, sigma) if sigma else 0.0)


def simulate_sensors(truth, sensors=None, noise: NoiseModel | None = None) -> dict:
    """Noisy per-sensor readings for one or more truth tracks.

    truth is one track (list of DroneLogRecord) or a list of tracks.
    Returns sensor name -> readings in canonical sort order. Randomness is
    split into one child stream per (track, sensor) plus one clutter
    stream, all spawned from the noise seed, so per-sensor output does not
    depend on how many other sensors are simulated together.
    """
    if noise is None:
        noise = NoiseModel()
    if sensors is None:
        sensors = [SENSORS[name] for name in SENSOR_ORDER]
    tracks = list(truth)
    if not tracks:
        raise DataError("empty truth input")
    if isinstance(tracks[0], DroneLogRecord):
        tracks = [tracks]
    if any(not tr for tr in tracks):
        raise DataError("empty truth track")
    streams = np.random.SeedSequence(noise.seed).spawn(len(tracks) * len(sensors) + 1)
    clutter_rng = np.random.Generator(np.random.PCG64(streams[-1]))
    out: dict[str, list[SensorReading]] = {s.name: [] for s in sensors}
    for ti, track in enumerate(tracks):
        drone = track[0].type
        mean_rcs = noise.rcs_mean_dbsm[drone]
        channels, probs = _pmf_channels(noise.freq_pmf[drone])
        for si, spec in enumerate(sensors):
            rng = np.random.Generator(np.random.PCG64(streams[ti * len(sensors) + si]))
            phase = SENSOR_PHASE_STEP_MS * (si + 1)
            for rec in track:
                if noise.drop_probability and rng.uniform() < noise.drop_probability:
                    continue
                t = rec.t + phase + int(rng.integers(-JITTER_MS, JITTER_MS + 1))
                if spec.kind in (SensorKind.RADAR_2D, SensorKind.RADAR_3D):
                    east = rng.normal(0.0, noise.position_sigma_m) if noise.position_sigma_m else 0.0
                    north = rng.normal(0.0, noise.position_sigma_m) if noise.position_sigma_m else 0.0
                    rcs = mean_rcs + (
                        rng.normal(0.0, noise.rcs_sigma_dbsm) if noise.rcs_sigma_dbsm else 0.0
                    )
                    if spec.kind == SensorKind.RADAR_3D:
                        up = rng.normal(0.0, noise.position_sigma_m) if noise.position_sigma_m else 0.0
                        alt = max(0.0, (rec.position.alt_m or 0.0) + up)
                        pos = _offset_position(rec.position, east, north, alt)
                        if noise.glitch_probability and rng.uniform() < noise.glitch_probability:
                            pos = GeoPosition(pos.lat_deg + 0.18, pos.lon_deg, pos.alt_m)
                            rcs += 40.0
                    else:
                        pos = _offset_position(rec.position, east, north, None)
                    out[spec.name].append(
                        SensorReading(t=t, sensor=spec.name, position=pos, rcs_dbsm=rcs)
                    )
                else:
                    brg = bearing_deg(spec.position, rec.position)
                    if noise.bearing_sigma_deg:
                        brg += rng.normal(0.0, noise.bearing_sigma_deg)
                    brg %= 180.0 if spec.bearing_ambiguous else 360.0
                    rss = _rss_dbm(
                        distance_3d_m(spec.position, rec.position), rng, noise.rss_sigma_db
                    )
                    freq = float(channels[rng.choice(channels.size, p=probs)])
                    out[spec.name].append(
                        SensorReading(
                            t=t, sensor=spec.name, bearing_deg=brg, rss_dbm=rss, freq_mhz=freq
                        )
                    )
    # Static clutter returns on the 2D radar, clocked off the first track.
    if noise.clutter_rate:
        for si, spec in enumerate(sensors):
            if spec.kind != SensorKind.RADAR_2D:
                continue
            reflector = _offset_position(spec.position, 2500.0, 800.0, None)
            phase = SENSOR_PHASE_STEP_MS * (si + 1)
            for rec in tracks[0]:
                if clutter_rng.uniform() >= noise.clutter_rate:
                    continue
                t = rec.t + phase + int(clutter_rng.integers(-JITTER_MS, JITTER_MS + 1))
                pos = _offset_position(
                    reflector,
                    clutter_rng.normal(0.0, noise.clutter_sigma_m),
                    clutter_rng.normal(0.0, noise.clutter_sigma_m),
                    None,
                )
                out[spec.name].append(
                    SensorReading(
                        t=t,
                        sensor=spec.name,
                        position=pos,
                        rcs_dbsm=5.0 + clutter_rng.normal(0.0, 3.0),
                    )
                )
    for name in out:
        out[name].sort(key=reading_sort_key)
    return out


def emit_scenario(
    out_dir,
    pattern,
    noise: NoiseModel | None = None,
    seed: int = 0,
    sample_ms: int = DEFAULT_SAMPLE_MS,
    with_truth: bool = True,
) -> str:
    """Write one scenario directory in the ingest layout.

    Always writes all four sensor files (header-only when a sensor saw
    nothing); the truth log is optional so test scenarios can mimic live
    captures. The directory is created if needed.
    """
    if isinstance(pattern, str):
        pattern = flight_pattern(pattern)
    if noise is None:
        noise = NoiseModel(seed=seed)
    tracks = generate_truth(pattern, sample_ms=sample_ms, seed=seed)
    readings = simulate_sensors(tracks, noise=noise)
    os.makedirs(out_dir, exist_ok=True)
    for name in SENSOR_ORDER:
        ingest.write_sensor_csv(os.path.join(out_dir, f"{name}.csv"), name, readings.get(name, []))
    if with_truth:
        merged = [rec for track in tracks for rec in track]
        ingest.write_drone_log(os.path.join(out_dir, "drone_log.csv"), merged)
    return str(out_dir)
