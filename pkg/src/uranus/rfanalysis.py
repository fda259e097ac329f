"""Signature analyses: RCS distribution fits, emitter-channel likelihoods,
and drone-to-sensor distance series.

The radar cross-section of each airframe behaves like a Gaussian random
variable, so its maximum-likelihood description is just the sample mean
and the population standard deviation. Operating frequency is discrete:
the empirical channel distribution and its mode are the whole story.
Distance series pair every truth sample's 3D range to a sensor with the
drone altitude at that instant, which is what the analysis plots show.
"""

import bisect
import math
from dataclasses import dataclass

from .core import DataError, DroneLogRecord, SensorSpec, distance_3d_m, haversine_m


@dataclass(frozen=True)
class RcsModel:
    """Gaussian fit of radar cross-section samples, in dBsm.

    mean_dbsm is the maximum-likelihood location (and the mode); sigma uses
    the population (divide-by-n) form. degenerate flags an all-equal sample.
    """

    drone_type: str
    mean_dbsm: float
    sigma_dbsm: float
    count: int
    degenerate: bool = False

    def __post_init__(self):
        if self.sigma_dbsm < 0.0:
            raise DataError(f"negative sigma: {self.sigma_dbsm}")
        if self.count < 2:
            raise DataError(f"RCS fit needs at least 2 samples, got {self.count}")

    def pdf(self, x: float) -> float:
        if self.sigma_dbsm == 0.0:
            return math.inf if x == self.mean_dbsm else 0.0
        z = (x - self.mean_dbsm) / self.sigma_dbsm
        return math.exp(-0.5 * z * z) / (self.sigma_dbsm * math.sqrt(2.0 * math.pi))

    def to_dict(self) -> dict:
        return {
            "drone_type": self.drone_type,
            "mean_dbsm": self.mean_dbsm,
            "sigma_dbsm": self.sigma_dbsm,
            "count": self.count,
            "degenerate": self.degenerate,
        }


def fit_rcs(samples, drone_type: str = "") -> RcsModel:
    """Maximum-likelihood Gaussian fit: sample mean, population sigma."""
    values = [float(v) for v in samples]
    if len(values) < 2:
        raise DataError(f"RCS fit needs at least 2 samples, got {len(values)}")
    if any(not math.isfinite(v) for v in values):
        raise DataError("non-finite RCS sample")
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    sigma = math.sqrt(var)
    return RcsModel(
        drone_type=drone_type,
        mean_dbsm=mean,
        sigma_dbsm=sigma,
        count=n,
        degenerate=sigma == 0.0,
    )


@dataclass(frozen=True)
class FreqLikelihood:
    """Empirical channel distribution of one emitter type."""

    drone_type: str
    pmf: dict
    mode_mhz: float
    mode_probability: float

    def __post_init__(self):
        total = sum(self.pmf.values())
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"PMF sums to {total}")
        if self.pmf and abs(self.mode_probability - max(self.pmf.values())) > 1e-12:
            raise DataError("mode probability is not the PMF maximum")

    def to_dict(self) -> dict:
        return {
            "drone_type": self.drone_type,
            "pmf": {repr(float(k)): v for k, v in sorted(self.pmf.items())},
            "mode_mhz": self.mode_mhz,
            "mode_probability": self.mode_probability,
        }


def freq_likelihood(samples, drone_type: str = "") -> FreqLikelihood:
    """Empirical PMF over observed channels; mode ties go to the lowest."""
    values = [float(v) for v in samples]
    if not values:
        raise DataError("no frequency samples")
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    n = len(values)
    pmf = {ch: c / n for ch, c in counts.items()}
    mode = min(ch for ch, p in pmf.items() if p == max(pmf.values()))
    return FreqLikelihood(
        drone_type=drone_type,
        pmf=pmf,
        mode_mhz=mode,
        mode_probability=pmf[mode],
    )


@dataclass(frozen=True)
class DistanceSeries:
    """Range-to-sensor and altitude over time for one track."""

    sensor: str
    distances: tuple  # ((t_ms, distance_m), ...)
    altitudes: tuple  # ((t_ms, alt_m), ...)

    def __post_init__(self):
        ts = [t for t, _ in self.distances]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise DataError("distance series timestamps must be non-decreasing")
        if any(d < 0.0 for _, d in self.distances):
            raise DataError("negative distance")

    def to_csv(self) -> str:
        lines = ["timestamp,distance_m,alt_m"]
        for (t, d), (_, alt) in zip(self.distances, self.altitudes):
            lines.append(f"{t},{repr(float(d))},{repr(float(alt))}")
        return "\n".join(lines) + "\n"


def distance_series(track, sensor: SensorSpec) -> DistanceSeries:
    """3D range to the sensor plus drone altitude, one pair per record."""
    records: list[DroneLogRecord] = sorted(track, key=lambda r: r.t)
    if not records:
        raise DataError("empty track")
    distances = []
    altitudes = []
    for rec in records:
        distances.append((rec.t, distance_3d_m(sensor.position, rec.position)))
        altitudes.append((rec.t, rec.position.alt_m if rec.position.alt_m is not None else 0.0))
    return DistanceSeries(
        sensor=sensor.name, distances=tuple(distances), altitudes=tuple(altitudes)
    )


def scenario_rf_profile(scenario, tolerance_ms: int = 1000, radius_m: float = 100.0) -> dict:
    """Attribute every sensor sample to a drone and collect its signatures.

    Each reading pairs with the nearest-in-time truth record; readings with
    no record inside tolerance_ms are discarded. Radar returns must also
    sit within radius_m of that record's position, which keeps clutter and
    displaced glitches out of the cross-section statistics. RF readings
    carry no position and match on time alone.

    Returns {"rcs": {type: [dBsm]}, "freq": {type: [MHz]},
    "tracks": {type: [DroneLogRecord]}}, types keyed by display name.
    """
    if scenario.drone_log is None:
        raise DataError("scenario has no drone log")
    records = sorted(scenario.drone_log, key=lambda rec: rec.t)
    if not records:
        raise DataError("empty drone log")
    times = [rec.t for rec in records]
    rcs: dict[str, list] = {}
    freq: dict[str, list] = {}
    tracks: dict[str, list] = {}
    for rec in records:
        tracks.setdefault(rec.type.value, []).append(rec)
    for readings in scenario.sensors.values():
        for r in readings:
            j = bisect.bisect_left(times, r.t)
            best = None
            if j > 0:
                best = j - 1
            if j < len(times) and (best is None or times[j] - r.t < r.t - times[best]):
                best = j
            if best is None or abs(times[best] - r.t) > tolerance_ms:
                continue
            rec = records[best]
            name = rec.type.value
            if r.freq_mhz is not None:
                freq.setdefault(name, []).append(float(r.freq_mhz))
            if r.rcs_dbsm is not None and r.position is not None:
                if haversine_m(r.position, rec.position) <= radius_m:
                    rcs.setdefault(name, []).append(float(r.rcs_dbsm))
    return {"rcs": rcs, "freq": freq, "tracks": tracks}
