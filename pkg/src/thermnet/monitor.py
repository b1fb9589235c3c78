"""Receiving-side software: series storage, alerting and accuracy checks.

This replaces the visualization GUI of the physical system with
CSV-producing equivalents: per-sensor time series keyed by ROM id,
high-temperature and rapid-rise alerts, and measured-versus-truth
agreement metrics.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .csvio import read_rows, write_csv
from .frames import SensorId, TEMP_LSB_C, validate_sensor_id
from .traces import TemperatureTrace

HIGH_TEMP = "high_temp"
RAPID_RISE = "rapid_rise"


class EmptySeries(ValueError):
    """Agreement asked for on a sensor with no stored readings."""


@dataclass(frozen=True)
class Reading:
    """One delivered measurement.

    ``time_s`` is the delivery (serial output) timestamp and
    ``sample_time_s`` the conversion-start instant the value physically
    refers to; accuracy metrics use the latter so transport delay does
    not bias them.  ``temp_c`` is always raw counts times the sensor
    resolution.
    """

    sensor_id: SensorId
    time_s: float
    raw: int
    sequence: int
    total_delay_s: float
    sample_time_s: float

    @property
    def temp_c(self) -> float:
        return self.raw * TEMP_LSB_C


@dataclass(frozen=True)
class AlertRule:
    high_threshold_c: float = 38.0
    rise_rate_c_per_min: float = 0.5
    rise_window_s: float = 60.0

    def validate(self) -> None:
        if self.high_threshold_c <= 0 or self.rise_rate_c_per_min <= 0 or self.rise_window_s <= 0:
            raise ValueError("alert rule values must be positive")


@dataclass(frozen=True)
class Alert:
    kind: str
    sensor_id: SensorId
    trigger_time_s: float
    value: float


@dataclass(frozen=True)
class AgreementReport:
    mae_c: float
    max_err_c: float
    n: int


class ReadingStore:
    """Per-sensor reading series with duplicate and roster filtering.

    A single writer ingests; ``series`` hands out copies so readers
    never observe a partially applied insert.  Arrival order does not
    matter: readings are kept sorted by delivery time, and duplicates
    are detected on (sensor, sequence).
    """

    def __init__(self, roster: Optional[Iterable[SensorId]] = None):
        self.roster = set(roster) if roster is not None else None
        self._series: dict[SensorId, list[Reading]] = {}
        self._seen: dict[SensorId, set[int]] = {}
        self.duplicate_count = 0
        self.unknown_count = 0

    def ingest(self, reading: Reading) -> None:
        sid = reading.sensor_id
        if not validate_sensor_id(sid) or (self.roster is not None and sid not in self.roster):
            self.unknown_count += 1
            return
        seen = self._seen.setdefault(sid, set())
        if reading.sequence in seen:
            self.duplicate_count += 1
            return
        seen.add(reading.sequence)
        series = self._series.setdefault(sid, [])
        bisect.insort(series, reading, key=lambda r: (r.time_s, r.sequence))

    def ingest_all(self, readings: Iterable[Reading]) -> None:
        for reading in readings:
            self.ingest(reading)

    def sensor_ids(self) -> list[SensorId]:
        return list(self._series)

    def series(self, sensor_id: SensorId) -> list[Reading]:
        return list(self._series.get(sensor_id, []))

    def total_stored(self) -> int:
        return sum(len(s) for s in self._series.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReadingStore):
            return NotImplemented
        return self._series == other._series


def evaluate_alerts(series: list[Reading], rule: AlertRule) -> list[Alert]:
    """Scan a time-ordered series for threshold and slope excursions.

    Each alert kind fires once per excursion and re-arms when the value
    (temperature, or fitted rise rate) drops back below its threshold.
    The rise rate is the least-squares slope over the trailing window,
    expressed in degC per minute.
    """
    alerts: list[Alert] = []
    high_armed = True
    rise_armed = True
    for i, reading in enumerate(series):
        if reading.temp_c >= rule.high_threshold_c:
            if high_armed:
                alerts.append(Alert(HIGH_TEMP, reading.sensor_id, reading.time_s, reading.temp_c))
                high_armed = False
        else:
            high_armed = True

        window = [r for r in series[: i + 1] if r.time_s >= reading.time_s - rule.rise_window_s]
        slope = _slope_c_per_min(window)
        if slope is not None and slope >= rule.rise_rate_c_per_min:
            if rise_armed:
                alerts.append(Alert(RAPID_RISE, reading.sensor_id, reading.time_s, slope))
                rise_armed = False
        else:
            rise_armed = True
    return alerts


def _slope_c_per_min(window: list[Reading]) -> Optional[float]:
    """Least-squares slope of temp vs time, or None below two points."""
    n = len(window)
    if n < 2:
        return None
    mean_t = math.fsum(r.time_s for r in window) / n
    mean_c = math.fsum(r.temp_c for r in window) / n
    sxx = math.fsum((r.time_s - mean_t) ** 2 for r in window)
    if sxx == 0.0:
        return None
    sxy = math.fsum((r.time_s - mean_t) * (r.temp_c - mean_c) for r in window)
    return (sxy / sxx) * 60.0


def agreement(series: list[Reading], truth: TemperatureTrace, seed: int = 0) -> AgreementReport:
    """Mean absolute and max error against the ground-truth trace.

    Truth is evaluated at each reading's conversion-start time.
    """
    if not series:
        raise EmptySeries("no readings to compare")
    errors = [abs(r.temp_c - truth.value(r.sample_time_s, seed)) for r in series]
    return AgreementReport(
        mae_c=math.fsum(errors) / len(errors),
        max_err_c=max(errors),
        n=len(errors),
    )


READING_COLUMNS = ["time_s", "sample_time_s", "raw", "temp_c", "sequence", "total_delay_s"]


def export_store(store: ReadingStore, out_dir: str | Path) -> list[Path]:
    """Write one CSV per sensor plus a wide plot-data file.

    The plot-data file has a time column and one temperature column per
    sensor, ready for external charting.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    ids = sorted(store.sensor_ids(), key=lambda s: (s.serial, s.family_code))
    for sid in ids:
        path = out / f"sensor_{sid.hex()}.csv"
        rows = [
            [r.time_s, r.sample_time_s, r.raw, r.temp_c, r.sequence, r.total_delay_s]
            for r in store.series(sid)
        ]
        write_csv(path, f"sensor {sid.hex()}", READING_COLUMNS, rows)
        written.append(path)

    merged = sorted(
        ((r, sid) for sid in ids for r in store.series(sid)),
        key=lambda pair: (pair[0].time_s, pair[1].serial, pair[0].sequence),
    )
    header = ["time_s"] + [sid.hex() for sid in ids]
    plot_rows = []
    for reading, sid in merged:
        row: list[object] = [reading.time_s] + [""] * len(ids)
        row[1 + ids.index(sid)] = reading.temp_c
        plot_rows.append(row)
    plot_path = out / "plot_data.csv"
    write_csv(plot_path, "plot data", header, plot_rows)
    written.append(plot_path)
    return written


def import_store(out_dir: str | Path, roster: Optional[Iterable[SensorId]] = None) -> ReadingStore:
    """Rebuild a store from the per-sensor CSVs written by export_store."""
    store = ReadingStore(roster)
    for path in sorted(Path(out_dir).glob("sensor_*.csv")):
        sid = SensorId.from_hex(path.stem.removeprefix("sensor_"))
        for row in read_rows(path):
            store.ingest(
                Reading(
                    sensor_id=sid,
                    time_s=float(row["time_s"]),
                    raw=int(row["raw"]),
                    sequence=int(row["sequence"]),
                    total_delay_s=float(row["total_delay_s"]),
                    sample_time_s=float(row["sample_time_s"]),
                )
            )
    return store
