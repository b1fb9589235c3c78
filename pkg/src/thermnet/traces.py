"""Synthetic temperature traces driving the simulated sensors.

A trace maps (time, seed) to a ground-truth temperature in degC.  All
kinds are pure functions, so the same instant always re-evaluates to the
same value; this is what lets the monitor compare measurements against
truth after the fact.

Trace spec strings (used in config files and on the CLI):

    constant:<c>
    ramp:<start_c>,<rate_c_per_min>
    sinusoid:<mean_c>,<amplitude_c>,<period_s>[,<phase_rad>]
    band:<low_c>,<high_c>
    csv:<path>
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .rng import float_key, unit_uniform

_BAND_STREAM = 0x7B


@dataclass(frozen=True)
class ConstantTrace:
    value_c: float

    def value(self, t: float, seed: int = 0) -> float:
        return self.value_c

    def spec(self) -> str:
        return f"constant:{self.value_c!r}"


@dataclass(frozen=True)
class RampTrace:
    start_c: float
    rate_c_per_min: float

    def value(self, t: float, seed: int = 0) -> float:
        return self.start_c + self.rate_c_per_min * (t / 60.0)

    def spec(self) -> str:
        return f"ramp:{self.start_c!r},{self.rate_c_per_min!r}"


@dataclass(frozen=True)
class SinusoidTrace:
    mean_c: float
    amplitude_c: float
    period_s: float
    phase_rad: float = 0.0

    def value(self, t: float, seed: int = 0) -> float:
        return self.mean_c + self.amplitude_c * math.sin(
            2.0 * math.pi * t / self.period_s + self.phase_rad
        )

    def spec(self) -> str:
        return f"sinusoid:{self.mean_c!r},{self.amplitude_c!r},{self.period_s!r},{self.phase_rad!r}"


@dataclass(frozen=True)
class BandNoiseTrace:
    """Uniform fluctuation between a lower and an upper band."""

    low_c: float
    high_c: float

    def value(self, t: float, seed: int = 0) -> float:
        u = unit_uniform(seed, _BAND_STREAM, float_key(t))
        return self.low_c + (self.high_c - self.low_c) * u

    def spec(self) -> str:
        return f"band:{self.low_c!r},{self.high_c!r}"


@dataclass(frozen=True)
class CsvTrace:
    """Piecewise-linear trace loaded from a (time_s, temp_c) CSV file."""

    times_s: tuple[float, ...]
    temps_c: tuple[float, ...]
    source: str = ""

    @classmethod
    def load(cls, path: str | Path) -> "CsvTrace":
        times: list[float] = []
        temps: list[float] = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    t, c = float(row[0]), float(row[1])
                except (IndexError, ValueError):
                    # Tolerate a single header row.
                    if not times:
                        continue
                    raise ValueError(f"bad trace row in {path}: {row!r}") from None
                times.append(t)
                temps.append(c)
        if not times:
            raise ValueError(f"trace file {path} has no data rows")
        pairs = sorted(zip(times, temps))
        times = [p[0] for p in pairs]
        temps = [p[1] for p in pairs]
        return cls(tuple(times), tuple(temps), str(path))

    def value(self, t: float, seed: int = 0) -> float:
        times = self.times_s
        if t <= times[0]:
            return self.temps_c[0]
        if t >= times[-1]:
            return self.temps_c[-1]
        i = bisect.bisect_right(times, t)
        t0, t1 = times[i - 1], times[i]
        c0, c1 = self.temps_c[i - 1], self.temps_c[i]
        if t1 == t0:
            return c1
        return c0 + (c1 - c0) * (t - t0) / (t1 - t0)

    def spec(self) -> str:
        return f"csv:{self.source}"


TemperatureTrace = Union[ConstantTrace, RampTrace, SinusoidTrace, BandNoiseTrace, CsvTrace]


def parse_trace(spec: str, base_dir: str | Path | None = None) -> TemperatureTrace:
    """Build a trace from its spec string; see the module docstring."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "constant":
            return ConstantTrace(float(rest))
        if kind == "ramp":
            start, rate = (float(x) for x in rest.split(","))
            return RampTrace(start, rate)
        if kind == "sinusoid":
            parts = [float(x) for x in rest.split(",")]
            if len(parts) == 3:
                parts.append(0.0)
            mean, amp, period, phase = parts
            if period <= 0:
                raise ValueError("sinusoid period must be positive")
            return SinusoidTrace(mean, amp, period, phase)
        if kind == "band":
            low, high = (float(x) for x in rest.split(","))
            if high < low:
                raise ValueError("band upper bound below lower bound")
            return BandNoiseTrace(low, high)
        if kind == "csv":
            path = Path(rest.strip())
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            return CsvTrace.load(path)
    except ValueError as exc:
        raise ValueError(f"bad trace spec {spec!r}: {exc}") from None
    raise ValueError(f"unknown trace kind {kind!r} in {spec!r}")
