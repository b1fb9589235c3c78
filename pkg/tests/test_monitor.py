"""Receiving-side tests: storage partition, alert semantics, agreement
metrics with a Monte-Carlo oracle, and CSV round-tripping.
"""

from __future__ import annotations

import math
import random
import statistics

import pytest
from hypothesis import given, strategies as st

from thermnet.frames import SensorId, make_sensor_id
from thermnet.monitor import (
    Alert,
    AlertRule,
    EmptySeries,
    Reading,
    ReadingStore,
    agreement,
    evaluate_alerts,
    export_store,
    import_store,
)
from thermnet.rng import gauss
from thermnet.traces import ConstantTrace

RULE = AlertRule()


def reading(serial, t, temp_c, seq=None):
    raw = round(temp_c / 0.0625)
    return Reading(
        sensor_id=make_sensor_id(serial=serial),
        time_s=float(t),
        raw=raw,
        sequence=seq if seq is not None else int(t),
        total_delay_s=0.777,
        sample_time_s=float(t) - 0.777,
    )


def series_from(temps, serial=1):
    return [reading(serial, t, c, seq=t) for t, c in enumerate(temps)]


# -- store -------------------------------------------------------------


def test_interleaved_ingest_partitions_by_id():
    store = ReadingStore()
    for t in range(10):
        store.ingest(reading(1, t, 36.5))
        store.ingest(reading(2, t, 30.0))
    one, two = make_sensor_id(serial=1), make_sensor_id(serial=2)
    assert len(store.series(one)) == 10
    assert len(store.series(two)) == 10
    assert all(r.sensor_id == one for r in store.series(one))
    assert all(r.sensor_id == two for r in store.series(two))
    assert store.total_stored() == 20


def test_duplicate_sequence_dropped_with_counter():
    store = ReadingStore()
    first = reading(1, 0, 36.5, seq=7)
    store.ingest(first)
    store.ingest(reading(1, 1, 37.5, seq=7))
    assert store.duplicate_count == 1
    assert store.series(make_sensor_id(serial=1)) == [first]


def test_unknown_sensor_counted_not_stored():
    store = ReadingStore(roster=[make_sensor_id(serial=1)])
    store.ingest(reading(2, 0, 30.0))
    assert store.unknown_count == 1
    assert store.total_stored() == 0


def test_invalid_id_counted_as_unknown():
    store = ReadingStore()
    sid = make_sensor_id(serial=3)
    forged = Reading(SensorId(sid.family_code, sid.serial, sid.crc ^ 1), 0.0, 100, 0, 0.0, 0.0)
    store.ingest(forged)
    assert store.unknown_count == 1


def test_out_of_order_arrival_is_time_sorted():
    store = ReadingStore()
    for t in (5, 1, 3, 2, 4, 0):
        store.ingest(reading(1, t, 36.0, seq=t))
    times = [r.time_s for r in store.series(make_sensor_id(serial=1))]
    assert times == sorted(times)


def test_empty_store_query():
    assert ReadingStore().series(make_sensor_id(serial=9)) == []


def test_partition_accounting():
    store = ReadingStore(roster=[make_sensor_id(serial=1)])
    total = 0
    for t in range(20):
        store.ingest(reading(1, t, 36.0, seq=t % 10))  # ten duplicates
        store.ingest(reading(2, t, 30.0, seq=t))  # all unknown
        total += 2
    assert store.total_stored() == total - store.duplicate_count - store.unknown_count


@given(st.permutations(list(range(12))))
def test_agreement_is_arrival_order_invariant(order):
    rng = random.Random(4)
    temps = [36.0 + rng.random() for _ in range(12)]
    store = ReadingStore()
    for index in order:
        store.ingest(reading(1, index, temps[index], seq=index))
    series = store.series(make_sensor_id(serial=1))
    report = agreement(series, ConstantTrace(36.5))
    baseline = agreement(series_from(temps), ConstantTrace(36.5))
    assert report.mae_c == baseline.mae_c
    assert report.max_err_c == baseline.max_err_c


# -- alerts ------------------------------------------------------------


def test_constant_normal_temperature_no_alerts():
    assert evaluate_alerts(series_from([37.0] * 20), RULE) == []


def test_step_fires_exactly_one_high_temp():
    temps = [37.0] * 10 + [39.0] * 10
    alerts = [a for a in evaluate_alerts(series_from(temps), RULE) if a.kind == "high_temp"]
    assert len(alerts) == 1
    assert alerts[0].trigger_time_s == 10.0
    assert alerts[0].value == 39.0


def test_square_wave_fires_once_per_excursion():
    temps = []
    for _ in range(4):
        temps += [36.5] * 5 + [38.5] * 5
    alerts = [a for a in evaluate_alerts(series_from(temps), RULE) if a.kind == "high_temp"]
    assert len(alerts) == 4


def test_ramp_triggers_rapid_rise_within_one_window():
    # 1 degC per minute from t=0 against a 0.5-per-minute rule.  Early
    # slopes over the quantized staircase are jumpy, so only the trigger
    # time and threshold crossing are pinned here.
    temps = [36.0 + t / 60.0 for t in range(120)]
    alerts = [a for a in evaluate_alerts(series_from(temps), RULE) if a.kind == "rapid_rise"]
    assert alerts
    assert alerts[0].trigger_time_s <= RULE.rise_window_s
    assert alerts[0].value >= RULE.rise_rate_c_per_min


def test_rise_rearms_after_plateau():
    up = [36.0 + t / 60.0 for t in range(60)]
    flat = [up[-1]] * 120
    up2 = [flat[-1] + t / 60.0 for t in range(60)]
    alerts = [a for a in evaluate_alerts(series_from(up + flat + up2), RULE) if a.kind == "rapid_rise"]
    assert len(alerts) == 2


def test_rise_alerts_match_stdlib_regression_oracle():
    # Replay the trailing-window scan with statistics.linear_regression
    # as the independent slope and verify identical trigger decisions.
    rng = random.Random(11)
    temps = [36.0 + 0.2 * math.sin(t / 7.0) + 0.05 * rng.random() for t in range(40)]
    series = series_from(temps)
    rule = AlertRule(rise_rate_c_per_min=0.3, rise_window_s=8.0)
    got = [(a.trigger_time_s, a.value) for a in evaluate_alerts(series, rule) if a.kind == "rapid_rise"]

    expected = []
    armed = True
    for i, r in enumerate(series):
        window = [p for p in series[: i + 1] if p.time_s >= r.time_s - rule.rise_window_s]
        slope = None
        if len(window) >= 2:
            fit = statistics.linear_regression(
                [p.time_s for p in window], [p.temp_c for p in window]
            )
            slope = fit.slope * 60.0
        if slope is not None and slope >= rule.rise_rate_c_per_min:
            if armed:
                expected.append((r.time_s, slope))
                armed = False
        else:
            armed = True

    assert expected
    assert len(got) == len(expected)
    for (got_t, got_v), (exp_t, exp_v) in zip(got, expected):
        assert got_t == exp_t
        assert got_v == pytest.approx(exp_v, abs=1e-9)


def test_alert_rule_validation():
    RULE.validate()
    with pytest.raises(ValueError):
        AlertRule(high_threshold_c=0).validate()


# -- agreement ---------------------------------------------------------


def test_exact_series_has_zero_error():
    series = series_from([36.5] * 10)
    report = agreement(series, ConstantTrace(36.5))
    assert report.mae_c == 0.0
    assert report.max_err_c == 0.0
    assert report.n == 10


def test_quantization_bound_zero_noise():
    series = series_from([36.53] * 50)  # quantizes to 36.5
    report = agreement(series, ConstantTrace(36.53))
    assert report.mae_c <= 0.03125
    assert report.max_err_c <= 0.03125


def test_noise_mae_matches_folded_normal_oracle():
    sigma, truth, n = 0.1, 37.0, 2000
    series = []
    for k in range(n):
        noisy = truth + sigma * gauss(77, k)
        series.append(reading(1, k, round(noisy / 0.0625) * 0.0625, seq=k))
    report = agreement(series, ConstantTrace(truth))
    errors = [abs(r.temp_c - truth) for r in series]
    stderr = statistics.pstdev(errors) / math.sqrt(n)
    bound = sigma * math.sqrt(2 / math.pi) + 0.03125
    assert report.mae_c <= bound + 3 * stderr
    # Quantization cannot push the mean error further than half a step
    # below the folded-normal mean either.
    assert report.mae_c >= sigma * math.sqrt(2 / math.pi) - 0.03125 - 3 * stderr


def test_agreement_uses_sample_time_not_delivery_time():
    # Truth changes between sampling and delivery; errors must be zero
    # because temp matches the trace at the conversion instant.
    sid = make_sensor_id(serial=1)
    series = [
        Reading(sid, time_s=t + 0.777, raw=round((36.0 + t) / 0.0625), sequence=t,
                total_delay_s=0.777, sample_time_s=float(t))
        for t in range(5)
    ]

    class StepTrace:
        def value(self, t, seed=0):
            return 36.0 + math.floor(t)

    report = agreement(series, StepTrace())
    assert report.max_err_c == 0.0


def test_empty_series_raises():
    with pytest.raises(EmptySeries):
        agreement([], ConstantTrace(36.5))


# -- export / import ---------------------------------------------------


def test_export_import_round_trip(tmp_path):
    store = ReadingStore()
    for t in range(60):
        store.ingest(reading(0x11A3, t + 0.785, 26.0 + (t % 5) * 0.8125, seq=t))
        store.ingest(reading(0x2B40, t + 0.792, 30.0, seq=t))
    files = export_store(store, tmp_path)
    assert (tmp_path / "plot_data.csv").exists()
    assert len(files) == 3
    again = import_store(tmp_path)
    assert again == store
    assert again.total_stored() == 120


def test_export_single_sensor_row_count(tmp_path):
    store = ReadingStore()
    for t in range(60):
        store.ingest(reading(1, t, 36.5, seq=t))
    export_store(store, tmp_path)
    lines = (tmp_path / f"sensor_{make_sensor_id(serial=1).hex()}.csv").read_text().splitlines()
    assert len(lines) == 62  # comment + header + 60 rows
    assert lines[0].startswith("#")


def test_export_empty_store(tmp_path):
    files = export_store(ReadingStore(), tmp_path)
    assert len(files) == 1
    lines = (tmp_path / "plot_data.csv").read_text().splitlines()
    assert len(lines) == 2
