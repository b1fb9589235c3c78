"""Deterministic discrete-event simulation of the sensor cell.

Nodes sample their temperature trace, frame the reading, and contend
for the shared radio under either the slotted (beacon-synchronized)
MAC or a send-on-ready mode with no arbitration.  The access point
receives, decodes and forwards to the serial side.  Every action is an
event on one queue ordered by (time, insertion sequence), so a run is
a pure function of the scenario config and seed.

Each delivered packet carries its full stage-by-stage timestamp record;
differencing those timestamps reproduces the analytical delay terms,
which is how the closed-form model and the simulator check each other.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from .config import NodeSpec, ScenarioConfig, TDMA
from .delays import (
    DelayBudget,
    DelayParams,
    airtime,
    mcu_prep_delay,
    propagation_delay,
    serial_delay,
    usb_delay,
)
from .energy import (
    ACTIVE,
    IDLE,
    MCU,
    RADIO,
    RECEIVE,
    SENSOR,
    TRANSMIT,
    EnergyLedger,
    accrue,
)
from .frames import FRAME_BITS, Frame, FrameError, SensorId, TEMP_LSB_C, decode_frame, encode_frame
from .mac import (
    Action,
    MacState,
    Phase,
    SlotSchedule,
    build_schedule,
    finish_transmission,
    mac_step,
    queue_frame,
    synchronize,
)
from .monitor import Reading
from .rng import float_key, gauss
from .traces import TemperatureTrace

AP = "ap"

BEACON = "beacon"
CONVERSION_DONE = "conversion_done"
SLOT_START = "slot_start"
RSSI_SAMPLE = "rssi_sample"
TX_START = "tx_start"
TX_END = "tx_end"
RX_DELIVER = "rx_deliver"
RX_COLLISION = "rx_collision"
SERIAL_OUT = "serial_out"

LOGGED_KINDS = frozenset(
    {BEACON, CONVERSION_DONE, SLOT_START, RSSI_SAMPLE, TX_START, TX_END, RX_DELIVER, RX_COLLISION, SERIAL_OUT}
)

# Internal queue entries that never reach the event log.
_CONVERSION_START = "_conversion_start"
_FRAME_READY = "_frame_ready"
_INTF_BURST = "_interferer_burst"
_INTF_END = "_interferer_end"

_NOISE_STREAM = 0x5E


@dataclass(frozen=True)
class SimEvent:
    """One logged occurrence; the log is ordered by (time_s, seq)."""

    time_s: float
    seq: int
    kind: str
    subject: str
    detail: str = ""
    payload: Optional[Frame] = None


@dataclass
class Transmission:
    """A signal on the air; collided is set while overlaps are live."""

    sender: str
    start_s: float
    end_s: float
    frame: bytes
    distance_m: float
    collided: bool = False


class Medium:
    """Shared radio channel with a binary in-range/out-of-range disk."""

    def __init__(self, range_m: float = 100.0):
        self.range_m = range_m
        self.active: list[Transmission] = []

    def in_ap_range(self, tx: Transmission) -> bool:
        return tx.distance_m <= self.range_m

    def busy_at(self, t: float, listener_distance_m: float) -> bool:
        """RSSI verdict: any audible signal on the air at time t.

        Senders sit on a line through the access point, so the listener
        hears a transmission when the sender is within range of it.
        """
        return any(
            tx.start_s <= t < tx.end_s
            and abs(tx.distance_m - listener_distance_m) <= self.range_m
            for tx in self.active
        )

    def finish(self, tx: Transmission) -> None:
        self.active.remove(tx)


def medium_transmit(medium: Medium, tx: Transmission) -> Transmission:
    """Put a transmission on the air and flag overlaps at the receiver.

    Any time overlap between two signals both audible at the access
    point destroys both; there is no capture of the stronger one.  The
    outcome is final once the transmission's end time has passed, since
    a later sender can still collide with it; callers read ``collided``
    at end time.
    """
    if tx.end_s <= tx.start_s:
        raise ValueError("transmission must have positive duration")
    for other in medium.active:
        if tx.start_s < other.end_s and other.start_s < tx.end_s:
            if medium.in_ap_range(tx) and medium.in_ap_range(other):
                tx.collided = True
                other.collided = True
    medium.active.append(tx)
    return tx


@dataclass(frozen=True)
class SensorModel:
    """Digital thermometer behavior: quantization, range, conversion lag."""

    trace: TemperatureTrace
    resolution_c: float = TEMP_LSB_C
    conversion_time_s: float = 0.750
    noise_sigma_c: float = 0.1
    min_c: float = -55.0
    max_c: float = 125.0


def sense_and_quantize(sensor: SensorModel, t_s: float, seed: int, node_key: int = 0) -> int:
    """Raw counts for the temperature at t_s, with seeded Gaussian noise.

    The value is determined at conversion start; the device only makes
    it readable conversion_time_s later (the engine enforces that lag).
    """
    if t_s < 0:
        raise ValueError("t_s must be >= 0")
    true_c = sensor.trace.value(t_s, seed)
    noise_c = 0.0
    if sensor.noise_sigma_c > 0:
        noise_c = sensor.noise_sigma_c * gauss(seed, _NOISE_STREAM, node_key, float_key(t_s))
    counts = round((true_c + noise_c) / sensor.resolution_c)
    lo = round(sensor.min_c / sensor.resolution_c)
    hi = round(sensor.max_c / sensor.resolution_c)
    return min(max(counts, lo), hi)


def access_point_forward(arrival_s: float, bits: int, params: DelayParams) -> tuple[float, float, float]:
    """Receiver-side pipeline: mode switch, serial transfer, USB hop.

    Returns (serial_start_s, usb_start_s, serial_out_s) for a frame
    that finished arriving at arrival_s.
    """
    serial_start = arrival_s + params.radio_switch_delay_s
    usb_start = serial_start + serial_delay(bits, params)
    serial_out = usb_start + usb_delay(bits, params)
    return serial_start, usb_start, serial_out


@dataclass
class MeasuredDelay:
    """Stage timestamps of one packet, filled in as events fire.

    budget() differences them into the eight analytical terms; the
    queue wait between frame-ready and the transmit decision is real
    time but not part of the per-packet budget.
    """

    sensor_id: SensorId
    sequence: int
    distance_m: float
    conversion_start_s: float = math.nan
    conversion_done_s: float = math.nan
    frame_ready_s: float = math.nan
    decision_s: float = math.nan
    tx_start_s: float = math.nan
    tx_end_s: float = math.nan
    arrival_s: float = math.nan
    serial_start_s: float = math.nan
    usb_start_s: float = math.nan
    serial_out_s: float = math.nan

    @property
    def queue_wait_s(self) -> float:
        return self.decision_s - self.frame_ready_s

    def budget(self) -> DelayBudget:
        t1 = self.frame_ready_s - self.conversion_done_s
        t2 = self.tx_start_s - self.decision_s
        t3 = self.arrival_s - self.tx_end_s
        t4 = self.tx_end_s - self.tx_start_s
        t5 = self.serial_start_s - self.arrival_s
        t6 = self.usb_start_s - self.serial_start_s
        t7 = self.conversion_done_s - self.conversion_start_s
        t8 = self.serial_out_s - self.usb_start_s
        total = t1 + t2 + t3 + t4 + t5 + t6 + t7 + t8
        return DelayBudget(t1, t2, t3, t4, t5, t6, t7, t8, total)


@dataclass
class SimStats:
    conversions: int = 0
    frames_queued: int = 0
    transmissions: int = 0
    delivered: int = 0
    collisions: int = 0
    corrupt: int = 0
    deferrals: int = 0
    beacons: int = 0
    out_of_range: int = 0
    replaced_pending: int = 0


@dataclass(frozen=True)
class SimResult:
    events: list[SimEvent]
    readings: list[Reading]
    ledgers: dict[str, EnergyLedger]
    delay_samples: list[MeasuredDelay]
    stats: SimStats
    schedule: Optional[SlotSchedule]
    end_time_s: float


@dataclass
class _Node:
    spec: NodeSpec
    sensor_id: SensorId
    sensor: SensorModel
    mac: MacState
    index: int
    ledger: EnergyLedger = field(default_factory=EnergyLedger)
    inflight: dict[int, MeasuredDelay] = field(default_factory=dict)
    radio_active_s: float = 0.0
    sensor_active_s: float = 0.0
    mcu_active_s: float = 0.0

    @property
    def subject(self) -> str:
        return self.sensor_id.hex()


class _Engine:
    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.config = config
        self.params = config.delay_params
        self.profile = config.power_profile
        self.medium = Medium(config.range_m)
        self.end_time_s = float(config.duration_s)
        self.now = 0.0
        self.events: list[SimEvent] = []
        self.readings: list[Reading] = []
        self.delay_samples: list[MeasuredDelay] = []
        self.stats = SimStats()
        self._heap: list[tuple[float, int, str, tuple]] = []
        self._heap_seq = itertools.count()
        self._log_seq = itertools.count()

        self.nodes: list[_Node] = []
        for i, spec in enumerate(config.nodes):
            sid = spec.sensor_id(config.family_code)
            sensor = SensorModel(
                trace=spec.trace,
                conversion_time_s=self.params.sensor_conversion_s,
                noise_sigma_c=config.noise_sigma_c,
            )
            self.nodes.append(_Node(spec, sid, sensor, MacState(node_id=sid), index=i))
        self._by_id = {n.sensor_id: n for n in self.nodes}

        self.schedule: Optional[SlotSchedule] = None
        if config.mac_mode == TDMA:
            self.schedule = build_schedule(
                [n.sensor_id for n in self.nodes],
                FRAME_BITS,
                self.params,
                guard_s=config.guard_s,
                beacon_s=config.beacon_s,
            )

    # -- queue plumbing ------------------------------------------------

    def _push(self, time_s: float, kind: str, *payload) -> None:
        assert time_s >= self.now - 1e-12, f"{kind} scheduled in the past"
        heapq.heappush(self._heap, (time_s, next(self._heap_seq), kind, payload))

    def _log(self, kind: str, subject: str, detail: str = "", payload: Optional[Frame] = None) -> None:
        assert kind in LOGGED_KINDS
        self.events.append(SimEvent(self.now, next(self._log_seq), kind, subject, detail, payload))

    # -- run -----------------------------------------------------------

    def run(self) -> SimResult:
        if self.end_time_s > 0:
            self._seed_events()
        while self._heap:
            time_s, _, kind, payload = heapq.heappop(self._heap)
            if time_s > self.end_time_s:
                break
            self.now = time_s
            getattr(self, "_on" + kind if kind.startswith("_") else "_on_" + kind)(*payload)
        return self._finish()

    def _seed_events(self) -> None:
        if self.schedule is not None:
            self._push(0.0, BEACON)
        period = self.config.sample_period_s
        n_samples = math.ceil(self.end_time_s / period)
        for k in range(n_samples):
            t = k * period
            if t >= self.end_time_s:
                break
            for node in self.nodes:
                self._push(t, _CONVERSION_START, node, k)
        for intf in self.config.interferers:
            self._push(intf.start_s, _INTF_BURST, intf)

    def _finish(self) -> SimResult:
        end = self.end_time_s
        ledgers: dict[str, EnergyLedger] = {}
        for node in self.nodes:
            led = node.ledger
            led = accrue(led, self.profile, RADIO, IDLE, end - node.radio_active_s)
            led = accrue(led, self.profile, SENSOR, IDLE, end - node.sensor_active_s)
            led = accrue(led, self.profile, MCU, IDLE, end - node.mcu_active_s)
            ledgers[node.subject] = led
        # The access point listens for the whole run.
        ledgers[AP] = accrue(EnergyLedger(), self.profile, RADIO, RECEIVE, end)
        return SimResult(
            events=self.events,
            readings=self.readings,
            ledgers=ledgers,
            delay_samples=self.delay_samples,
            stats=self.stats,
            schedule=self.schedule,
            end_time_s=end,
        )

    # -- node-side handlers --------------------------------------------

    def _on_conversion_start(self, node: _Node, k: int) -> None:
        self.stats.conversions += 1
        raw = sense_and_quantize(node.sensor, self.now, self.config.seed, node.index)
        done = self.now + node.sensor.conversion_time_s
        self._push(done, CONVERSION_DONE, node, k, raw, self.now)

    def _on_conversion_done(self, node: _Node, k: int, raw: int, started_s: float) -> None:
        self._log(CONVERSION_DONE, node.subject, f"k={k} raw={raw}")
        node.ledger = accrue(node.ledger, self.profile, SENSOR, ACTIVE, node.sensor.conversion_time_s)
        node.sensor_active_s += node.sensor.conversion_time_s
        md = MeasuredDelay(
            sensor_id=node.sensor_id,
            sequence=k % (1 << 16),
            distance_m=node.spec.distance_m,
            conversion_start_s=started_s,
            conversion_done_s=self.now,
        )
        self._push(self.now + mcu_prep_delay(self.params), _FRAME_READY, node, md, raw)

    def _on_frame_ready(self, node: _Node, md: MeasuredDelay, raw: int) -> None:
        md.frame_ready_s = self.now
        node.ledger = accrue(node.ledger, self.profile, MCU, ACTIVE, mcu_prep_delay(self.params))
        node.mcu_active_s += mcu_prep_delay(self.params)
        frame = Frame(node.sensor_id, raw_temp=raw, sequence=md.sequence)

        stale = node.mac.pending_frame
        if stale is not None and node.mac.phase in (Phase.WAITING_SLOT, Phase.SENSING_CHANNEL):
            # A still-undelivered older reading is superseded by this one.
            node.inflight.pop(stale.sequence, None)
            self.stats.replaced_pending += 1
        node.inflight[md.sequence] = md
        self.stats.frames_queued += 1

        if self.schedule is None:
            md.decision_s = self.now
            self._push(self.now + self.params.radio_switch_delay_s, TX_START, node, frame, md)
            return
        node.mac = queue_frame(node.mac, frame, self.now, self.schedule)
        self._push(node.mac.next_slot_start_s, SLOT_START, node)

    def _on_slot_start(self, node: _Node) -> None:
        mac = node.mac
        if (
            mac.phase is not Phase.WAITING_SLOT
            or mac.pending_frame is None
            or abs(self.now - mac.next_slot_start_s) > 1e-9
        ):
            return  # superseded by a defer or a replacement frame
        self._log(SLOT_START, node.subject)
        node.mac, action = mac_step(node.mac, self.now, None, self.schedule)
        if action is not Action.START_RSSI:
            return
        busy = self.medium.busy_at(self.now, node.spec.distance_m)
        self._log(RSSI_SAMPLE, node.subject, "busy" if busy else "free")
        node.mac, action = mac_step(node.mac, self.now, busy, self.schedule)
        if action is Action.START_TX:
            frame = node.mac.pending_frame
            md = node.inflight[frame.sequence]
            md.decision_s = self.now
            self._push(self.now + self.params.radio_switch_delay_s, TX_START, node, frame, md)
        elif action is Action.DEFER_TO_NEXT_FRAME:
            self.stats.deferrals += 1
            self._push(node.mac.next_slot_start_s, SLOT_START, node)

    def _on_tx_start(self, node: _Node, frame: Frame, md: MeasuredDelay) -> None:
        word = encode_frame(frame.sensor_id, frame.raw_temp, frame.sequence)
        tx = Transmission(
            sender=node.subject,
            start_s=self.now,
            end_s=self.now + airtime(FRAME_BITS, self.params),
            frame=word,
            distance_m=node.spec.distance_m,
        )
        medium_transmit(self.medium, tx)
        md.tx_start_s = self.now
        self.stats.transmissions += 1
        self._log(TX_START, node.subject, f"seq={frame.sequence}", payload=frame)
        self._push(tx.end_s, TX_END, node, tx, md)

    def _on_tx_end(self, node: _Node, tx: Transmission, md: MeasuredDelay) -> None:
        md.tx_end_s = self.now
        self._log(TX_END, node.subject, f"collided={tx.collided}")
        self.medium.finish(tx)
        dur = tx.end_s - tx.start_s
        node.ledger = accrue(node.ledger, self.profile, RADIO, TRANSMIT, dur)
        node.radio_active_s += dur
        if self.schedule is not None:
            node.mac = finish_transmission(node.mac)
        if not self.medium.in_ap_range(tx):
            self.stats.out_of_range += 1
            node.inflight.pop(md.sequence, None)
            return
        arrival = self.now + propagation_delay(tx.distance_m, self.params)
        if tx.collided:
            self._push(arrival, RX_COLLISION, tx, md)
        else:
            self._push(arrival, RX_DELIVER, tx, md)

    # -- access-point handlers -----------------------------------------

    def _on_rx_collision(self, tx: Transmission, md: Optional[MeasuredDelay]) -> None:
        self._log(RX_COLLISION, AP, f"from={tx.sender}")
        self.stats.collisions += 1
        if md is not None:
            node = self._by_id.get(md.sensor_id)
            if node is not None:
                node.inflight.pop(md.sequence, None)

    def _on_rx_deliver(self, tx: Transmission, md: Optional[MeasuredDelay]) -> None:
        try:
            frame = decode_frame(tx.frame)
        except FrameError as exc:
            self.stats.corrupt += 1
            self._log(RX_DELIVER, AP, f"from={tx.sender} corrupt={type(exc).__name__}")
            return
        self._log(RX_DELIVER, AP, f"from={tx.sender} seq={frame.sequence}", payload=frame)
        if md is None:
            return
        md.arrival_s = self.now
        serial_start, usb_start, out = access_point_forward(self.now, FRAME_BITS, self.params)
        md.serial_start_s = serial_start
        md.usb_start_s = usb_start
        self._push(out, SERIAL_OUT, frame, md)

    def _on_serial_out(self, frame: Frame, md: MeasuredDelay) -> None:
        md.serial_out_s = self.now
        self._log(SERIAL_OUT, AP, f"id={frame.sensor_id.hex()} seq={frame.sequence}", payload=frame)
        self.stats.delivered += 1
        budget = md.budget()
        self.readings.append(
            Reading(
                sensor_id=frame.sensor_id,
                time_s=self.now,
                raw=frame.raw_temp,
                sequence=frame.sequence,
                total_delay_s=budget.total,
                sample_time_s=md.conversion_start_s,
            )
        )
        self.delay_samples.append(md)
        node = self._by_id.get(frame.sensor_id)
        if node is not None:
            node.inflight.pop(md.sequence, None)

    # -- shared-cell handlers ------------------------------------------

    def _on_beacon(self) -> None:
        k = self.stats.beacons
        self._log(BEACON, AP, f"n={k}")
        self.stats.beacons += 1
        for node in self.nodes:
            node.mac = synchronize(node.mac, self.now, self.schedule)
        # k*period (not repeated addition) so beacon times bit-match the
        # slot arithmetic in next_slot_time and drift cannot accumulate.
        self._push((k + 1) * self.schedule.frame_period_s, BEACON)

    def _on_interferer_burst(self, intf) -> None:
        bits = intf.bits
        word = bytes(max(1, math.ceil(bits / 8)))
        tx = Transmission(
            sender=intf.name,
            start_s=self.now,
            end_s=self.now + airtime(bits, self.params),
            frame=word,
            distance_m=intf.distance_m,
        )
        medium_transmit(self.medium, tx)
        self._log(TX_START, intf.name, f"bits={bits}")
        self._push(tx.end_s, _INTF_END, intf, tx)
        self._push(self.now + intf.period_s, _INTF_BURST, intf)

    def _on_interferer_end(self, intf, tx: Transmission) -> None:
        self._log(TX_END, intf.name, f"collided={tx.collided}")
        self.medium.finish(tx)
        if not self.medium.in_ap_range(tx):
            return
        arrival = self.now + propagation_delay(tx.distance_m, self.params)
        if tx.collided:
            self._push(arrival, RX_COLLISION, tx, None)
        else:
            self._push(arrival, RX_DELIVER, tx, None)


def run_scenario(config: ScenarioConfig) -> SimResult:
    """Simulate one scenario; raises ConfigError on invalid configs.

    Identical (config, seed) pairs produce identical results, event for
    event and byte for byte once serialized.
    """
    return _Engine(config).run()
