"""Deterministic event-driven network simulation.

Binds random waypoint mobility, the reception models, an idealized shared-
medium MAC, CBR traffic, and the routing protocols (predictive Q-routing,
greedy geographic, flooding).  A run is a pure function of its scenario,
seed included: periodic events are pre-scheduled in time order and all
randomness flows through generators derived from the scenario seed with a
stable hash, so re-runs are bit-identical.
"""

from __future__ import annotations

import hashlib
import heapq
import math
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass, field, replace
from random import Random
from typing import Callable

from . import channel as radio
from .channel import LinkBudget, default_budget
from .chirp import CHIRP_SIZE, decode_chirp, encode_chirp
from .errors import ConfigError
from .kinematics import (
    KinematicState,
    MobilityConfig,
    Vec3,
    make_random_waypoint_state,
    predict_position,
    step_random_waypoint,
)
from .routing import Forward, RoutingParams, RoutingState

PROTOCOLS = ("parrot", "greedy", "flood")

DROP_NO_ROUTE = "no-route"
DROP_TTL = "ttl"
DROP_COLLISION = "collision"
DROP_CHANNEL = "channel"
DROP_QUEUE = "queue"
DROP_CAUSES = (DROP_NO_ROUTE, DROP_TTL, DROP_COLLISION, DROP_CHANNEL, DROP_QUEUE)


def stable_seed(*parts) -> int:
    """Derive a reproducible 63-bit seed from arbitrary parts.

    Python's builtin hash() is process-randomized for strings, so seeds are
    derived from a cryptographic digest instead.
    """
    text = "\x1f".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & (2**63 - 1)


@dataclass
class Scenario:
    """Everything one simulation run depends on."""

    nodes: int = 10
    box: Vec3 = field(default_factory=lambda: Vec3(500.0, 500.0, 250.0))
    speed: float = 50.0 / 3.6  # m/s
    duration: float = 900.0
    warmup: float = 30.0  # seconds excluded from PDR / latency measurement
    cbr_rate: float = 2e6  # bit/s
    payload: int = 1400  # bytes per application packet
    protocol: str = "parrot"
    channel: str = radio.RURAL
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    routing: RoutingParams = field(default_factory=RoutingParams)
    budget: LinkBudget = field(default_factory=default_budget)
    seed: int = 1
    link_rate: float = 24e6  # bit/s nominal MAC rate
    header_overhead: int = 28  # bytes charged per frame (IP + UDP)
    queue_limit: int = 100
    retry_limit: int = 3
    retry_backoff: float = 1e-3
    hop_budget: int = 32
    forward_jitter: float = 5e-3  # chirp re-broadcast desync, seconds
    trace_path: str | None = None

    def validate(self) -> None:
        if self.nodes < 2:
            raise ConfigError(f"need at least 2 nodes, got {self.nodes}")
        if self.duration <= 0:
            raise ConfigError("duration must be > 0")
        if not 0 <= self.warmup < self.duration:
            raise ConfigError("warmup must lie inside the run duration")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol '{self.protocol}'")
        if self.channel not in radio.CHANNEL_MODELS:
            raise ConfigError(f"unknown channel '{self.channel}'")
        if self.cbr_rate <= 0 or self.payload <= 0:
            raise ConfigError("traffic rate and payload must be > 0")
        if self.link_rate <= 0:
            raise ConfigError("link rate must be > 0")
        if self.speed < 0:
            raise ConfigError("speed must be >= 0")
        if self.hop_budget < 1:
            raise ConfigError("hop budget must be >= 1")
        if self.mobility.tau != self.routing.tau:
            raise ConfigError(
                f"prediction horizon mismatch: mobility tau {self.mobility.tau} "
                f"!= routing tau {self.routing.tau}"
            )
        self.routing.validate()
        self.budget.validate()


@dataclass(frozen=True, slots=True)
class DataPacket:
    pid: int
    src: int
    dst: int
    emit_time: float
    hops_left: int
    measured: bool


@dataclass
class Frame:
    """Link-layer frame; link_dest None means broadcast."""

    sender: int
    link_dest: int | None
    kind: str  # "chirp" | "data"
    payload: object  # bytes for chirps, DataPacket for data
    size: int  # bytes incl. header overhead
    attempts: int = 0


@dataclass
class _Reception:
    frame: Frame
    node: "_Node"
    corrupted: bool = False


@dataclass
class RunMetrics:
    """Outcome of one seeded run."""

    sent: int
    delivered: int
    pdr: float
    latencies: list[float]
    chirp_frames: int
    chirp_bytes: int
    drops: dict[str, int]
    optimal_bound: float

    @property
    def latency_mean(self) -> float:
        return sum(self.latencies) / len(self.latencies) if self.latencies else math.nan


class _PacketState:
    __slots__ = ("measured", "delivered", "fail")

    def __init__(self, measured: bool):
        self.measured = measured
        self.delivered = False
        self.fail: str | None = None


class _Node:
    def __init__(self, node_id: int, kin: KinematicState, routing: RoutingState):
        self.id = node_id
        self.kin = kin
        self.routing = routing
        self.queue: deque[Frame] = deque()
        self.transmitting: Frame | None = None
        self.inflight: list[_Reception] = []
        self.seen_flood: set[int] = set()

    @property
    def position(self) -> Vec3:
        return self.kin.position


def greedy_next_hop(
    neighbor_positions: dict[int, Vec3],
    self_position: Vec3,
    dest_position: Vec3,
) -> int | None:
    """Neighbor strictly closer to the destination than we are, minimal
    distance, lowest id on ties; None at a local minimum."""
    best = None
    best_d = self_position.distance_to(dest_position)
    for j in sorted(neighbor_positions):
        d = neighbor_positions[j].distance_to(dest_position)
        if d < best_d:
            best, best_d = j, d
    return best


def optimal_pdr_bound(
    trace: list[tuple[float, tuple[Vec3, ...]]],
    r_tx: float,
    emission_times: list[float],
    sender: int,
    receiver: int,
) -> float:
    """Topology-only PDR ceiling.

    For each emission time, take the latest trace snapshot and test
    sender-receiver reachability in the disk graph of radius r_tx by
    breadth-first search.  Load-related loss is invisible to this bound.
    """
    if not emission_times:
        return 0.0
    times = [t for t, _ in trace]
    reachable = 0
    for emit in emission_times:
        idx = max(bisect_right(times, emit) - 1, 0)
        positions = trace[idx][1]
        if _reaches(positions, r_tx, sender, receiver):
            reachable += 1
    return reachable / len(emission_times)


def _reaches(positions: tuple[Vec3, ...], r_tx: float, src: int, dst: int) -> bool:
    n = len(positions)
    seen = {src}
    frontier = deque([src])
    while frontier:
        u = frontier.popleft()
        if u == dst:
            return True
        pu = positions[u]
        for v in range(n):
            if v not in seen and pu.distance_to(positions[v]) <= r_tx:
                seen.add(v)
                frontier.append(v)
    return False


class Simulation:
    """One seeded run.  Use run(scenario) unless internals are needed."""

    def __init__(self, scenario: Scenario):
        scenario.validate()
        self.sc = scenario
        self.now = 0.0
        self._heap: list[tuple[float, int, Callable[[], None]]] = []
        self._seq = 0

        self.r_tx = radio.compute_r_tx(scenario.budget)
        params = replace(scenario.routing, r_tx=self.r_tx)

        self.rng_channel = Random(stable_seed(scenario.seed, "channel"))
        self.rng_mac = Random(stable_seed(scenario.seed, "mac"))
        rng_traffic = Random(stable_seed(scenario.seed, "traffic"))

        self.nodes: list[_Node] = []
        for i in range(scenario.nodes):
            rng_i = Random(stable_seed(scenario.seed, "mobility", i))
            kin = make_random_waypoint_state(
                scenario.box, scenario.speed, scenario.duration, rng_i, scenario.mobility
            )
            routing = RoutingState(i, replace(params), now=0.0)
            routing.update_self(kin.position, predict_position(kin, scenario.mobility))
            self.nodes.append(_Node(i, kin, routing))

        self.sender, self.receiver = rng_traffic.sample(range(scenario.nodes), 2)

        # Metrics and bookkeeping.
        self.trace: list[tuple[float, tuple[Vec3, ...]]] = []
        self.emission_times: list[float] = []
        self.packets: dict[int, _PacketState] = {}
        self.latencies: list[float] = []
        self._next_pid = 0
        self.chirp_frames = 0
        self.drops = {cause: 0 for cause in DROP_CAUSES}
        self._trace_file = None

        self._snapshot_trace()
        self._preschedule()

    # -- scheduling ---------------------------------------------------------

    def _schedule(self, time: float, fn: Callable[[], None]) -> None:
        heapq.heappush(self._heap, (time, self._seq, fn))
        self._seq += 1

    def _preschedule(self) -> None:
        sc = self.sc
        # Mobility ticks first: they receive the lowest tiebreakers, so at
        # coinciding timestamps positions update before anything else fires.
        n_ticks = int(sc.duration / sc.mobility.dt + 1e-9)
        for k in range(1, n_ticks + 1):
            self._schedule(k * sc.mobility.dt, self._tick)
        for node in self.nodes:
            offset = self.rng_mac.uniform(0.0, sc.routing.chirp_interval)
            k = 0
            while (t := offset + k * sc.routing.chirp_interval) < sc.duration:
                self._schedule(t, self._make_emit_chirp(node))
                k += 1
        interval = sc.payload * 8 / sc.cbr_rate
        k = 1
        while (t := k * interval) < sc.duration:
            self._schedule(t, self._emit_packet)
            k += 1

    def _make_emit_chirp(self, node: _Node) -> Callable[[], None]:
        return lambda: self._emit_chirp(node)

    # -- event handlers -----------------------------------------------------

    def _tick(self) -> None:
        cfg = self.sc.mobility
        for node in self.nodes:
            node.kin = step_random_waypoint(node.kin, cfg)
            node.routing.update_self(node.kin.position, predict_position(node.kin, cfg))
            node.routing.expire(self.now)
        self._snapshot_trace()

    def _snapshot_trace(self) -> None:
        positions = tuple(node.kin.position for node in self.nodes)
        self.trace.append((self.now, positions))
        if self._trace_file is not None:
            for node, pos in zip(self.nodes, positions):
                self._trace_file.write(
                    f"{self.now:.6f},{node.id},{pos.x:.6f},{pos.y:.6f},{pos.z:.6f}\n"
                )

    def _emit_chirp(self, node: _Node) -> None:
        chirp = node.routing.make_chirp(self.now)
        self._enqueue(node, Frame(
            sender=node.id,
            link_dest=None,
            kind="chirp",
            payload=encode_chirp(chirp),
            size=CHIRP_SIZE + self.sc.header_overhead,
        ))

    def _emit_packet(self) -> None:
        measured = self.now >= self.sc.warmup
        pkt = DataPacket(
            pid=self._next_pid,
            src=self.sender,
            dst=self.receiver,
            emit_time=self.now,
            hops_left=self.sc.hop_budget,
            measured=measured,
        )
        self._next_pid += 1
        self.packets[pkt.pid] = _PacketState(measured)
        if measured:
            self.emission_times.append(self.now)
        self._forward_data(self.nodes[pkt.src], pkt)

    # -- routing dispatch -----------------------------------------------------

    def _forward_data(self, node: _Node, pkt: DataPacket) -> None:
        if pkt.hops_left <= 0:
            self._note_fail(pkt, DROP_TTL)
            return
        proto = self.sc.protocol
        if proto == "flood":
            if pkt.pid in node.seen_flood:
                return
            node.seen_flood.add(pkt.pid)
            self._enqueue_data(node, None, pkt)
        elif proto == "greedy":
            positions = {j: rec.position for j, rec in node.routing.neighbors.items()}
            # Destination position is an oracle lookup from the live state.
            dest_pos = self.nodes[pkt.dst].kin.position
            hop = greedy_next_hop(positions, node.kin.position, dest_pos)
            if hop is None:
                self._note_fail(pkt, DROP_NO_ROUTE)
            else:
                self._enqueue_data(node, hop, pkt)
        else:
            hop = node.routing.select_next_hop(pkt.dst)
            if hop is None:
                self._note_fail(pkt, DROP_NO_ROUTE)
            else:
                self._enqueue_data(node, hop, pkt)

    def _enqueue_data(self, node: _Node, link_dest: int | None, pkt: DataPacket) -> None:
        self._enqueue(node, Frame(
            sender=node.id,
            link_dest=link_dest,
            kind="data",
            payload=replace(pkt, hops_left=pkt.hops_left - 1),
            size=self.sc.payload + self.sc.header_overhead,
        ))

    # -- MAC ------------------------------------------------------------------

    def _enqueue(self, node: _Node, frame: Frame) -> None:
        if len(node.queue) >= self.sc.queue_limit:
            if frame.kind == "data":
                self._note_fail(frame.payload, DROP_QUEUE)
            return
        node.queue.append(frame)
        self._kick(node)

    def _requeue_front(self, node: _Node, frame: Frame) -> None:
        if len(node.queue) >= self.sc.queue_limit:
            self._note_fail(frame.payload, DROP_QUEUE)
            return
        node.queue.appendleft(frame)
        self._kick(node)

    def _kick(self, node: _Node) -> None:
        if node.transmitting is not None or not node.queue:
            return
        frame = node.queue.popleft()
        node.transmitting = frame
        if frame.kind == "chirp":
            self.chirp_frames += 1
        # Half duplex: starting to talk corrupts anything being received here.
        for rec in node.inflight:
            rec.corrupted = True
        receptions: list[_Reception] = []
        for other in self.nodes:
            if other.id == node.id:
                continue
            if not self._audible(node, other):
                continue
            rec = _Reception(frame, other)
            if other.transmitting is not None or other.inflight:
                for ongoing in other.inflight:
                    ongoing.corrupted = True
                rec.corrupted = True
            other.inflight.append(rec)
            receptions.append(rec)
        airtime = frame.size * 8 / self.sc.link_rate
        self._schedule(self.now + airtime, lambda: self._tx_end(node, frame, receptions))

    def _audible(self, sender: _Node, receiver: _Node) -> bool:
        distance = sender.kin.position.distance_to(receiver.kin.position)
        return radio.receive(self.sc.budget, self.sc.channel, distance, self.rng_channel)

    def _tx_end(self, node: _Node, frame: Frame, receptions: list[_Reception]) -> None:
        node.transmitting = None
        # Finalize the whole transmission before dispatching deliveries: a
        # delivery may start a new transmission at this same instant, which
        # must not retroactively corrupt receptions that already ended.
        target_rec = None
        any_clean = False
        any_corrupt = False
        for rec in receptions:
            rec.node.inflight.remove(rec)
            if frame.link_dest is not None and rec.node.id == frame.link_dest:
                target_rec = rec
            if rec.corrupted:
                any_corrupt = True
            else:
                any_clean = True
        for rec in receptions:
            if not rec.corrupted and (frame.link_dest is None or rec.node.id == frame.link_dest):
                self._deliver(rec.node, frame)
        if frame.kind == "data":
            pkt: DataPacket = frame.payload
            if frame.link_dest is not None:
                if target_rec is None or target_rec.corrupted:
                    self._retry_or_drop(node, frame, target_rec)
            elif not any_clean:
                # A flood branch that nobody heard cleanly dies here.
                self._note_fail(pkt, DROP_COLLISION if any_corrupt else DROP_CHANNEL)
        self._kick(node)

    def _retry_or_drop(self, node: _Node, frame: Frame, target_rec: _Reception | None) -> None:
        frame.attempts += 1
        if frame.attempts <= self.sc.retry_limit:
            self._schedule(
                self.now + self.sc.retry_backoff,
                lambda: self._requeue_front(node, frame),
            )
            return
        cause = DROP_COLLISION if target_rec is not None else DROP_CHANNEL
        self._note_fail(frame.payload, cause)

    # -- reception --------------------------------------------------------------

    def _deliver(self, receiver: _Node, frame: Frame) -> None:
        if frame.kind == "chirp":
            self._deliver_chirp(receiver, frame)
            return
        pkt: DataPacket = frame.payload
        if receiver.id == pkt.dst:
            state = self.packets[pkt.pid]
            if not state.delivered:
                state.delivered = True
                if state.measured:
                    self.latencies.append(self.now - pkt.emit_time)
            return
        self._forward_data(receiver, pkt)

    def _deliver_chirp(self, receiver: _Node, frame: Frame) -> None:
        chirp = decode_chirp(frame.payload)
        action = receiver.routing.handle_chirp(chirp, frame.sender, self.now)
        if isinstance(action, Forward):
            out = Frame(
                sender=receiver.id,
                link_dest=None,
                kind="chirp",
                payload=encode_chirp(action.chirp),
                size=CHIRP_SIZE + self.sc.header_overhead,
            )
            delay = self.rng_mac.uniform(0.0, self.sc.forward_jitter)
            self._schedule(self.now + delay, lambda: self._enqueue(receiver, out))

    # -- accounting ---------------------------------------------------------------

    def _note_fail(self, pkt: DataPacket, cause: str) -> None:
        # Last recorded failure wins; a packet that was delivered anywhere
        # (flooding duplicates) stops collecting failure causes.
        state = self.packets[pkt.pid]
        if not state.delivered:
            state.fail = cause

    # -- run ------------------------------------------------------------------------

    def run(self) -> RunMetrics:
        sc = self.sc
        if sc.trace_path is not None:
            self._trace_file = open(sc.trace_path, "w", encoding="utf-8")
            # Rewrite the rows captured before the file existed.
            t0, positions = self.trace[0]
            for node, pos in zip(self.nodes, positions):
                self._trace_file.write(
                    f"{t0:.6f},{node.id},{pos.x:.6f},{pos.y:.6f},{pos.z:.6f}\n"
                )
        try:
            while self._heap:
                time, _, fn = heapq.heappop(self._heap)
                if time > sc.duration:
                    break
                self.now = time
                fn()
        finally:
            if self._trace_file is not None:
                self._trace_file.close()
                self._trace_file = None
        return self.collect_metrics()

    def collect_metrics(self) -> RunMetrics:
        sent = 0
        delivered = 0
        drops = dict.fromkeys(DROP_CAUSES, 0)
        for state in self.packets.values():
            if not state.measured:
                continue
            sent += 1
            if state.delivered:
                delivered += 1
            else:
                # Packets still in flight at the end of the run carry no
                # recorded failure and are charged as unreachable.
                drops[state.fail or DROP_NO_ROUTE] += 1
        self.drops = drops
        chirp_bytes = self.chirp_frames * (CHIRP_SIZE + self.sc.header_overhead)
        bound = optimal_pdr_bound(
            self.trace, self.r_tx, self.emission_times, self.sender, self.receiver
        )
        pdr = delivered / sent if sent > 0 else math.nan
        return RunMetrics(
            sent=sent,
            delivered=delivered,
            pdr=pdr,
            latencies=sorted(self.latencies),
            chirp_frames=self.chirp_frames,
            chirp_bytes=chirp_bytes,
            drops=drops,
            optimal_bound=bound,
        )


def run(scenario: Scenario) -> RunMetrics:
    """Execute one deterministic run and collect its metrics."""
    return Simulation(scenario).run()
