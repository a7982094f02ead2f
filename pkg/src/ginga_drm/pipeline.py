"""
End-to-end pipelines: pack an application directory into a container, and
unpack a (possibly damaged) container back into files, entry points and an
ADM event trace.

Transmission timing is counted in super frames of ``super_frame_packets``
packets. Auxiliary data messages are placed between carousel data groups; a
TimeBase message is sent at the first data-unit boundary of every super
frame and carries the time base of the super frame in which its last packet
lands.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from . import adm as admmod
from .adm import (
    TBV_MODULUS,
    AdmMessage,
    EditingCommandMessage,
    SignLanguageMessage,
    TimeBaseMessage,
    TimeBaseStatus,
    encode_adm,
)
from .app import (
    GINGA_FULL_RECEIVER_PROFILE,
    EntryPoint,
    EntryPointReport,
    ScanOptions,
    directory_index_parameter,
    parse_entry_point,
    read_entry_points,
    scan_application,
    write_application,
)
from .container import SIDECAR_FORMAT, Container
from .datagroup import ADM_TYPES, DataGroup, decode_data_group, encode_data_group
from .errors import AdmError, EntryPointNotInTree, FramingError, MotError
from .mot import CarouselOptions, HeaderParameter, MotObject, MotReceiver, build_carousel
from .packet_mode import ContinuityCounter, PacketStreamConfig, Reassembler, filler_packet, packetize
from .signaling import app_signaling_for, ServiceKind, single_service_multiplex
from .timebase import (
    TBV_PER_SUPER_FRAME,
    EditingScheduler,
    TimeBaseConfig,
    TimeBaseState,
    timebase_apply,
    timebase_tick,
)

log = logging.getLogger(__name__)


# --- transmitter side -----------------------------------------------------

@dataclass(frozen=True)
class ClockChange:
    """Broadcaster-side time base change taking effect at ``super_frame``.

    kind is "pause", "resume" or "jump" (``value`` is the new TBV).
    """

    super_frame: int
    kind: str
    value: int = 0

    def __post_init__(self):
        if self.kind not in ("pause", "resume", "jump"):
            raise ValueError(f"unknown clock change {self.kind!r}")
        if self.super_frame < 0:
            raise ValueError("super_frame must be non-negative")


@dataclass(frozen=True)
class TimeBasePlan:
    """Broadcaster clock: starts at ``start`` running, advances 1000 per
    super frame, and follows ``changes``."""

    enabled: bool = True
    start: int = 0
    changes: Tuple[ClockChange, ...] = ()


@dataclass(frozen=True)
class ScheduledAdm:
    super_frame: int
    message: AdmMessage


class Multiplexer:
    """Turns data groups and scheduled ADMs into (super_frame, packet) records."""

    def __init__(self, cfg: PacketStreamConfig, super_frame_packets: int,
                 timebase: TimeBasePlan = TimeBasePlan(enabled=False)):
        if super_frame_packets < 1:
            raise ValueError("super_frame_packets must be positive")
        self.cfg = cfg
        self.spf = super_frame_packets
        self.timebase = timebase
        self.counter = ContinuityCounter()
        self.records: List[Tuple[int, bytes]] = []
        self._adm_ci: Dict[int, int] = {}
        self._next_tb_sf = 0
        # broadcaster clock, advanced lazily one super frame at a time
        self._changes = deque(sorted(timebase.changes, key=lambda c: c.super_frame))
        self._clk_sf = -1
        self._clk_value = timebase.start % TBV_MODULUS
        self._clk_running = True
        self._clk_jumped = False

    @property
    def super_frame(self) -> int:
        return len(self.records) // self.spf

    def _emit_unit(self, unit: bytes) -> None:
        for p in packetize(unit, self.cfg, self.counter):
            self.records.append((self.super_frame, p.to_bytes()))

    def _emit_adm(self, message: AdmMessage) -> None:
        g = encode_adm(message)
        ci = self._adm_ci.get(g.group_type, 0)
        self._adm_ci[g.group_type] = (ci + 1) & 0xF
        self._emit_unit(encode_data_group(DataGroup(g.group_type, g.payload, ci, 0)))

    def _clock_at(self, sf: int) -> TimeBaseMessage:
        while self._clk_sf < sf:
            if self._clk_sf >= 0 and self._clk_running:
                self._clk_value = (self._clk_value + TBV_PER_SUPER_FRAME) % TBV_MODULUS
            self._clk_sf += 1
            while self._changes and self._changes[0].super_frame <= self._clk_sf:
                c = self._changes.popleft()
                if c.kind == "pause":
                    self._clk_running = False
                elif c.kind == "resume":
                    self._clk_running = True
                else:
                    self._clk_value = c.value % TBV_MODULUS
                    self._clk_jumped = True
        status = TimeBaseStatus.RUNNING if self._clk_running else TimeBaseStatus.PAUSED
        return TimeBaseMessage(status, self._clk_jumped, self._clk_value)

    def _emit_timebase(self) -> None:
        n = -(-(admmod.TIMEBASE_SIZE + 4) // self.cfg.packet_length)
        land = (len(self.records) + n - 1) // self.spf
        self._emit_adm(self._clock_at(land))
        self._clk_jumped = False
        self._next_tb_sf = land + 1

    def _fill_super_frame(self) -> None:
        sf = self.super_frame
        while self.super_frame == sf:
            self.records.append((sf, filler_packet(self.cfg, self.counter).to_bytes()))

    def run(self, groups: Iterable[DataGroup], adms: Sequence[ScheduledAdm] = (),
            min_super_frames: int = 0) -> List[Tuple[int, bytes]]:
        queue = deque(encode_data_group(g) for g in groups)
        pending = deque(sorted(adms, key=lambda a: a.super_frame))
        while True:
            sf = self.super_frame
            if not queue and not pending and sf >= min_super_frames:
                break
            if self.timebase.enabled and sf >= self._next_tb_sf:
                self._emit_timebase()
            elif pending and pending[0].super_frame <= sf:
                self._emit_adm(pending.popleft().message)
            elif queue:
                self._emit_unit(queue.popleft())
            else:
                self._fill_super_frame()
        return self.records


# --- pack -------------------------------------------------------------------

@dataclass(frozen=True)
class PackOptions:
    profile: int = GINGA_FULL_RECEIVER_PROFILE
    extra_entry_points: Tuple[Tuple[int, str], ...] = ()
    repetitions: int = 1
    segment_size: int = 8191
    packet_length: int = 100
    sub_stream_id: int = 0
    super_frame_packets: int = 10
    interleave: bool = False
    compress: bool = False
    compress_directory: bool = False
    standalone: bool = False
    include_hidden: bool = True
    timebase: TimeBasePlan = TimeBasePlan()
    adm: Tuple[ScheduledAdm, ...] = ()
    directory_extras: Tuple[HeaderParameter, ...] = ()

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")


def make_sidecar(standalone: bool, sub_stream_id: int, super_frame_packets: int) -> dict:
    mux = single_service_multiplex(standalone, sub_stream_id)
    kind = ServiceKind.DATA if standalone else ServiceKind.AUDIO
    data_stream = next(s.stream_id for s in mux.streams if s.kind.value == "data")
    return {
        "format": SIDECAR_FORMAT,
        "schema_version": 1,
        "multiplex": mux.to_dict(),
        "signaling": app_signaling_for(kind, True).to_dict(),
        "stream": {"stream_id": data_stream, "sub_stream_id": sub_stream_id},
        "super_frame_packets": super_frame_packets,
        "fac_channel": None,
    }


def directory_extensions(files: Sequence[MotObject], entry: str, opts: PackOptions) -> List[HeaderParameter]:
    names = [f.content_name for f in files]
    params = []
    for profile, text in ((opts.profile, entry),) + tuple(opts.extra_entry_points):
        ep = parse_entry_point(text)
        if ep.file not in names:
            raise EntryPointNotInTree(f"entry point {ep.file!r} is not a file of the application")
        params.append(directory_index_parameter(profile, ep))
    params.extend(opts.directory_extras)
    return params


def pack_objects(files: Sequence[MotObject], entry: str, opts: PackOptions = PackOptions()) -> Container:
    cfg = PacketStreamConfig(opts.packet_length, opts.sub_stream_id)
    dir_ext = directory_extensions(files, entry, opts)
    cycle = build_carousel(files, dir_ext, CarouselOptions(segment_size=opts.segment_size,
                                                           interleave=opts.interleave,
                                                           compress_directory=opts.compress_directory))
    mux = Multiplexer(cfg, opts.super_frame_packets, opts.timebase)
    records = mux.run(cycle * opts.repetitions, opts.adm)
    return Container(opts.packet_length, make_sidecar(opts.standalone, opts.sub_stream_id, opts.super_frame_packets),
                     records)


def run_pack(app_dir, entry: str, opts: PackOptions = PackOptions()) -> Container:
    files = scan_application(app_dir, ScanOptions(compress=opts.compress, include_hidden=opts.include_hidden))
    return pack_objects(files, entry, opts)


def adm_container(adms: Sequence[ScheduledAdm] = (), super_frames: int = 0,
                  timebase: TimeBasePlan = TimeBasePlan(), packet_length: int = 100,
                  super_frame_packets: int = 10, sub_stream_id: int = 0,
                  standalone: bool = False) -> Container:
    """Container holding only auxiliary data messages over ``super_frames``."""
    cfg = PacketStreamConfig(packet_length, sub_stream_id)
    mux = Multiplexer(cfg, super_frame_packets, timebase)
    records = mux.run((), adms, min_super_frames=super_frames)
    return Container(packet_length, make_sidecar(standalone, sub_stream_id, super_frame_packets), records)


# --- receive ----------------------------------------------------------------

@dataclass(frozen=True)
class TraceEvent:
    super_frame: int
    kind: str
    tbv: Optional[int]
    detail: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"super_frame": self.super_frame, "kind": self.kind, "tbv": self.tbv, **self.detail}


@dataclass
class UnpackResult:
    files: Dict[str, bytes]
    entry_points: EntryPointReport
    selected_entry_point: Optional[EntryPoint]
    trace: List[TraceEvent]
    diagnostics: Dict[str, int]
    missing: List[str]
    directory_ready: bool

    @property
    def complete(self) -> bool:
        return self.directory_ready and not self.missing

    def clock(self) -> List[int]:
        """Time base value at the end of every super frame with a running clock."""
        return [e.tbv for e in self.trace if e.kind == "clock"]


class ChainReceiver:
    """Receiver for one data sub-stream: packets -> data groups -> MOT / ADM."""

    def __init__(self, cfg: PacketStreamConfig, tb_cfg: TimeBaseConfig = TimeBaseConfig()):
        self.reassembler = Reassembler(cfg)
        self.mot = MotReceiver()
        self.tb_cfg = tb_cfg
        self.clock = TimeBaseState()
        self.scheduler = EditingScheduler()
        self.trace: List[TraceEvent] = []
        self.diag: Dict[str, int] = {}
        self._sf: Optional[int] = None

    def _count(self, key: str, n: int = 1) -> None:
        self.diag[key] = self.diag.get(key, 0) + n

    def _tbv(self) -> Optional[int]:
        return self.clock.current_tbv if self.clock.initialized else None

    def _poll(self) -> None:
        now = self.clock.current_tbv if self.clock.initialized else -1
        dropped = len(self.scheduler.suppressed)
        released = self.scheduler.poll(now, self.clock.suppress_events)
        for m in self.scheduler.suppressed[dropped:]:
            self._count("suppressed_commands")
            self.trace.append(TraceEvent(self._sf, "suppressed", self._tbv(),
                                         {"event_id": m.event_id, "scheduled_tbv": m.tbv}))
        for m in released:
            self.trace.append(TraceEvent(self._sf, "command", self._tbv(),
                                         {"event_id": m.event_id, "command_tag": m.command_tag,
                                          "do_it_now": m.do_it_now, "scheduled_tbv": m.tbv,
                                          "payload": m.payload.hex()}))

    def _end_super_frame(self) -> None:
        if self.clock.initialized:
            self.trace.append(TraceEvent(self._sf, "clock", self.clock.current_tbv,
                                         {"running": self.clock.running}))

    def _advance_to(self, sf: int) -> None:
        if self._sf is None:
            self._sf = sf
            return
        while self._sf < sf:
            self._end_super_frame()
            self._sf += 1
            if self.clock.initialized:
                wraps = self.clock.wraps
                self.clock = timebase_tick(self.clock, self.tb_cfg)
                if self.clock.wraps != wraps:
                    self.trace.append(TraceEvent(self._sf, "wrap", self.clock.current_tbv))
            self._poll()

    def _on_adm(self, g: DataGroup) -> None:
        try:
            m = admmod.decode_adm(g)
        except AdmError as exc:
            self._count(f"adm_rejected:{type(exc).__name__}")
            return
        if isinstance(m, TimeBaseMessage):
            violations = self.clock.drift_violations
            self.clock = timebase_apply(self.clock, m, self.tb_cfg)
            detail = {"status": m.status.name.lower(), "discontinuity": m.discontinuity, "message_tbv": m.tbv}
            if self.clock.drift_violations != violations:
                detail["drift_violation"] = True
                self._count("drift_violations")
            self.trace.append(TraceEvent(self._sf, "timebase", self.clock.current_tbv, detail))
        elif isinstance(m, EditingCommandMessage):
            if not self.scheduler.offer(m):
                self._count("duplicate_commands")
        elif isinstance(m, SignLanguageMessage):
            self.trace.append(TraceEvent(self._sf, "sign-language", self._tbv(),
                                         {"event_id": m.event_id, "event_tbv": m.event_tbv,
                                          "content_type": m.content_type,
                                          "private_data": m.private_data.hex()}))
        self._poll()

    def _on_unit(self, unit: bytes) -> None:
        try:
            g = decode_data_group(unit)
        except FramingError as exc:
            self._count(f"datagroup_rejected:{type(exc).__name__}")
            return
        if g.group_type in ADM_TYPES:
            self._on_adm(g)
            return
        try:
            self.mot.feed(g)
        except MotError as exc:
            self._count(f"mot_rejected:{type(exc).__name__}")

    def feed(self, super_frame: int, record: bytes) -> None:
        self._advance_to(super_frame)
        for unit in self.reassembler.feed(record):
            self._on_unit(unit)

    def finish(self, profile: int = GINGA_FULL_RECEIVER_PROFILE) -> UnpackResult:
        if self._sf is not None:
            self._end_super_frame()
        self.reassembler.finish()
        st = self.reassembler.stats
        diag = dict(self.diag)
        diag.update({"packets": st.packets, "packet_crc_errors": st.crc_errors, "continuity_gaps": st.gaps,
                     "units": st.units, "units_lost": st.units_lost, "orphan_packets": st.orphans,
                     "directory_errors": self.mot.stats.directory_errors,
                     "gzip_errors": self.mot.stats.gzip_errors,
                     "size_mismatches": self.mot.stats.size_mismatches})
        directory = self.mot.directory
        report = read_entry_points(directory.directory_indices() if directory else [])
        missing = self.mot.missing()
        diag["objects_missing"] = len(missing)
        diag["commands_pending"] = len(self.scheduler.pending)
        return UnpackResult(self.mot.files(), report, report.entry_points.get(profile),
                            self.trace, diag, missing, directory is not None)


def _load(container: Union[Container, bytes, str, Path]) -> Container:
    if isinstance(container, Container):
        return container
    if isinstance(container, (str, Path)):
        container = Path(container).read_bytes()
    return Container.from_bytes(container)


def run_unpack(container, out_dir=None, profile: int = GINGA_FULL_RECEIVER_PROFILE,
               tb_cfg: TimeBaseConfig = TimeBaseConfig()) -> UnpackResult:
    c = _load(container)
    rx = ChainReceiver(c.stream_config, tb_cfg)
    for sf, rec in c.records:
        rx.feed(sf, rec)
    result = rx.finish(profile)
    if out_dir is not None:
        write_application(result.files, out_dir)
    if result.missing:
        log.info("incomplete reception: %d object(s) missing", len(result.missing))
    return result


def inspect_container(container) -> dict:
    """Structured dump: header, sidecar, data groups, directory and entry points."""
    c = _load(container)
    cfg = c.stream_config
    r = Reassembler(cfg)
    mot = MotReceiver()
    groups = []
    for _, rec in c.records:
        for unit in r.feed(rec):
            try:
                g = decode_data_group(unit)
            except FramingError as exc:
                groups.append({"error": type(exc).__name__})
                continue
            entry = {"type": g.group_type, "continuity": g.continuity_index, "size": len(g.payload)}
            if g.session:
                entry.update(transport_id=g.session.transport_id, segment=g.session.segment_number,
                             last=g.session.last_segment)
            if g.group_type in ADM_TYPES:
                try:
                    m = admmod.decode_adm(g)
                    entry["adm"] = type(m).__name__
                    entry["tbv"] = getattr(m, "tbv", getattr(m, "event_tbv", None))
                except AdmError as exc:
                    entry["adm_error"] = type(exc).__name__
            else:
                try:
                    mot.feed(g)
                except MotError as exc:
                    entry["mot_error"] = type(exc).__name__
            groups.append(entry)
    r.finish()
    directory = None
    if mot.directory is not None:
        d = mot.directory
        directory = {
            "segment_size": d.segment_size,
            "extensions": [{"id": p.param_id, "data": p.data.hex()} for p in d.extensions],
            "objects": [{"transport_id": e.transport_id, "body_size": e.body_size,
                         "content_type": e.content_type, "content_sub_type": e.content_sub_type,
                         "params": [{"id": p.param_id, "data": p.data.hex()} for p in e.params]}
                        for e in d.entries],
        }
    report = read_entry_points(mot.directory.directory_indices() if mot.directory else [])
    return {
        "packet_length": c.packet_length,
        "packets": len(c.records),
        "super_frames": c.super_frames,
        "sidecar": c.sidecar,
        "groups": groups,
        "directory": directory,
        "entry_points": {str(k): str(v) for k, v in report.entry_points.items()},
        "unknown_profiles": list(report.unknown_profiles),
    }


def trees_equal(a: Mapping[str, bytes], b: Mapping[str, bytes]) -> bool:
    return dict(a) == dict(b)
