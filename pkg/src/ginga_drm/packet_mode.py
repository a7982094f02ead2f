"""
DRM packet mode: fixed-length packets carrying data units (encoded data groups).

Packet record, MSB first::

    header   First(1) Last(1) PacketId(2) PaddedIndicator(1) Continuity(3)
    data     packet_length bytes
    crc      16 bits over header + data

A padded packet spends its first data byte on the count of useful bytes
that follow; the remainder is zero fill. A padded packet with zero useful
bytes and both First and Last set is a filler packet and yields no unit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Tuple, Union

from .crc import CRC_SIZE, crc16

HEADER_SIZE = 1
MAX_PACKET_LENGTH = 256  # useful-length prefix is one byte


@dataclass(frozen=True)
class PacketStreamConfig:
    packet_length: int = 100
    sub_stream_id: int = 0

    def __post_init__(self):
        if not 1 <= self.packet_length <= MAX_PACKET_LENGTH:
            raise ValueError(f"packet_length must be in 1..{MAX_PACKET_LENGTH}, got {self.packet_length}")
        if not 0 <= self.sub_stream_id <= 3:
            raise ValueError(f"sub_stream_id must be in 0..3, got {self.sub_stream_id}")

    @property
    def record_size(self) -> int:
        return HEADER_SIZE + self.packet_length + CRC_SIZE


@dataclass(frozen=True)
class Packet:
    first: bool
    last: bool
    packet_id: int
    continuity: int
    padded: bool
    data: bytes
    crc: int = -1

    @property
    def header(self) -> int:
        return ((self.first << 7) | (self.last << 6) | (self.packet_id << 4)
                | (self.padded << 3) | self.continuity)

    def computed_crc(self) -> int:
        return crc16(bytes((self.header,)) + self.data)

    def crc_ok(self) -> bool:
        return self.crc == self.computed_crc()

    @property
    def useful(self) -> bytes:
        if not self.padded:
            return self.data
        return self.data[1:1 + self.data[0]]

    def to_bytes(self) -> bytes:
        body = bytes((self.header,)) + self.data
        return body + struct.pack(">H", self.crc)


def _make(first: bool, last: bool, packet_id: int, continuity: int, padded: bool, data: bytes) -> Packet:
    header = (first << 7) | (last << 6) | (packet_id << 4) | (padded << 3) | continuity
    return Packet(first, last, packet_id, continuity, padded, data, crc16(bytes((header,)) + data))


def parse_packet(record: bytes, cfg: PacketStreamConfig) -> Packet:
    """Split a packet record into fields. The CRC is carried, not checked."""
    if len(record) != cfg.record_size:
        raise ValueError(f"packet record must be {cfg.record_size} bytes, got {len(record)}")
    h = record[0]
    return Packet(first=bool(h & 0x80),
                  last=bool(h & 0x40),
                  packet_id=(h >> 4) & 0x3,
                  padded=bool(h & 0x08),
                  continuity=h & 0x7,
                  data=bytes(record[1:-CRC_SIZE]),
                  crc=struct.unpack(">H", record[-CRC_SIZE:])[0])


class ContinuityCounter:
    """Per-stream 3-bit packet continuity counter."""

    def __init__(self, start: int = 0):
        self.value = start & 0x7

    def next(self) -> int:
        v = self.value
        self.value = (v + 1) & 0x7
        return v


def packetize(unit: bytes, cfg: PacketStreamConfig, counter: ContinuityCounter) -> List[Packet]:
    if not unit:
        raise ValueError("cannot packetize an empty data unit")
    n = cfg.packet_length
    chunks = [unit[i:i + n] for i in range(0, len(unit), n)]
    packets = []
    for i, chunk in enumerate(chunks):
        padded = len(chunk) < n
        data = bytes((len(chunk),)) + chunk + bytes(n - 1 - len(chunk)) if padded else bytes(chunk)
        packets.append(_make(i == 0, i == len(chunks) - 1, cfg.sub_stream_id, counter.next(), padded, data))
    return packets


def filler_packet(cfg: PacketStreamConfig, counter: ContinuityCounter) -> Packet:
    """A packet with no useful data, used to fill a super frame."""
    return _make(True, True, cfg.sub_stream_id, counter.next(), True, bytes(cfg.packet_length))


@dataclass
class ReassemblyStats:
    packets: int = 0
    crc_errors: int = 0
    gaps: int = 0
    units: int = 0
    units_lost: int = 0
    orphans: int = 0
    other_stream: int = 0
    malformed: int = 0


@dataclass
class Reassembler:
    """Single-writer reassembly state for one (stream, packet_id).

    A continuity gap discards the unit in progress; recovery is left to
    carousel repetition.
    """

    cfg: PacketStreamConfig
    stats: ReassemblyStats = field(default_factory=ReassemblyStats)
    _expected: int = -1
    _parts: List[bytes] = field(default_factory=list)
    _in_unit: bool = False

    def feed(self, packet: Union[Packet, bytes]) -> List[bytes]:
        """Feed one packet; return the units it completes (zero or one)."""
        if not isinstance(packet, Packet):
            packet = parse_packet(packet, self.cfg)
        st = self.stats
        st.packets += 1
        if not packet.crc_ok():
            st.crc_errors += 1
            return []
        if packet.packet_id != self.cfg.sub_stream_id:
            st.other_stream += 1
            return []

        if self._expected >= 0 and packet.continuity != self._expected:
            st.gaps += 1
            if self._in_unit:
                self._drop()
        self._expected = (packet.continuity + 1) & 0x7

        if packet.padded and (not packet.data or packet.data[0] > len(packet.data) - 1):
            st.malformed += 1
            if self._in_unit:
                self._drop()
            return []

        if packet.first:
            if self._in_unit:
                self._drop()
            self._in_unit = True
            self._parts = []
        elif not self._in_unit:
            st.orphans += 1
            return []

        self._parts.append(packet.useful)
        if packet.last:
            unit = b"".join(self._parts)
            self._in_unit = False
            self._parts = []
            if unit:
                st.units += 1
                return [unit]
        return []

    def finish(self) -> None:
        """Close the stream; a unit still open at the end counts as lost."""
        if self._in_unit:
            self._drop()

    def _drop(self) -> None:
        self.stats.units_lost += 1
        self._in_unit = False
        self._parts = []


def reassemble(packets: Iterable[Union[Packet, bytes]], cfg: PacketStreamConfig) -> Tuple[List[bytes], ReassemblyStats]:
    r = Reassembler(cfg)
    units: List[bytes] = []
    for p in packets:
        units.extend(r.feed(p))
    r.finish()
    return units, r.stats


def iter_records(blob: bytes, cfg: PacketStreamConfig) -> Iterator[bytes]:
    size = cfg.record_size
    for off in range(0, len(blob) - size + 1, size):
        yield blob[off:off + size]
