"""
Container file: a captured packet-mode stream plus its signaling sidecar.

    magic           4 bytes  b"GDRM"
    version         1 byte   1
    packet_length   2 bytes  big-endian, payload bytes per packet
    sidecar_length  4 bytes  big-endian
    sidecar         JSON, UTF-8
    records         k x (super_frame(4, big-endian) + packet record)

A packet record is header(1) + data(packet_length) + crc(2). The super-frame
index is the receiver's clock for that packet; it is not part of the
transmitted packet, so the channel simulator never corrupts it and dropped
packets do not shift the time of the survivors.

Sidecar schema (version 1)::

    {
      "format": "gdrm-sidecar",
      "schema_version": 1,
      "multiplex": {"streams": [...], "services": [...]},
      "signaling": {"fac_application_identifier": 4 | null,
                    "packet_mode_indicator": 1, "data_unit_indicator": 1,
                    "application_domain": 0, "user_application_identifier": 1},
      "stream": {"stream_id": int, "sub_stream_id": 0..3},
      "super_frame_packets": int,
      "fac_channel": null
    }

``fac_channel`` is reserved for FAC channel parameters of standalone data
services; ``multiplex`` may describe several services although a version 1
container carries a single data sub-stream.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import List, Tuple

from .errors import BadMagic, ContainerTruncated, UnsupportedVersion
from .packet_mode import PacketStreamConfig

MAGIC = b"GDRM"
VERSION = 1
HEADER = struct.Struct(">4sBHI")
FRAME_INDEX = struct.Struct(">I")
SIDECAR_FORMAT = "gdrm-sidecar"


@dataclass
class Container:
    packet_length: int
    sidecar: dict
    records: List[Tuple[int, bytes]] = field(default_factory=list)

    @property
    def stream_config(self) -> PacketStreamConfig:
        sub = self.sidecar.get("stream", {}).get("sub_stream_id", 0)
        return PacketStreamConfig(self.packet_length, sub)

    @property
    def record_size(self) -> int:
        return FRAME_INDEX.size + self.stream_config.record_size

    def to_bytes(self) -> bytes:
        side = json.dumps(self.sidecar, sort_keys=True).encode("utf-8")
        size = self.stream_config.record_size
        out = bytearray(HEADER.pack(MAGIC, VERSION, self.packet_length, len(side)))
        out += side
        for sf, rec in self.records:
            if len(rec) != size:
                raise ValueError(f"packet record of {len(rec)} bytes, expected {size}")
            out += FRAME_INDEX.pack(sf) + rec
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Container":
        data = bytes(data)
        if len(data) < len(MAGIC) or data[:4] != MAGIC:
            raise BadMagic("not a GDRM container")
        if len(data) < 5:
            raise ContainerTruncated("container header truncated")
        if data[4] != VERSION:
            raise UnsupportedVersion(f"container version {data[4]} is not supported")
        if len(data) < HEADER.size:
            raise ContainerTruncated("container header truncated")
        _, _, packet_length, side_len = HEADER.unpack_from(data)
        start = HEADER.size + side_len
        if len(data) < start:
            raise ContainerTruncated("sidecar truncated")
        try:
            sidecar = json.loads(data[HEADER.size:start].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ContainerTruncated(f"sidecar is not valid JSON: {exc}") from exc
        if not isinstance(sidecar, dict) or sidecar.get("format") != SIDECAR_FORMAT:
            raise UnsupportedVersion("unrecognized sidecar")
        try:
            c = cls(packet_length, sidecar)
            size = c.record_size
        except ValueError as exc:
            raise UnsupportedVersion(str(exc)) from exc
        body = len(data) - start
        if body % size:
            raise ContainerTruncated(f"{body} record bytes is not a multiple of the {size}-byte record")
        for off in range(start, len(data), size):
            c.records.append((FRAME_INDEX.unpack_from(data, off)[0], data[off + FRAME_INDEX.size:off + size]))
        return c

    @property
    def super_frames(self) -> int:
        return self.records[-1][0] + 1 if self.records else 0
