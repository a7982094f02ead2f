"""
MSC data group framing.

Layout, MSB first::

    byte 0   Extension(1) CRC(1) Segment(1) UserAccess(1) DataGroupType(4)
    byte 1   ContinuityIndex(4) RepetitionIndex(4)
    [session header, 5 bytes, only when Segment and UserAccess flags are set]
        Last(1) SegmentNumber(15)
        Rfa(3) TransportIdFlag(1)=1 LengthIndicator(4)=2 TransportId(16)
    data field
    [CRC, 2 bytes, when the CRC flag is set; covers everything before it]

Two header configurations are produced: the bare 2-byte header used by
auxiliary data messages, and the 2+5 byte header carrying segmentation and
TransportId used by the MOT carousel. The extension field form is never
emitted and is rejected on decode.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional

from .crc import CRC_SIZE, crc16
from .errors import (
    CrcMismatch,
    InvalidDataGroup,
    PayloadTooLarge,
    Truncated,
    UnsupportedHeaderConfig,
)

MAX_DATA_FIELD = 8191
BASE_HEADER_SIZE = 2
SESSION_HEADER_SIZE = 5

# Data group types
GENERAL_DATA = 0
CA_MESSAGES = 1
MOT_HEADER = 3
MOT_BODY = 4
MOT_BODY_SCRAMBLED = 5
MOT_DIRECTORY = 6
MOT_DIRECTORY_COMPRESSED = 7
ADM_TIMEBASE = 10
ADM_EDITING_COMMAND = 11
ADM_SIGN_LANGUAGE = 12

ADM_TYPES = frozenset({ADM_TIMEBASE, ADM_EDITING_COMMAND, ADM_SIGN_LANGUAGE})

_UA_TRANSPORT_ID_ONLY = 0x12  # rfa=000, transport id flag=1, length indicator=2


@dataclass(frozen=True)
class SessionHeader:
    last_segment: bool
    segment_number: int
    transport_id: int

    def __post_init__(self):
        if not 0 <= self.segment_number <= 0x7FFF:
            raise InvalidDataGroup(f"segment_number {self.segment_number} out of 15-bit range")
        if not 0 <= self.transport_id <= 0xFFFF:
            raise InvalidDataGroup(f"transport_id {self.transport_id} out of 16-bit range")


@dataclass(frozen=True)
class DataGroup:
    group_type: int
    payload: bytes = b""
    continuity_index: int = 0
    repetition_index: int = 0
    session: Optional[SessionHeader] = None
    crc_present: bool = True

    def __post_init__(self):
        for name in ("group_type", "continuity_index", "repetition_index"):
            value = getattr(self, name)
            if not 0 <= value <= 15:
                raise InvalidDataGroup(f"{name}={value} does not fit in 4 bits")
        if self.group_type in ADM_TYPES and (self.session is not None or not self.crc_present):
            raise InvalidDataGroup("ADM data groups carry no session header and always a CRC")
        object.__setattr__(self, "payload", bytes(self.payload))

    @property
    def encoded_size(self) -> int:
        return (BASE_HEADER_SIZE
                + (SESSION_HEADER_SIZE if self.session else 0)
                + len(self.payload)
                + (CRC_SIZE if self.crc_present else 0))


def encode_data_group(g: DataGroup) -> bytes:
    if len(g.payload) > MAX_DATA_FIELD:
        raise PayloadTooLarge(f"data field of {len(g.payload)} bytes exceeds {MAX_DATA_FIELD}")
    has_session = g.session is not None
    b0 = (int(g.crc_present) << 6) | (int(has_session) << 5) | (int(has_session) << 4) | g.group_type
    b1 = (g.continuity_index << 4) | g.repetition_index
    out = bytearray((b0, b1))
    if has_session:
        s = g.session
        out += struct.pack(">HBH",
                           (int(s.last_segment) << 15) | s.segment_number,
                           _UA_TRANSPORT_ID_ONLY,
                           s.transport_id)
    out += g.payload
    if g.crc_present:
        out += struct.pack(">H", crc16(out))
    return bytes(out)


def decode_data_group(data: bytes, *, require_crc: bool = True) -> DataGroup:
    """Parse one encoded data group.

    With ``require_crc`` (the default for this chain, where every group is
    CRC-protected) the trailing CRC is verified before any header field is
    trusted, so a flipped CRC flag is caught as corruption too.
    """
    data = bytes(data)
    minimum = BASE_HEADER_SIZE + (CRC_SIZE if require_crc or (data[:1] and data[0] & 0x40) else 0)
    if len(data) < minimum:
        raise Truncated(f"{len(data)} bytes is shorter than the minimum data group")
    if require_crc:
        if crc16(data[:-CRC_SIZE]) != struct.unpack(">H", data[-CRC_SIZE:])[0]:
            raise CrcMismatch("data group CRC mismatch")

    b0, b1 = data[0], data[1]
    extension = bool(b0 & 0x80)
    crc_flag = bool(b0 & 0x40)
    segment_flag = bool(b0 & 0x20)
    ua_flag = bool(b0 & 0x10)
    if extension:
        raise UnsupportedHeaderConfig("extension field is not supported")
    if segment_flag != ua_flag:
        raise UnsupportedHeaderConfig("segment and user access fields must be both present or both absent")
    if require_crc and not crc_flag:
        raise UnsupportedHeaderConfig("CRC flag cleared on a CRC-protected stream")

    if crc_flag and not require_crc:
        if crc16(data[:-CRC_SIZE]) != struct.unpack(">H", data[-CRC_SIZE:])[0]:
            raise CrcMismatch("data group CRC mismatch")

    end = len(data) - (CRC_SIZE if crc_flag else 0)
    pos = BASE_HEADER_SIZE
    session = None
    if segment_flag:
        if end - pos < SESSION_HEADER_SIZE:
            raise Truncated("session header truncated")
        seg, ua, tid = struct.unpack_from(">HBH", data, pos)
        if ua != _UA_TRANSPORT_ID_ONLY:
            raise UnsupportedHeaderConfig(f"user access field 0x{ua:02X} is not transport-id only")
        session = SessionHeader(bool(seg >> 15), seg & 0x7FFF, tid)
        pos += SESSION_HEADER_SIZE
    payload = data[pos:end]
    if len(payload) > MAX_DATA_FIELD:
        raise PayloadTooLarge(f"data field of {len(payload)} bytes exceeds {MAX_DATA_FIELD}")
    try:
        return DataGroup(group_type=b0 & 0x0F,
                         payload=payload,
                         continuity_index=b1 >> 4,
                         repetition_index=b1 & 0x0F,
                         session=session,
                         crc_present=crc_flag)
    except InvalidDataGroup as exc:
        raise UnsupportedHeaderConfig(str(exc)) from exc
