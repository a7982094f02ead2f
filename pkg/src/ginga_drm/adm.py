"""
Auxiliary Data Messages carried in MSC data groups of types 10, 11 and 12.

Payload layouts, MSB first:

    TimeBase (5 bytes)
        Status(1) Discontinuity(1) Rfu(5) TimeBaseValue(33)
    EditingCommand (8 bytes + payload)
        EventId(16) DoItNow(1) Rfu(6) TimeBaseValue(33) CommandTag(8) CommandPayload
    SignLanguage (10 bytes + private data)
        EventId(16) Reserved(31) EventTBV(33) PrivateData
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

from .datagroup import (
    ADM_EDITING_COMMAND,
    ADM_SIGN_LANGUAGE,
    ADM_TIMEBASE,
    BASE_HEADER_SIZE,
    MAX_DATA_FIELD,
    DataGroup,
)
from .crc import CRC_SIZE
from .errors import AdmDecodeError, AdmTooLarge, LibrasVideoForbidden

TBV_BITS = 33
TBV_MODULUS = 1 << TBV_BITS
TBV_MAX = TBV_MODULUS - 1

MAX_ADM_SIZE = MAX_DATA_FIELD - BASE_HEADER_SIZE - CRC_SIZE  # 8187

TIMEBASE_SIZE = 5
EDITING_COMMAND_FIXED_SIZE = 8
SIGN_LANGUAGE_FIXED_SIZE = 10

LIBRAS_VIDEO = 0x01


class TimeBaseStatus(enum.IntEnum):
    RUNNING = 0
    PAUSED = 1


def _check(name: str, value: int, bits: int) -> None:
    if not 0 <= value < (1 << bits):
        raise ValueError(f"{name}={value} does not fit in {bits} bits")


@dataclass(frozen=True)
class TimeBaseMessage:
    status: TimeBaseStatus = TimeBaseStatus.RUNNING
    discontinuity: bool = False
    tbv: int = 0
    rfu: int = 0

    def __post_init__(self):
        object.__setattr__(self, "status", TimeBaseStatus(self.status))
        _check("tbv", self.tbv, TBV_BITS)
        _check("rfu", self.rfu, 5)

    @property
    def running(self) -> bool:
        return self.status is TimeBaseStatus.RUNNING


@dataclass(frozen=True)
class EditingCommandMessage:
    event_id: int
    do_it_now: bool = False
    tbv: int = 0
    command_tag: int = 0
    payload: bytes = b""
    rfu: int = 0

    def __post_init__(self):
        _check("event_id", self.event_id, 16)
        _check("tbv", self.tbv, TBV_BITS)
        _check("command_tag", self.command_tag, 8)
        _check("rfu", self.rfu, 6)
        object.__setattr__(self, "payload", bytes(self.payload))


@dataclass(frozen=True)
class SignLanguageMessage:
    """StreamEventDescriptor body without descriptorTag/descriptorLength.

    ``private_data`` is opaque apart from its leading byte, the LibrasTV
    content type, which must not select video (0x01).
    """

    event_id: int
    event_tbv: int = 0
    private_data: bytes = b""
    reserved: int = 0x7FFFFFFF

    def __post_init__(self):
        _check("event_id", self.event_id, 16)
        _check("event_tbv", self.event_tbv, TBV_BITS)
        _check("reserved", self.reserved, 31)
        object.__setattr__(self, "private_data", bytes(self.private_data))
        if self.private_data[:1] == bytes((LIBRAS_VIDEO,)):
            raise LibrasVideoForbidden("libras_content_type 0x01 (video) cannot be carried")

    @property
    def content_type(self):
        return self.private_data[0] if self.private_data else None


AdmMessage = Union[TimeBaseMessage, EditingCommandMessage, SignLanguageMessage]


def encode_adm_payload(m: AdmMessage) -> bytes:
    if isinstance(m, TimeBaseMessage):
        word = (int(m.status) << 39) | (int(m.discontinuity) << 38) | (m.rfu << 33) | m.tbv
        out = word.to_bytes(TIMEBASE_SIZE, "big")
    elif isinstance(m, EditingCommandMessage):
        word = (m.event_id << 48) | (int(m.do_it_now) << 47) | (m.rfu << 41) | (m.tbv << 8) | m.command_tag
        out = word.to_bytes(EDITING_COMMAND_FIXED_SIZE, "big") + m.payload
    elif isinstance(m, SignLanguageMessage):
        word = (m.event_id << 64) | (m.reserved << 33) | m.event_tbv
        out = word.to_bytes(SIGN_LANGUAGE_FIXED_SIZE, "big") + m.private_data
    else:
        raise TypeError(f"not an ADM message: {type(m).__name__}")
    if len(out) > MAX_ADM_SIZE:
        raise AdmTooLarge(f"ADM of {len(out)} bytes exceeds {MAX_ADM_SIZE}")
    return out


_GROUP_TYPE = {
    TimeBaseMessage: ADM_TIMEBASE,
    EditingCommandMessage: ADM_EDITING_COMMAND,
    SignLanguageMessage: ADM_SIGN_LANGUAGE,
}


def encode_adm(m: AdmMessage, continuity_index: int = 0, repetition_index: int = 0) -> DataGroup:
    payload = encode_adm_payload(m)
    return DataGroup(_GROUP_TYPE[type(m)], payload, continuity_index, repetition_index,
                     session=None, crc_present=True)


def decode_adm_payload(group_type: int, payload: bytes) -> AdmMessage:
    if len(payload) > MAX_ADM_SIZE:
        raise AdmTooLarge(f"ADM of {len(payload)} bytes exceeds {MAX_ADM_SIZE}")
    if group_type == ADM_TIMEBASE:
        if len(payload) != TIMEBASE_SIZE:
            raise AdmDecodeError(f"TimeBase payload must be {TIMEBASE_SIZE} bytes, got {len(payload)}")
        w = int.from_bytes(payload, "big")
        return TimeBaseMessage(TimeBaseStatus(w >> 39), bool((w >> 38) & 1), w & TBV_MAX, (w >> 33) & 0x1F)
    if group_type == ADM_EDITING_COMMAND:
        if len(payload) < EDITING_COMMAND_FIXED_SIZE:
            raise AdmDecodeError("EditingCommand payload truncated")
        w = int.from_bytes(payload[:EDITING_COMMAND_FIXED_SIZE], "big")
        return EditingCommandMessage(event_id=w >> 48,
                                     do_it_now=bool((w >> 47) & 1),
                                     tbv=(w >> 8) & TBV_MAX,
                                     command_tag=w & 0xFF,
                                     payload=payload[EDITING_COMMAND_FIXED_SIZE:],
                                     rfu=(w >> 41) & 0x3F)
    if group_type == ADM_SIGN_LANGUAGE:
        if len(payload) < SIGN_LANGUAGE_FIXED_SIZE:
            raise AdmDecodeError("SignLanguage payload truncated")
        w = int.from_bytes(payload[:SIGN_LANGUAGE_FIXED_SIZE], "big")
        return SignLanguageMessage(event_id=w >> 64,
                                   event_tbv=w & TBV_MAX,
                                   private_data=payload[SIGN_LANGUAGE_FIXED_SIZE:],
                                   reserved=(w >> 33) & 0x7FFFFFFF)
    raise AdmDecodeError(f"data group type {group_type} is not an ADM type")


def decode_adm(g: DataGroup) -> AdmMessage:
    return decode_adm_payload(g.group_type, g.payload)
