"""
16-bit CRC used by every framing layer of the chain.

Parameters (CRC-16/X-25 in the usual catalog naming):
    poly    x^16 + x^12 + x^5 + 1 (0x1021), reflected in and out
    init    0xFFFF
    xorout  0xFFFF
    check   crc16(b"123456789") == 0x906E

``binascii.crc_hqx`` runs the same polynomial MSB-first in C. Feeding it
bit-reversed bytes and reversing the 16-bit register afterwards yields the
reflected variant, so no per-byte Python loop is needed.
"""

import binascii
import struct

_REV8 = bytes(int(f"{i:08b}"[::-1], 2) for i in range(256))

CRC_SIZE = 2


def _reverse16(value: int) -> int:
    return (_REV8[value & 0xFF] << 8) | _REV8[value >> 8]


def crc16(data: bytes) -> int:
    """Return the 16-bit check value of ``data``."""
    reg = binascii.crc_hqx(bytes(data).translate(_REV8), 0xFFFF)
    return _reverse16(reg) ^ 0xFFFF


def append_crc(data: bytes) -> bytes:
    """Return ``data`` followed by its CRC, big-endian."""
    return bytes(data) + struct.pack(">H", crc16(data))


def check_crc(frame: bytes) -> bool:
    """True when the trailing two bytes of ``frame`` match the CRC of the rest."""
    if len(frame) < CRC_SIZE:
        return False
    return crc16(frame[:-CRC_SIZE]) == struct.unpack(">H", frame[-CRC_SIZE:])[0]
