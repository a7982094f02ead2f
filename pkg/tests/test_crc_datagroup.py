import pytest
from hypothesis import given, settings, strategies as st

from ginga_drm.crc import append_crc, check_crc, crc16
from ginga_drm.datagroup import (
    ADM_TIMEBASE,
    MAX_DATA_FIELD,
    MOT_BODY,
    DataGroup,
    SessionHeader,
    decode_data_group,
    encode_data_group,
)
from ginga_drm.errors import CrcMismatch, InvalidDataGroup, PayloadTooLarge, Truncated, UnsupportedHeaderConfig

from oracles import crc16_x25_bitwise, data_group_oracle


# --- crc ----------------------------------------------------------------------

def test_crc_check_value():
    assert crc16(b"123456789") == 0x906E
    assert crc16_x25_bitwise(b"123456789") == 0x906E


def test_crc_empty_input():
    assert crc16(b"") == crc16_x25_bitwise(b"") == 0x0000


@given(st.binary(max_size=512))
def test_crc_matches_bitwise_oracle(data):
    assert crc16(data) == crc16_x25_bitwise(data)


@pytest.mark.parametrize("x", range(256))
def test_crc_single_byte_flips(x):
    base = crc16(bytes((x,)))
    assert all(crc16(bytes((x ^ (1 << b),))) != base for b in range(8))


@given(st.binary(max_size=64))
def test_append_and_check_crc(data):
    framed = append_crc(data)
    assert len(framed) == len(data) + 2
    assert check_crc(framed)
    assert not check_crc(framed[:-1] + bytes((framed[-1] ^ 0x80,)))


# --- data groups --------------------------------------------------------------

def test_timebase_group_example():
    out = encode_data_group(DataGroup(ADM_TIMEBASE, bytes(5)))
    assert len(out) == 9
    assert out[0] == 0x4A and out[1] == 0x00
    assert out == data_group_oracle(10, bytes(5))


def test_maximum_data_field():
    assert len(encode_data_group(DataGroup(ADM_TIMEBASE, bytes(MAX_DATA_FIELD)))) == 8195
    with pytest.raises(PayloadTooLarge):
        encode_data_group(DataGroup(ADM_TIMEBASE, bytes(MAX_DATA_FIELD + 1)))


def test_crc_mismatch_and_truncation():
    out = bytearray(encode_data_group(DataGroup(ADM_TIMEBASE, bytes(5))))
    out[-1] ^= 0x01
    with pytest.raises(CrcMismatch):
        decode_data_group(bytes(out))
    with pytest.raises(Truncated):
        decode_data_group(b"\x4a\x00\x00")


def test_adm_groups_reject_session_header():
    with pytest.raises(InvalidDataGroup):
        DataGroup(ADM_TIMEBASE, bytes(5), session=SessionHeader(True, 0, 1))
    with pytest.raises(InvalidDataGroup):
        DataGroup(ADM_TIMEBASE, bytes(5), crc_present=False)


def test_extension_flag_rejected():
    body = bytes((0xCA, 0x00)) + bytes(5)
    with pytest.raises(UnsupportedHeaderConfig):
        decode_data_group(append_crc(body))


def test_crcless_group_decodes_when_allowed():
    g = DataGroup(MOT_BODY, b"ab", session=SessionHeader(True, 0, 9), crc_present=False)
    out = encode_data_group(g)
    assert len(out) == 2 + 5 + 2
    assert decode_data_group(out, require_crc=False) == g


sessions = st.none() | st.builds(SessionHeader, st.booleans(), st.integers(0, 0x7FFF), st.integers(0, 0xFFFF))


@st.composite
def data_groups(draw, max_payload=300):
    session = draw(sessions)
    gtype = draw(st.sampled_from([0, 3, 4, 6, 7]) if session else st.integers(0, 15))
    return DataGroup(gtype, draw(st.binary(max_size=max_payload)), draw(st.integers(0, 15)),
                     draw(st.integers(0, 15)), session)


@settings(max_examples=1000)
@given(data_groups())
def test_datagroup_round_trip(g):
    out = encode_data_group(g)
    assert decode_data_group(out) == g
    assert len(out) == 2 + (5 if g.session else 0) + len(g.payload) + 2 == g.encoded_size


@given(data_groups())
def test_encoding_matches_hand_packed_oracle(g):
    s = g.session
    oracle = data_group_oracle(g.group_type, g.payload, g.continuity_index, g.repetition_index,
                               None if s is None else (s.last_segment, s.segment_number, s.transport_id))
    assert encode_data_group(g) == oracle


@settings(max_examples=30)
@given(data_groups(max_payload=55))
def test_every_single_bit_flip_is_detected(g):
    out = encode_data_group(g)
    assert len(out) <= 64
    for i in range(len(out) * 8):
        damaged = bytearray(out)
        damaged[i // 8] ^= 0x80 >> (i % 8)
        with pytest.raises(CrcMismatch):
            decode_data_group(bytes(damaged))
