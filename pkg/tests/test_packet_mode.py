import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from ginga_drm.adm import TimeBaseMessage, encode_adm
from ginga_drm.datagroup import encode_data_group
from ginga_drm.packet_mode import (
    ContinuityCounter,
    PacketStreamConfig,
    filler_packet,
    packetize,
    parse_packet,
    reassemble,
)

from oracles import reference_reassemble


def test_unit_of_exactly_one_packet():
    cfg = PacketStreamConfig(40)
    [p] = packetize(bytes(range(40)), cfg, ContinuityCounter())
    assert p.first and p.last and not p.padded


def test_unit_one_byte_longer_than_packet():
    cfg = PacketStreamConfig(40)
    a, b = packetize(bytes(41), cfg, ContinuityCounter())
    assert not a.padded and b.padded
    assert (a.first, a.last, b.first, b.last) == (True, False, False, True)


def test_nine_byte_group_in_forty_byte_packet():
    unit = encode_data_group(encode_adm(TimeBaseMessage(tbv=5000)))
    assert len(unit) == 9
    [p] = packetize(unit, PacketStreamConfig(40), ContinuityCounter())
    assert p.padded and p.useful == unit
    assert len(p.data) - len(unit) == 31


def test_packet_length_bounds():
    with pytest.raises(ValueError):
        PacketStreamConfig(257)
    with pytest.raises(ValueError):
        PacketStreamConfig(100, sub_stream_id=4)


def test_drop_middle_packet():
    cfg = PacketStreamConfig(16)
    pkts = packetize(bytes(40), cfg, ContinuityCounter())
    assert len(pkts) == 3
    units, stats = reassemble([pkts[0], pkts[2]], cfg)
    assert units == [] and stats.units_lost == 1


def test_last_packet_of_first_unit_lost():
    cfg = PacketStreamConfig(16)
    c = ContinuityCounter()
    u1, u2 = b"A" * 30, b"B" * 30
    p1, p2 = packetize(u1, cfg, c), packetize(u2, cfg, c)
    received = p1[:-1] + p2
    units, _ = reassemble(received, cfg)
    assert units == [u2]
    assert units == reference_reassemble([(p.first, p.last, p.continuity, p.useful) for p in received])


def test_filler_packets_yield_nothing():
    cfg = PacketStreamConfig(20)
    c = ContinuityCounter()
    units, stats = reassemble([filler_packet(cfg, c) for _ in range(5)], cfg)
    assert units == [] and stats.gaps == 0


def test_corrupted_packet_is_discarded():
    cfg = PacketStreamConfig(20)
    rec = bytearray(packetize(b"hello", cfg, ContinuityCounter())[0].to_bytes())
    rec[3] ^= 0x04
    units, stats = reassemble([bytes(rec)], cfg)
    assert units == [] and stats.crc_errors == 1


def test_other_sub_stream_ignored():
    tx = PacketStreamConfig(20, sub_stream_id=2)
    units, stats = reassemble(packetize(b"x", tx, ContinuityCounter()), PacketStreamConfig(20, 0))
    assert units == [] and stats.other_stream == 1


@settings(max_examples=300)
@given(st.sampled_from([16, 40, 200]), st.lists(st.integers(1, 4096), min_size=1, max_size=6), st.randoms())
def test_zero_loss_round_trip(length, sizes, rnd):
    cfg = PacketStreamConfig(length)
    c = ContinuityCounter()
    units = [rnd.randbytes(n) for n in sizes]
    records = [p.to_bytes() for u in units for p in packetize(u, cfg, c)]
    got, stats = reassemble(records, cfg)
    assert got == units
    assert stats.units_lost == stats.gaps == 0


@settings(max_examples=300)
@given(st.lists(st.integers(1, 120), min_size=1, max_size=8), st.floats(0.0, 0.6), st.randoms())
def test_matches_reference_reassembler_under_loss(sizes, loss, rnd):
    cfg = PacketStreamConfig(16)
    c = ContinuityCounter()
    sent = []
    for n in sizes:
        sent.extend(packetize(rnd.randbytes(n), cfg, c))
        if rnd.random() < 0.3:
            sent.append(filler_packet(cfg, c))
    received = [p for p in sent if rnd.random() >= loss]
    got, _ = reassemble([parse_packet(p.to_bytes(), cfg) for p in received], cfg)
    assert got == reference_reassemble([(p.first, p.last, p.continuity, p.useful) for p in received])


def test_recovered_units_contain_no_padding():
    cfg = PacketStreamConfig(16)
    c = ContinuityCounter()
    units = [b"\xff" * n for n in (1, 15, 16, 17, 33)]
    got, _ = reassemble([p for u in units for p in packetize(u, cfg, c)], cfg)
    assert got == units


def test_recovery_rate_matches_binomial():
    cfg = PacketStreamConfig(16)
    k, p, trials = 4, 0.1, 10_000
    rnd = random.Random(7)
    unit = bytes(range(16 * k))
    recovered = 0
    for _ in range(trials):
        c = ContinuityCounter(rnd.randrange(8))
        # guard packets keep runs of losses from spanning trials
        pkts = [filler_packet(cfg, c)] + packetize(unit, cfg, c) + [filler_packet(cfg, c)]
        kept = [pkts[0]] + [q for q in pkts[1:-1] if rnd.random() >= p] + [pkts[-1]]
        units, _ = reassemble(kept, cfg)
        recovered += units == [unit]
    expected = (1 - p) ** k
    se = math.sqrt(expected * (1 - expected) / trials)
    assert abs(recovered / trials - expected) <= 3 * se
