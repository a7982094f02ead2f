"""Lossy channel simulator for containers: i.i.d. packet loss and bit errors."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .container import Container

_CHUNK = 1024


@dataclass(frozen=True)
class ChannelParams:
    loss_probability: float = 0.0
    bit_error_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("loss_probability", "bit_error_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def simulate_channel(container: Container, p: ChannelParams) -> Container:
    """Drop each packet with ``loss_probability``, then flip every bit of the
    survivors with ``bit_error_rate``. The sidecar and super-frame indices are
    untouched. Deterministic for a given seed."""
    rng = np.random.default_rng(p.seed)
    records = container.records
    if p.loss_probability > 0.0:
        keep = rng.random(len(records)) >= p.loss_probability
        records = [r for r, k in zip(records, keep) if k]
    else:
        records = list(records)

    if p.bit_error_rate > 0.0 and records:
        size = len(records[0][1])
        damaged = []
        for start in range(0, len(records), _CHUNK):
            chunk = records[start:start + _CHUNK]
            buf = np.frombuffer(b"".join(rec for _, rec in chunk), dtype=np.uint8).reshape(len(chunk), size)
            flips = np.packbits(rng.random((len(chunk), size * 8)) < p.bit_error_rate, axis=1)
            out = buf ^ flips
            damaged.extend((sf, out[i].tobytes()) for i, (sf, _) in enumerate(chunk))
        records = damaged

    return Container(container.packet_length, copy.deepcopy(container.sidecar), records)
