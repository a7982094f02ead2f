"""
Receiver-side time base driven by TimeBase messages and super-frame ticks,
``tbv`` anchor literals, and the EditingCommand scheduler.

All quantities are TBV units: 1000 per super frame, 33-bit wrap-around.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Dict, List, Set

from .adm import TBV_MAX, TBV_MODULUS, EditingCommandMessage, TimeBaseMessage
from .errors import BadTbvLiteral, TbvOutOfRange

TBV_PER_SUPER_FRAME = 1000

_TBV_LITERAL = re.compile(r"([0-9]+)tbv")


def parse_tbv_literal(text: str) -> int:
    """``"5000tbv"`` -> 5000."""
    m = _TBV_LITERAL.fullmatch(text)
    if m is None:
        raise BadTbvLiteral(f"{text!r} is not a <decimal>tbv literal")
    value = int(m.group(1))
    if value > TBV_MAX:
        raise TbvOutOfRange(f"{value} does not fit in 33 bits")
    return value


def format_tbv_literal(value: int) -> str:
    if not 0 <= value <= TBV_MAX:
        raise TbvOutOfRange(f"{value} does not fit in 33 bits")
    return f"{value}tbv"


@dataclass(frozen=True)
class TimeBaseConfig:
    """Elastic compensation tuning.

    Drifts up to ``elastic_window`` are absorbed by bending the per-tick
    increment by at most ``max_slew``; larger forward differences jump.
    """

    elastic_window: int = 3000
    max_slew: int = 250
    increment: int = TBV_PER_SUPER_FRAME

    def __post_init__(self):
        if self.elastic_window < 0:
            raise ValueError("elastic_window must be non-negative")
        if not 1 <= self.max_slew < self.increment:
            raise ValueError("max_slew must be in [1, increment) so a running clock never stalls")

    @property
    def horizon(self) -> int:
        """Ticks needed to amortize the largest in-window drift."""
        return -(-self.elastic_window // self.max_slew)


@dataclass(frozen=True)
class TimeBaseState:
    current_tbv: int = 0
    running: bool = False
    initialized: bool = False
    suppress_events: bool = False
    pending_drift: int = 0
    drift_violations: int = 0
    wraps: int = 0


def _signed_delta(target: int, current: int) -> int:
    """target - current on the 33-bit circle, in (-2**32, 2**32]."""
    d = (target - current) % TBV_MODULUS
    return d - TBV_MODULUS if d > TBV_MODULUS // 2 else d


def timebase_apply(s: TimeBaseState, m: TimeBaseMessage,
                   cfg: TimeBaseConfig = TimeBaseConfig()) -> TimeBaseState:
    running = m.running
    if not s.initialized:
        return replace(s, current_tbv=m.tbv, running=running, initialized=True, pending_drift=0)
    if m.discontinuity:
        return replace(s, current_tbv=m.tbv, running=running, suppress_events=True, pending_drift=0)

    delta = _signed_delta(m.tbv, s.current_tbv)
    if abs(delta) <= cfg.elastic_window:
        if not running and delta >= 0:
            # pausing: stop at the indicated value, moving forward only
            return replace(s, current_tbv=m.tbv, running=False, pending_drift=0)
        return replace(s, running=running, pending_drift=delta)
    if delta > 0:
        return replace(s, current_tbv=m.tbv, running=running, pending_drift=0)
    # a backward leap without the discontinuity flag is a broadcaster error
    return replace(s, running=running, drift_violations=s.drift_violations + 1)


def timebase_tick(s: TimeBaseState, cfg: TimeBaseConfig = TimeBaseConfig()) -> TimeBaseState:
    """Advance one super frame."""
    if not s.initialized:
        raise ValueError("time base has not received its first TimeBase message")
    if not s.running:
        return replace(s, suppress_events=False)
    slew = max(-cfg.max_slew, min(cfg.max_slew, s.pending_drift))
    raw = s.current_tbv + cfg.increment + slew
    return replace(s,
                   current_tbv=raw % TBV_MODULUS,
                   pending_drift=s.pending_drift - slew,
                   suppress_events=False,
                   wraps=s.wraps + (raw >= TBV_MODULUS))


@dataclass
class EditingScheduler:
    """Holds EditingCommands until due.

    DoItNow commands are due at the next poll; the others once the time
    base reaches their TBV. Commands that fall due while events are
    suppressed after a discontinuity are discarded, never fired late. An
    EventId already pending or already handled is a retransmission and is
    ignored.
    """

    _pending: Dict[int, EditingCommandMessage] = field(default_factory=dict)
    _seen: Set[int] = field(default_factory=set)
    suppressed: List[EditingCommandMessage] = field(default_factory=list)

    def offer(self, m: EditingCommandMessage) -> bool:
        """Queue a command; False when it is a retransmission."""
        if m.event_id in self._seen:
            return False
        self._seen.add(m.event_id)
        self._pending[m.event_id] = m
        return True

    def poll(self, current_tbv: int, suppress_events: bool = False) -> List[EditingCommandMessage]:
        """Release due commands in arrival order; [] while suppressed."""
        due = [m for m in self._pending.values() if m.do_it_now or current_tbv >= m.tbv]
        for m in due:
            del self._pending[m.event_id]
        if suppress_events:
            self.suppressed.extend(due)
            return []
        return due

    @property
    def pending(self) -> List[EditingCommandMessage]:
        return list(self._pending.values())
