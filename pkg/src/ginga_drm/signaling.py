"""
Multiplex topology and the FAC/SDC parameter values announcing a Ginga
application stream.

Signaling is modelled as structured values and serialized to the container
sidecar; FAC/SDC channel entities are not bit-encoded here.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .errors import NotAGingaService

# FAC service descriptor "Application identifier" for a standalone Ginga data service
FAC_APPLICATION_ID_GINGA = 4

# SDC Application information
PACKET_MODE_INDICATOR = 1
DATA_UNIT_INDICATOR = 1
APPLICATION_DOMAIN_DRM = 0
USER_APPLICATION_ID_NCL = 0x0001

MAX_STREAMS = 4
MAX_SUB_STREAM = 3


class ServiceKind(str, enum.Enum):
    AUDIO = "audio"
    DATA = "data"


class StreamKind(str, enum.Enum):
    AUDIO = "audio"
    DATA = "data"


@dataclass(frozen=True)
class StreamDesc:
    stream_id: int
    kind: StreamKind


@dataclass(frozen=True)
class ServiceDesc:
    label: str
    kind: ServiceKind
    audio_stream: Optional[int] = None
    data_refs: Tuple[Tuple[int, int], ...] = ()
    carries_ginga: bool = False


@dataclass(frozen=True)
class MultiplexConfig:
    streams: Tuple[StreamDesc, ...]
    services: Tuple[ServiceDesc, ...]

    def to_dict(self) -> dict:
        return {
            "streams": [{"stream_id": s.stream_id, "kind": s.kind.value} for s in self.streams],
            "services": [{
                "label": s.label,
                "kind": s.kind.value,
                "audio_stream": s.audio_stream,
                "data_refs": [list(r) for r in s.data_refs],
                "carries_ginga": s.carries_ginga,
            } for s in self.services],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MultiplexConfig":
        return cls(
            streams=tuple(StreamDesc(int(s["stream_id"]), StreamKind(s["kind"])) for s in d["streams"]),
            services=tuple(ServiceDesc(label=s["label"],
                                       kind=ServiceKind(s["kind"]),
                                       audio_stream=s.get("audio_stream"),
                                       data_refs=tuple((int(a), int(b)) for a, b in s.get("data_refs", [])),
                                       carries_ginga=bool(s.get("carries_ginga", False)))
                           for s in d["services"]),
        )


@dataclass(frozen=True)
class AppSignaling:
    fac_application_identifier: Optional[int]
    packet_mode_indicator: int = PACKET_MODE_INDICATOR
    data_unit_indicator: int = DATA_UNIT_INDICATOR
    application_domain: int = APPLICATION_DOMAIN_DRM
    user_application_identifier: int = USER_APPLICATION_ID_NCL

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "AppSignaling":
        return cls(**d)


def app_signaling_for(service_kind: ServiceKind, carries_ginga: bool) -> AppSignaling:
    """Signaling values for a service carrying a Ginga application.

    The FAC application identifier is only signalled for standalone data
    services; PAD on an audio service carries the SDC values alone.
    """
    if not carries_ginga:
        raise NotAGingaService(f"{ServiceKind(service_kind).value} service carries no Ginga application")
    kind = ServiceKind(service_kind)
    fac = FAC_APPLICATION_ID_GINGA if kind is ServiceKind.DATA else None
    return AppSignaling(fac)


@dataclass(frozen=True, order=True)
class TopologyViolation:
    rule: str
    element: str
    message: str = field(compare=False)


def validate_multiplex(cfg: MultiplexConfig) -> List[TopologyViolation]:
    out: List[TopologyViolation] = []
    # id -> kinds declared for it; a set keeps duplicate ids order-independent
    kinds: Dict[int, Set[StreamKind]] = {}
    for s in cfg.streams:
        kinds.setdefault(s.stream_id, set()).add(s.kind)
    for sid in sorted(kinds):
        if sum(s.stream_id == sid for s in cfg.streams) > 1:
            out.append(TopologyViolation("duplicate-stream", f"stream {sid}", "stream id used more than once"))
    if not 1 <= len(cfg.streams) <= MAX_STREAMS:
        out.append(TopologyViolation("stream-count", "multiplex",
                                     f"{len(cfg.streams)} streams; a multiplex carries 1 to {MAX_STREAMS}"))

    for svc in cfg.services:
        where = f"service {svc.label}"
        if svc.kind is ServiceKind.AUDIO:
            if svc.audio_stream is None:
                out.append(TopologyViolation("audio-service-stream", where, "audio service without an audio stream"))
            elif svc.audio_stream not in kinds:
                out.append(TopologyViolation("unknown-stream", where, f"stream {svc.audio_stream} does not exist"))
            elif StreamKind.AUDIO not in kinds[svc.audio_stream]:
                out.append(TopologyViolation("stream-kind-mismatch", where,
                                             f"audio service references data stream {svc.audio_stream}"))
        else:
            if svc.audio_stream is not None:
                out.append(TopologyViolation("data-service-audio", where, "data service references an audio stream slot"))
            if not svc.data_refs:
                out.append(TopologyViolation("data-service-stream", where, "data service without a data stream"))
        for stream, sub in svc.data_refs:
            ref = f"{where} -> ({stream}, {sub})"
            if not 0 <= sub <= MAX_SUB_STREAM:
                out.append(TopologyViolation("sub-stream-range", ref, f"sub-stream {sub} outside 0..{MAX_SUB_STREAM}"))
            if stream not in kinds:
                out.append(TopologyViolation("unknown-stream", ref, f"stream {stream} does not exist"))
            elif StreamKind.DATA not in kinds[stream]:
                out.append(TopologyViolation("stream-kind-mismatch", ref, f"stream {stream} is an audio stream"))
    return sorted(out)


def single_service_multiplex(standalone: bool, sub_stream_id: int = 0) -> MultiplexConfig:
    """The topology of a one-application container: either a standalone data
    service, or PAD attached to an audio service."""
    if standalone:
        return MultiplexConfig(
            streams=(StreamDesc(0, StreamKind.DATA),),
            services=(ServiceDesc("ginga", ServiceKind.DATA, None, ((0, sub_stream_id),), True),),
        )
    return MultiplexConfig(
        streams=(StreamDesc(0, StreamKind.AUDIO), StreamDesc(1, StreamKind.DATA)),
        services=(ServiceDesc("audio+ginga", ServiceKind.AUDIO, 0, ((1, sub_stream_id),), True),),
    )
