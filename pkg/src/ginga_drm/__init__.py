"""Transport of Ginga applications and auxiliary data messages over DRM data streams."""

from .adm import EditingCommandMessage, SignLanguageMessage, TimeBaseMessage, TimeBaseStatus, decode_adm, encode_adm
from .app import EntryPoint, parse_entry_point, scan_application
from .channel import ChannelParams, simulate_channel
from .container import Container
from .crc import crc16
from .datagroup import DataGroup, SessionHeader, decode_data_group, encode_data_group
from .mot import CarouselOptions, HeaderParameter, MotObject, MotReceiver, build_carousel
from .ncl_validator import validate_ncl
from .pipeline import PackOptions, run_pack, run_unpack

__all__ = [
    "CarouselOptions",
    "ChannelParams",
    "Container",
    "DataGroup",
    "EditingCommandMessage",
    "EntryPoint",
    "HeaderParameter",
    "MotObject",
    "MotReceiver",
    "PackOptions",
    "SessionHeader",
    "SignLanguageMessage",
    "TimeBaseMessage",
    "TimeBaseStatus",
    "build_carousel",
    "crc16",
    "decode_adm",
    "decode_data_group",
    "encode_adm",
    "encode_data_group",
    "parse_entry_point",
    "run_pack",
    "run_unpack",
    "scan_application",
    "simulate_channel",
    "validate_ncl",
]

__version__ = "0.1.0"
