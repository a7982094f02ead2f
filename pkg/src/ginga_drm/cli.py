"""Command line interface: ``gdrm pack|unpack|inspect|adm|simulate|validate-ncl``.

Exit codes: 0 success, 1 findings (validation errors, incomplete reception),
2 I/O or format errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .adm import EditingCommandMessage, SignLanguageMessage, encode_adm
from .channel import ChannelParams, simulate_channel
from .container import Container
from .datagroup import encode_data_group
from .errors import GdrmError, MalformedDocument
from .ncl_validator import format_report, malformed_violation, validate_ncl
from .pipeline import (
    ClockChange,
    PackOptions,
    ScheduledAdm,
    TimeBasePlan,
    adm_container,
    inspect_container,
    run_pack,
    run_unpack,
)

EXIT_OK, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2


def _kv(text: str) -> dict:
    out = {}
    for item in text.split(","):
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _int(text: str) -> int:
    return int(text, 0)


def editing_command(text: str) -> ScheduledAdm:
    """``sf=2,event=1,tag=5,tbv=4000|now,payload=hex``"""
    kv = _kv(text)
    try:
        when = kv.get("tbv", "now")
        m = EditingCommandMessage(event_id=_int(kv["event"]),
                                  do_it_now=when == "now",
                                  tbv=0 if when == "now" else _int(when),
                                  command_tag=_int(kv.get("tag", "0")),
                                  payload=bytes.fromhex(kv.get("payload", "")))
        return ScheduledAdm(_int(kv.get("sf", "0")), m)
    except (KeyError, ValueError, GdrmError) as exc:
        raise argparse.ArgumentTypeError(f"bad --edit {text!r}: {exc}") from exc


def sign_language(text: str) -> ScheduledAdm:
    """``sf=2,event=7,tbv=5000,data=hex``"""
    kv = _kv(text)
    try:
        m = SignLanguageMessage(event_id=_int(kv["event"]),
                                event_tbv=_int(kv.get("tbv", "0")),
                                private_data=bytes.fromhex(kv.get("data", "")))
        return ScheduledAdm(_int(kv.get("sf", "0")), m)
    except (KeyError, ValueError, GdrmError) as exc:
        raise argparse.ArgumentTypeError(f"bad --sign {text!r}: {exc}") from exc


def clock_change(kind: str):
    def parse(text: str) -> ClockChange:
        try:
            if kind == "jump":
                sf, _, value = text.partition(":")
                return ClockChange(_int(sf), "jump", _int(value))
            return ClockChange(_int(text), kind)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad --{kind} {text!r}: {exc}") from exc
    return parse


def _entry_for(text: str):
    profile, sep, entry = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected PROFILE=ENTRY")
    return _int(profile), entry


def _add_adm_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-timebase", action="store_true", help="do not send TimeBase messages")
    p.add_argument("--tbv-start", type=_int, default=0, help="time base value of super frame 0")
    p.add_argument("--pause", type=clock_change("pause"), action="append", default=[], metavar="SF")
    p.add_argument("--resume", type=clock_change("resume"), action="append", default=[], metavar="SF")
    p.add_argument("--jump", type=clock_change("jump"), action="append", default=[], metavar="SF:TBV",
                   help="time base leap (sent with the discontinuity flag)")
    p.add_argument("--edit", type=editing_command, action="append", default=[],
                   metavar="sf=N,event=N,tag=N,tbv=N|now,payload=HEX")
    p.add_argument("--sign", type=sign_language, action="append", default=[],
                   metavar="sf=N,event=N,tbv=N,data=HEX")


def _plan(args) -> TimeBasePlan:
    return TimeBasePlan(enabled=not args.no_timebase, start=args.tbv_start,
                        changes=tuple(args.pause + args.resume + args.jump))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gdrm", description="Ginga application transport over DRM data streams")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pack", help="pack an application directory into a container")
    p.add_argument("app_dir", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--entry", required=True, help="entry point, e.g. main.ncl or main.ncl#port")
    p.add_argument("--profile", type=_int, default=1)
    p.add_argument("--entry-for", type=_entry_for, action="append", default=[], metavar="PROFILE=ENTRY",
                   help="additional DirectoryIndex for another receiver profile")
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--segment-size", type=int, default=8191)
    p.add_argument("--packet-length", type=int, default=100)
    p.add_argument("--sub-stream", type=int, default=0)
    p.add_argument("--super-frame-packets", type=int, default=10)
    p.add_argument("--interleave", action="store_true")
    p.add_argument("--compress", action="store_true", help="GZip files when it makes them smaller")
    p.add_argument("--compress-directory", action="store_true")
    p.add_argument("--standalone", action="store_true", help="signal a standalone data service instead of PAD")
    p.add_argument("--exclude-hidden", action="store_true")
    _add_adm_flags(p)

    p = sub.add_parser("unpack", help="recover the application and ADM trace from a container")
    p.add_argument("container", type=Path)
    p.add_argument("output_dir", type=Path, nargs="?")
    p.add_argument("--profile", type=_int, default=1)
    p.add_argument("--trace", type=Path, help="write the ADM event trace as JSON")

    p = sub.add_parser("inspect", help="dump data groups, parameters and signaling")
    p.add_argument("container", type=Path)

    p = sub.add_parser("adm", help="craft a container of auxiliary data messages")
    p.add_argument("output", type=Path, nargs="?")
    p.add_argument("--super-frames", type=int, default=10)
    p.add_argument("--packet-length", type=int, default=100)
    p.add_argument("--super-frame-packets", type=int, default=10)
    p.add_argument("--hex", action="store_true", help="print the encoded data groups instead of a container")
    _add_adm_flags(p)

    p = sub.add_parser("simulate", help="pass a container through a lossy channel")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path)
    p.add_argument("--loss", type=float, default=0.0)
    p.add_argument("--ber", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("validate-ncl", help="check NCL documents against the Digital Radio profile")
    p.add_argument("documents", type=Path, nargs="+")
    p.add_argument("--format", choices=("text", "lines"), default="text")
    return parser


def cmd_pack(args) -> int:
    opts = PackOptions(profile=args.profile, extra_entry_points=tuple(args.entry_for),
                       repetitions=args.repetitions, segment_size=args.segment_size,
                       packet_length=args.packet_length, sub_stream_id=args.sub_stream,
                       super_frame_packets=args.super_frame_packets, interleave=args.interleave,
                       compress=args.compress, compress_directory=args.compress_directory,
                       standalone=args.standalone, include_hidden=not args.exclude_hidden,
                       timebase=_plan(args), adm=tuple(args.edit + args.sign))
    c = run_pack(args.app_dir, args.entry, opts)
    data = c.to_bytes()
    args.output.write_bytes(data)
    print(f"{args.output}: {len(c.records)} packets, {c.super_frames} super frames, {len(data)} bytes")
    return EXIT_OK


def cmd_unpack(args) -> int:
    r = run_unpack(args.container, args.output_dir, profile=args.profile)
    for name in sorted(r.files):
        print(f"file {name} ({len(r.files[name])} bytes)")
    for profile, ep in sorted(r.entry_points.entry_points.items()):
        print(f"entry point profile {profile}: {ep} ({ep.kind.value})")
    for profile in r.entry_points.unknown_profiles:
        print(f"note: unknown receiver profile {profile}")
    if r.directory_ready and r.selected_entry_point is None:
        print(f"warning: no entry point for profile {args.profile}")
    for name in r.missing:
        print(f"missing {name}")
    print("diagnostics " + json.dumps(r.diagnostics, sort_keys=True))
    if args.trace:
        args.trace.write_text(json.dumps([e.to_dict() for e in r.trace], indent=1))
    if r.directory_ready and r.missing:
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_inspect(args) -> int:
    print(json.dumps(inspect_container(args.container), indent=1, sort_keys=True))
    return EXIT_OK


def cmd_adm(args) -> int:
    adms = args.edit + args.sign
    if args.hex:
        for a in sorted(adms, key=lambda a: a.super_frame):
            print(encode_data_group(encode_adm(a.message)).hex())
        return EXIT_OK
    if args.output is None:
        print("adm: an output path is required unless --hex is given", file=sys.stderr)
        return EXIT_ERROR
    c = adm_container(adms, args.super_frames, _plan(args), args.packet_length, args.super_frame_packets)
    args.output.write_bytes(c.to_bytes())
    print(f"{args.output}: {len(c.records)} packets, {c.super_frames} super frames")
    return EXIT_OK


def cmd_simulate(args) -> int:
    c = Container.from_bytes(args.input.read_bytes())
    out = simulate_channel(c, ChannelParams(args.loss, args.ber, args.seed))
    args.output.write_bytes(out.to_bytes())
    print(f"{args.output}: {len(out.records)} of {len(c.records)} packets survived")
    return EXIT_OK


def cmd_validate(args) -> int:
    worst = EXIT_OK
    for path in args.documents:
        try:
            violations = validate_ncl(path.read_bytes())
        except MalformedDocument as exc:
            violations = [malformed_violation(exc)]
        if violations:
            worst = EXIT_FINDINGS
        if args.format == "lines":
            for v in violations:
                print(f"{path}\t{v.to_line()}")
        else:
            print(format_report(violations, str(path)))
    return worst


COMMANDS = {
    "pack": cmd_pack,
    "unpack": cmd_unpack,
    "inspect": cmd_inspect,
    "adm": cmd_adm,
    "simulate": cmd_simulate,
    "validate-ncl": cmd_validate,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (GdrmError, OSError, ValueError) as exc:
        print(f"gdrm {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
