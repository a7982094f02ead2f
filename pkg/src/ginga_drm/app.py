"""
Application trees, entry points and the DirectoryIndex parameter.

Entry point grammar::

    {application_filename}.ncl
    {application_filename}.html
    {application_filename}.ncl#{InterfaceId}
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import (
    AbsolutePath,
    BadExtension,
    EmptyApplication,
    EmptyPort,
    DataTooLong,
    EntryPointError,
    MultipleHashes,
    NonUtf8Name,
    PortOnHtml,
    ReservedCharacterInName,
    SymlinkRejected,
)
from .mot import (
    DIRECTORY_INDEX,
    MAX_VARIABLE_DATA,
    HeaderParameter,
    MotObject,
    gzip_bytes,
    validate_content_name,
)

GINGA_FULL_RECEIVER_PROFILE = 1

PROFILES: Dict[int, str] = {
    GINGA_FULL_RECEIVER_PROFILE: "Ginga Full Receiver Profile",
}


def profile_name(profile_id: int) -> Optional[str]:
    """Registered name of a receiver profile, None for unknown ids."""
    return PROFILES.get(profile_id)


class EntryKind(str, enum.Enum):
    NCL = "ncl"
    HTML = "html"


@dataclass(frozen=True)
class EntryPoint:
    file: str
    kind: EntryKind
    port: Optional[str] = None

    def __str__(self) -> str:
        return self.file if self.port is None else f"{self.file}#{self.port}"


def parse_entry_point(text: str) -> EntryPoint:
    if text.count("#") > 1:
        raise MultipleHashes(f"{text!r} has more than one '#'")
    file, sep, port = text.partition("#")
    if file.startswith("/"):
        raise AbsolutePath(f"{file!r} must be a relative path")
    stem, dot, ext = file.rpartition(".")
    if not dot or not stem or stem.endswith("/") or ext not in ("ncl", "html"):
        raise BadExtension(f"{file!r} must name a .ncl or .html file")
    kind = EntryKind(ext)
    if sep:
        if kind is EntryKind.HTML:
            raise PortOnHtml(f"{text!r}: an interface can only be given for NCL documents")
        if not port:
            raise EmptyPort(f"{text!r}: empty interface id after '#'")
        return EntryPoint(file, kind, port)
    return EntryPoint(file, kind)


def encode_directory_index(profile: int, entry: EntryPoint) -> bytes:
    if not 0 <= profile <= 0xFF:
        raise ValueError(f"profile_id {profile} does not fit in 8 bits")
    data = bytes((profile,)) + str(entry).encode("utf-8")
    if len(data) > MAX_VARIABLE_DATA:
        raise DataTooLong(f"DirectoryIndex of {len(data)} bytes exceeds {MAX_VARIABLE_DATA}")
    return data


def decode_directory_index(data: bytes) -> Tuple[int, EntryPoint]:
    if not data:
        raise EntryPointError("empty DirectoryIndex")
    try:
        text = data[1:].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EntryPointError("entry point is not valid UTF-8") from exc
    return data[0], parse_entry_point(text)


def directory_index_parameter(profile: int, entry: EntryPoint) -> HeaderParameter:
    return HeaderParameter(DIRECTORY_INDEX, encode_directory_index(profile, entry))


@dataclass(frozen=True)
class EntryPointReport:
    entry_points: Dict[int, EntryPoint]
    unknown_profiles: Tuple[int, ...]
    invalid: Tuple[str, ...]


def read_entry_points(indices: Iterable[bytes]) -> EntryPointReport:
    """Decode every DirectoryIndex; unknown profiles are kept and reported."""
    entries: Dict[int, EntryPoint] = {}
    unknown, invalid = [], []
    for data in indices:
        try:
            profile, ep = decode_directory_index(data)
        except EntryPointError as exc:
            invalid.append(str(exc))
            continue
        entries[profile] = ep
        if profile_name(profile) is None:
            unknown.append(profile)
    return EntryPointReport(entries, tuple(sorted(unknown)), tuple(invalid))


def select_entry_point(report: EntryPointReport, profile: int = GINGA_FULL_RECEIVER_PROFILE) -> Optional[EntryPoint]:
    return report.entry_points.get(profile)


@dataclass(frozen=True)
class ScanOptions:
    compress: bool = False
    include_hidden: bool = True
    first_transport_id: int = 1


def _content_name(rel: Path) -> str:
    parts = []
    for part in rel.parts:
        try:
            part.encode("utf-8")
        except UnicodeEncodeError as exc:
            raise NonUtf8Name(f"{os.fsencode(part)!r} is not a UTF-8 file name") from exc
        if "#" in part:
            raise ReservedCharacterInName(f"{part!r}: '#' is reserved")
        parts.append(part)
    return "/".join(parts)


def scan_application(root, opts: ScanOptions = ScanOptions()) -> List[MotObject]:
    """Turn a directory tree into MOT objects, ordered by content name."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"{root} is not a directory")
    found: List[Tuple[str, Path]] = []
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        base = Path(dirpath)
        for d in list(dirnames):
            if (base / d).is_symlink():
                raise SymlinkRejected(f"{base / d} is a symbolic link")
            if not opts.include_hidden and d.startswith("."):
                dirnames.remove(d)
        for fname in filenames:
            path = base / fname
            if not opts.include_hidden and fname.startswith("."):
                continue
            if path.is_symlink():
                raise SymlinkRejected(f"{path} is a symbolic link")
            if not path.is_file():
                continue
            name = _content_name(path.relative_to(root))
            validate_content_name(name)
            found.append((name, path))
    if not found:
        raise EmptyApplication(f"{root} contains no files")
    found.sort(key=lambda item: item[0])
    if opts.first_transport_id + len(found) > 0x10000:
        raise ValueError("too many files for 16-bit transport ids")

    objects = []
    for i, (name, path) in enumerate(found):
        body = path.read_bytes()
        compressed = opts.compress and len(gzip_bytes(body)) < len(body)
        objects.append(MotObject(opts.first_transport_id + i, name, body, compressed))
    return objects


def write_application(files: Mapping[str, bytes], dest) -> List[Path]:
    """Write a received file set below ``dest``; names are re-validated."""
    dest = Path(dest)
    written = []
    for name in sorted(files):
        validate_content_name(name)
        path = dest.joinpath(*name.split("/"))
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(files[name])
        written.append(path)
    return written


def read_tree(root) -> Dict[str, bytes]:
    """Map of relative '/'-joined path to bytes for every regular file."""
    root = Path(root)
    return {"/".join(p.relative_to(root).parts): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file() and not p.is_symlink()}


def entry_in_tree(entry: EntryPoint, names: Sequence[str]) -> bool:
    return entry.file in set(names)
