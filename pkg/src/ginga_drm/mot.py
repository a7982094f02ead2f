"""
MOT Directory Mode: header parameters, directory object, carousel builder and
receiver-side object assembly.

Directory object layout (all big-endian, MSB first)::

    CompressionFlag(1) Rfu(1) DirectorySize(30)
    NumberOfObjects(16)
    DataCarouselPeriod(24)
    Rfu(3) SegmentSize(13)
    DirectoryExtensionLength(16)
    DirectoryExtension (header parameters)
    NumberOfObjects x {
        TransportId(16)
        BodySize(28) HeaderSize(13) ContentType(6) ContentSubType(9)
        HeaderExtension (HeaderSize - 7 bytes of header parameters)
    }

Header parameter: PLI(2) ParamId(6), then 0, 1 or 4 data bytes for PLI
00/01/10, or for PLI 11 a 1-byte length (Ext=0, 7-bit length) followed by
the data.
"""

from __future__ import annotations

import gzip
import struct
import zlib
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .datagroup import (
    ADM_TYPES,
    MAX_DATA_FIELD,
    MOT_BODY,
    MOT_DIRECTORY,
    MOT_DIRECTORY_COMPRESSED,
    MOT_HEADER,
    DataGroup,
    SessionHeader,
)
from .errors import (
    DataTooLong,
    DirectoryDecodeError,
    DuplicateDirectoryIndex,
    GzipError,
    InvalidContentName,
    MissingDirectoryIndex,
    UnknownGroupType,
)

# Header extension parameters (per object)
PERMIT_OUTDATED_VERSIONS = 0x01
EXPIRATION = 0x04
TRIGGER_TIME = 0x05
CONTENT_NAME = 0x0C
COMPRESSION_TYPE = 0x11

# Directory extension parameters
SORTED_HEADER_INFORMATION = 0x00
DEFAULT_PERMIT_OUTDATED_VERSIONS = 0x01
DEFAULT_EXPIRATION = 0x09
DIRECTORY_INDEX = 0x22

COMPRESSION_GZIP = 0x01
CHARSET_ISO_10646 = 0xF0  # high nibble 1111b, low nibble reserved

CONTENT_TYPE_RECOMMENDED = 0
CONTENT_SUB_TYPE_RECOMMENDED = 0

MAX_VARIABLE_DATA = 127
HEADER_CORE_SIZE = 7
DIRECTORY_HEADER_SIZE = 13


@dataclass(frozen=True)
class HeaderParameter:
    param_id: int
    data: bytes = b""

    def __post_init__(self):
        if not 0 <= self.param_id <= 0x3F:
            raise ValueError(f"param_id {self.param_id} does not fit in 6 bits")
        object.__setattr__(self, "data", bytes(self.data))


def encode_parameter(p: HeaderParameter) -> bytes:
    n = len(p.data)
    if n == 0:
        return bytes((p.param_id,))
    if n == 1:
        return bytes((0x40 | p.param_id,)) + p.data
    if n == 4:
        return bytes((0x80 | p.param_id,)) + p.data
    if n > MAX_VARIABLE_DATA:
        raise DataTooLong(f"parameter 0x{p.param_id:02X} data of {n} bytes exceeds {MAX_VARIABLE_DATA}")
    return bytes((0xC0 | p.param_id, n)) + p.data


def decode_parameter(buf: bytes, offset: int = 0) -> Tuple[HeaderParameter, int]:
    """Decode one parameter at ``offset``; return it and the offset after it."""
    if offset >= len(buf):
        raise DirectoryDecodeError("parameter truncated")
    head = buf[offset]
    pli, pid = head >> 6, head & 0x3F
    pos = offset + 1
    if pli == 3:
        if pos >= len(buf):
            raise DirectoryDecodeError("parameter length truncated")
        if buf[pos] & 0x80:
            if pos + 1 >= len(buf):
                raise DirectoryDecodeError("parameter length truncated")
            n = ((buf[pos] & 0x7F) << 8) | buf[pos + 1]
            pos += 2
        else:
            n = buf[pos]
            pos += 1
    else:
        n = (0, 1, 4)[pli]
    if pos + n > len(buf):
        raise DirectoryDecodeError(f"parameter 0x{pid:02X} data truncated")
    return HeaderParameter(pid, buf[pos:pos + n]), pos + n


def encode_parameters(params: Iterable[HeaderParameter]) -> bytes:
    return b"".join(encode_parameter(p) for p in params)


def decode_parameters(buf: bytes) -> List[HeaderParameter]:
    out, pos = [], 0
    while pos < len(buf):
        p, pos = decode_parameter(buf, pos)
        out.append(p)
    return out


def validate_content_name(name: str) -> None:
    if not name:
        raise InvalidContentName("empty content name")
    if name.startswith("/"):
        raise InvalidContentName(f"{name!r} is not a relative path")
    if "#" in name:
        raise InvalidContentName(f"{name!r} contains the reserved character '#'")
    if "\\" in name or "\x00" in name:
        raise InvalidContentName(f"{name!r} contains a forbidden character")
    for part in name.split("/"):
        if part in ("", ".", ".."):
            raise InvalidContentName(f"{name!r} has an empty, '.' or '..' path component")
    try:
        name.encode("utf-8")
    except UnicodeEncodeError as exc:
        raise InvalidContentName(f"{name!r} is not valid UTF-8") from exc


def content_name_parameter(name: str) -> HeaderParameter:
    validate_content_name(name)
    return HeaderParameter(CONTENT_NAME, bytes((CHARSET_ISO_10646,)) + name.encode("utf-8"))


def parse_content_name(p: HeaderParameter) -> str:
    if not p.data or p.data[0] >> 4 != 0xF:
        raise DirectoryDecodeError("ContentName does not use the ISO/IEC 10646 character set")
    try:
        return p.data[1:].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DirectoryDecodeError("ContentName is not valid UTF-8") from exc


@dataclass(frozen=True)
class MotObject:
    """A file carried by the carousel. ``body`` is always the plain file
    content; ``compressed`` selects GZip on the air."""

    transport_id: int
    content_name: str
    body: bytes
    compressed: bool = False
    content_type: int = CONTENT_TYPE_RECOMMENDED
    content_sub_type: int = CONTENT_SUB_TYPE_RECOMMENDED
    extra_params: Tuple[HeaderParameter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "extra_params", tuple(self.extra_params))


@dataclass(frozen=True)
class DirectoryEntry:
    transport_id: int
    body_size: int
    params: Tuple[HeaderParameter, ...]
    content_type: int = CONTENT_TYPE_RECOMMENDED
    content_sub_type: int = CONTENT_SUB_TYPE_RECOMMENDED

    def param(self, param_id: int) -> Optional[HeaderParameter]:
        for p in self.params:
            if p.param_id == param_id:
                return p
        return None

    @property
    def content_name(self) -> str:
        p = self.param(CONTENT_NAME)
        if p is None:
            raise DirectoryDecodeError(f"object {self.transport_id} has no ContentName")
        return parse_content_name(p)

    @property
    def compressed(self) -> bool:
        p = self.param(COMPRESSION_TYPE)
        return p is not None and p.data == bytes((COMPRESSION_GZIP,))

    @property
    def extra_params(self) -> Tuple[HeaderParameter, ...]:
        return tuple(p for p in self.params if p.param_id not in (CONTENT_NAME, COMPRESSION_TYPE))


@dataclass(frozen=True)
class MotDirectory:
    entries: Tuple[DirectoryEntry, ...]
    extensions: Tuple[HeaderParameter, ...]
    segment_size: int = 0
    carousel_period: int = 0

    def directory_indices(self) -> List[bytes]:
        return [p.data for p in self.extensions if p.param_id == DIRECTORY_INDEX]

    def entry(self, transport_id: int) -> Optional[DirectoryEntry]:
        for e in self.entries:
            if e.transport_id == transport_id:
                return e
        return None


def check_directory_extensions(extensions: Sequence[HeaderParameter]) -> None:
    profiles = [p.data[0] for p in extensions if p.param_id == DIRECTORY_INDEX and p.data]
    if not profiles:
        raise MissingDirectoryIndex("directory extension has no DirectoryIndex parameter")
    if len(profiles) != len(set(profiles)):
        raise DuplicateDirectoryIndex("more than one DirectoryIndex for the same profile_id")


def encode_directory(d: MotDirectory) -> bytes:
    ext = encode_parameters(d.extensions)
    if len(ext) > 0xFFFF:
        raise DataTooLong("directory extension too long")
    body = bytearray()
    for e in d.entries:
        hext = encode_parameters(e.params)
        header_size = HEADER_CORE_SIZE + len(hext)
        if header_size >= 1 << 13:
            raise DataTooLong(f"header of object {e.transport_id} too long")
        if e.body_size >= 1 << 28:
            raise DataTooLong(f"body of object {e.transport_id} too large")
        core = (e.body_size << 28) | (header_size << 15) | ((e.content_type & 0x3F) << 9) | (e.content_sub_type & 0x1FF)
        body += struct.pack(">H", e.transport_id) + core.to_bytes(7, "big") + hext
    size = DIRECTORY_HEADER_SIZE + len(ext) + len(body)
    if size >= 1 << 30:
        raise DataTooLong("directory too large")
    head = struct.pack(">IH", size, len(d.entries))
    head += (d.carousel_period & 0xFFFFFF).to_bytes(3, "big")
    head += struct.pack(">HH", d.segment_size & 0x1FFF, len(ext))
    return head + ext + bytes(body)


def decode_directory(buf: bytes) -> MotDirectory:
    if len(buf) < DIRECTORY_HEADER_SIZE:
        raise DirectoryDecodeError("directory header truncated")
    word, count = struct.unpack_from(">IH", buf, 0)
    if word >> 31:
        raise DirectoryDecodeError("in-band directory compression is not supported")
    size = word & 0x3FFFFFFF
    if size != len(buf):
        raise DirectoryDecodeError(f"DirectorySize {size} does not match {len(buf)} received bytes")
    period = int.from_bytes(buf[6:9], "big")
    seg, ext_len = struct.unpack_from(">HH", buf, 9)
    pos = DIRECTORY_HEADER_SIZE
    if pos + ext_len > len(buf):
        raise DirectoryDecodeError("directory extension truncated")
    extensions = tuple(decode_parameters(buf[pos:pos + ext_len]))
    pos += ext_len
    entries = []
    for _ in range(count):
        if pos + 2 + HEADER_CORE_SIZE > len(buf):
            raise DirectoryDecodeError("directory entry truncated")
        tid = struct.unpack_from(">H", buf, pos)[0]
        core = int.from_bytes(buf[pos + 2:pos + 9], "big")
        body_size = core >> 28
        header_size = (core >> 15) & 0x1FFF
        ctype = (core >> 9) & 0x3F
        csub = core & 0x1FF
        if header_size < HEADER_CORE_SIZE:
            raise DirectoryDecodeError(f"HeaderSize {header_size} below the header core size")
        hext_start = pos + 2 + HEADER_CORE_SIZE
        hext_end = pos + 2 + header_size
        if hext_end > len(buf):
            raise DirectoryDecodeError("header extension truncated")
        params = tuple(decode_parameters(buf[hext_start:hext_end]))
        entries.append(DirectoryEntry(tid, body_size, params, ctype, csub))
        pos = hext_end
    if pos != len(buf):
        raise DirectoryDecodeError("trailing bytes after the last directory entry")
    return MotDirectory(tuple(entries), extensions, seg & 0x1FFF, period)


def gzip_bytes(data: bytes) -> bytes:
    return gzip.compress(data, compresslevel=9, mtime=0)


def gunzip_bytes(data: bytes) -> bytes:
    try:
        return gzip.decompress(data)
    except (OSError, EOFError, zlib.error) as exc:
        raise GzipError(str(exc)) from exc


@dataclass(frozen=True)
class CarouselOptions:
    segment_size: int = MAX_DATA_FIELD
    interleave: bool = False
    compress_directory: bool = False
    directory_transport_id: int = 0

    def __post_init__(self):
        if not 1 <= self.segment_size <= MAX_DATA_FIELD:
            raise ValueError(f"segment_size must be in 1..{MAX_DATA_FIELD}")
        if not 0 <= self.directory_transport_id <= 0xFFFF:
            raise ValueError("directory_transport_id out of 16-bit range")


def _segments(data: bytes, size: int) -> List[bytes]:
    if not data:
        return [b""]
    return [data[i:i + size] for i in range(0, len(data), size)]


def build_directory(files: Sequence[MotObject], dir_ext: Sequence[HeaderParameter],
                    opts: CarouselOptions) -> Tuple[MotDirectory, Dict[int, bytes]]:
    """Return the directory and the on-air body of every object."""
    if not files:
        raise ValueError("carousel needs at least one file")
    check_directory_extensions(dir_ext)
    seen = {opts.directory_transport_id}
    entries, bodies = [], {}
    for f in files:
        if f.transport_id in seen:
            raise ValueError(f"transport_id {f.transport_id} is not unique in the carousel")
        seen.add(f.transport_id)
        params = [content_name_parameter(f.content_name)]
        body = f.body
        if f.compressed:
            body = gzip_bytes(body)
            params.append(HeaderParameter(COMPRESSION_TYPE, bytes((COMPRESSION_GZIP,))))
        params.extend(p for p in f.extra_params if p.param_id not in (CONTENT_NAME, COMPRESSION_TYPE))
        entries.append(DirectoryEntry(f.transport_id, len(body), tuple(params),
                                      CONTENT_TYPE_RECOMMENDED, CONTENT_SUB_TYPE_RECOMMENDED))
        bodies[f.transport_id] = body
    return MotDirectory(tuple(entries), tuple(dir_ext), opts.segment_size), bodies


def build_carousel(files: Sequence[MotObject], dir_ext: Sequence[HeaderParameter],
                   opts: CarouselOptions = CarouselOptions()) -> List[DataGroup]:
    """One carousel cycle: the directory object, then every body object."""
    directory, bodies = build_directory(files, dir_ext, opts)
    continuity: Dict[int, int] = {}

    def groups_for(group_type: int, tid: int, data: bytes) -> List[DataGroup]:
        segs = _segments(data, opts.segment_size)
        if len(segs) > 0x8000:
            raise DataTooLong(f"object {tid} needs more than 32768 segments")
        out = []
        for i, seg in enumerate(segs):
            ci = continuity.get(group_type, 0)
            continuity[group_type] = (ci + 1) & 0xF
            out.append(DataGroup(group_type, seg, ci, 0,
                                 SessionHeader(i == len(segs) - 1, i, tid)))
        return out

    dir_bytes = encode_directory(directory)
    if opts.compress_directory:
        cycle = groups_for(MOT_DIRECTORY_COMPRESSED, opts.directory_transport_id, gzip_bytes(dir_bytes))
    else:
        cycle = groups_for(MOT_DIRECTORY, opts.directory_transport_id, dir_bytes)

    per_object = [groups_for(MOT_BODY, f.transport_id, bodies[f.transport_id]) for f in files]
    if opts.interleave:
        depth = max(len(g) for g in per_object)
        for i in range(depth):
            cycle.extend(g[i] for g in per_object if i < len(g))
    else:
        for g in per_object:
            cycle.extend(g)
    return cycle


class _SegmentBuffer:
    def __init__(self):
        self.segments: Dict[int, bytes] = {}
        self.last: Optional[int] = None

    def add(self, session: SessionHeader, data: bytes) -> None:
        self.segments[session.segment_number] = data
        if session.last_segment:
            self.last = session.segment_number

    def complete(self) -> bool:
        return self.last is not None and all(i in self.segments for i in range(self.last + 1))

    def join(self) -> bytes:
        return b"".join(self.segments[i] for i in range(self.last + 1))


@dataclass
class ReceiverStats:
    groups: int = 0
    directories: int = 0
    directory_errors: int = 0
    gzip_errors: int = 0
    size_mismatches: int = 0
    evicted: int = 0
    ignored: int = 0


@dataclass
class MotReceiver:
    """Receiver-side assembly of a Directory Mode carousel.

    Body segments are buffered per TransportId until both the directory and
    every segment are present. ContentType/ContentSubType are never used for
    dispatch. A directory with different content replaces the current one
    and evicts objects it no longer lists (or lists with a changed header).
    """

    directory: Optional[MotDirectory] = None
    completed: Dict[int, MotObject] = field(default_factory=dict)
    stats: ReceiverStats = field(default_factory=ReceiverStats)
    _directory_raw: Optional[bytes] = None
    _dir_buffers: Dict[Tuple[int, int], _SegmentBuffer] = field(default_factory=dict)
    _bodies: Dict[int, _SegmentBuffer] = field(default_factory=dict)

    @property
    def directory_ready(self) -> bool:
        return self.directory is not None

    def feed(self, g: DataGroup) -> Tuple[List[MotObject], bool]:
        """Feed one CRC-valid data group; return newly completed objects and
        whether a directory is installed."""
        self.stats.groups += 1
        t = g.group_type
        if t in ADM_TYPES or t == MOT_HEADER:
            return [], self.directory_ready
        if t not in (MOT_BODY, MOT_DIRECTORY, MOT_DIRECTORY_COMPRESSED):
            raise UnknownGroupType(f"data group type {t} is not handled by the MOT receiver")
        if g.session is None:
            self.stats.ignored += 1
            return [], self.directory_ready

        s = g.session
        if t == MOT_BODY:
            if s.transport_id in self.completed:
                return [], self.directory_ready
            self._bodies.setdefault(s.transport_id, _SegmentBuffer()).add(s, g.payload)
            done = self._try_complete(s.transport_id)
            return ([done] if done else []), self.directory_ready

        key = (t, s.transport_id)
        buf = self._dir_buffers.setdefault(key, _SegmentBuffer())
        buf.add(s, g.payload)
        if not buf.complete():
            return [], self.directory_ready
        raw = buf.join()
        del self._dir_buffers[key]
        try:
            if t == MOT_DIRECTORY_COMPRESSED:
                raw = gunzip_bytes(raw)
            directory = decode_directory(raw)
        except (GzipError, DirectoryDecodeError):
            self.stats.directory_errors += 1
            return [], self.directory_ready
        if raw == self._directory_raw:
            return [], True
        self._install(directory, raw)
        done = [obj for obj in (self._try_complete(tid) for tid in list(self._bodies)) if obj]
        return done, True

    def _install(self, directory: MotDirectory, raw: bytes) -> None:
        self.stats.directories += 1
        old = self.directory
        self.directory = directory
        self._directory_raw = raw
        if old is None:
            return
        for tid in list(self.completed) + list(self._bodies):
            before, after = old.entry(tid), directory.entry(tid)
            if after is None or before != after:
                if self.completed.pop(tid, None) is not None:
                    self.stats.evicted += 1
                self._bodies.pop(tid, None)

    def _try_complete(self, tid: int) -> Optional[MotObject]:
        if self.directory is None:
            return None
        entry = self.directory.entry(tid)
        buf = self._bodies.get(tid)
        if entry is None or buf is None or not buf.complete():
            return None
        body = buf.join()
        del self._bodies[tid]
        if len(body) != entry.body_size:
            self.stats.size_mismatches += 1
            return None
        if entry.compressed:
            try:
                body = gunzip_bytes(body)
            except GzipError:
                self.stats.gzip_errors += 1
                return None
        try:
            name = entry.content_name
            validate_content_name(name)
        except (DirectoryDecodeError, InvalidContentName):
            self.stats.directory_errors += 1
            return None
        obj = MotObject(tid, name, body, entry.compressed,
                        entry.content_type, entry.content_sub_type, entry.extra_params)
        self.completed[tid] = obj
        return obj

    def files(self) -> Dict[str, bytes]:
        return {o.content_name: o.body for o in self.completed.values()}

    def missing(self) -> List[str]:
        """Content names listed in the directory but not yet assembled."""
        if self.directory is None:
            return []
        out = []
        for e in self.directory.entries:
            if e.transport_id not in self.completed:
                try:
                    out.append(e.content_name)
                except DirectoryDecodeError:
                    out.append(f"<transport {e.transport_id}>")
        return out
