"""Exception hierarchy shared by every layer of the chain."""


class GdrmError(Exception):
    """Base class for all errors raised by this package."""


# --- MSC data group / packet framing -------------------------------------

class FramingError(GdrmError):
    pass


class CrcMismatch(FramingError):
    pass


class Truncated(FramingError):
    pass


class UnsupportedHeaderConfig(FramingError):
    pass


class PayloadTooLarge(FramingError, ValueError):
    pass


class InvalidDataGroup(FramingError, ValueError):
    pass


# --- MOT ------------------------------------------------------------------

class MotError(GdrmError):
    pass


class DataTooLong(MotError, ValueError):
    pass


class MissingDirectoryIndex(MotError):
    pass


class InvalidContentName(MotError, ValueError):
    pass


class DuplicateDirectoryIndex(MotError, ValueError):
    pass


class GzipError(MotError):
    pass


class UnknownGroupType(MotError):
    pass


class DirectoryDecodeError(MotError):
    pass


# --- ADM ------------------------------------------------------------------

class AdmError(GdrmError):
    pass


class AdmTooLarge(AdmError, ValueError):
    pass


class AdmDecodeError(AdmError):
    pass


class LibrasVideoForbidden(AdmError):
    """SignLanguage message uses content type 0x01 (video), not allowed over DRM."""


class BadTbvLiteral(AdmError, ValueError):
    pass


class TbvOutOfRange(BadTbvLiteral):
    pass


# --- signaling ------------------------------------------------------------

class NotAGingaService(GdrmError, ValueError):
    pass


# --- application ingest ---------------------------------------------------

class EntryPointError(GdrmError, ValueError):
    pass


class AbsolutePath(EntryPointError):
    pass


class BadExtension(EntryPointError):
    pass


class PortOnHtml(EntryPointError):
    pass


class MultipleHashes(EntryPointError):
    pass


class EmptyPort(EntryPointError):
    pass


class IngestError(GdrmError):
    pass


class ReservedCharacterInName(IngestError):
    pass


class NonUtf8Name(IngestError):
    pass


class EmptyApplication(IngestError):
    pass


class SymlinkRejected(IngestError):
    pass


# --- NCL validator --------------------------------------------------------

class MalformedDocument(GdrmError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(message)
        self.line = line
        self.column = column


# --- container / pipelines ------------------------------------------------

class ContainerError(GdrmError):
    pass


class BadMagic(ContainerError):
    pass


class UnsupportedVersion(ContainerError):
    pass


class ContainerTruncated(ContainerError, Truncated):
    pass


class EntryPointNotInTree(GdrmError):
    pass
