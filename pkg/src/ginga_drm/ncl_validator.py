"""
Static checker for the Digital Radio NCL 3.1 profile.

Reports constructs the profile removes from the EDTV profile and checks
``tbv`` time literals on ``<area>``. Checking is syntactic: element and
attribute names, settings-media property names and URI schemes.

Rule catalog
------------
malformed-document         input is not well-formed XML
transition-removed         <transition> or <transitionBase> element
transition-reference       transition referenced through <property>,
                           <descriptorParam> or a descriptor attribute
area-attribute-removed     clip or coords on <area>
property-removed           <property name="plane">
settings-variable-removed  screenVideoSize, screenBackgroundSize,
                           screenGraphicSize, screenGraphicSize(i)
metadata-variable-removed  any metadata.* variable of the settings media
scheme-unsupported         dsm-cc: or ts: URI
bad-tbv-literal            <area> time value that is neither a valid
                           tbv literal nor an NCL clock value
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Dict, List, Tuple
from xml.parsers import expat

from .errors import BadTbvLiteral, MalformedDocument
from .timebase import parse_tbv_literal

SETTINGS_MEDIA_TYPE = "application/x-ncl-settings"

SI_VARIABLES_DR = ("stationLabel", "numberOfServices", "channelFrequency", "signalQuality", "serviceDecoding")

RULES: Dict[str, str] = {
    "malformed-document": "document is not well-formed XML",
    "transition-removed": "Transition and TransitionBase modules are not part of the DR profile",
    "transition-reference": "transitions cannot be referenced in the DR profile",
    "area-attribute-removed": "clip and coords are not defined on <area> in the DR profile",
    "property-removed": "property is not defined in the DR profile",
    "settings-variable-removed": "system variable is not defined in the DR profile",
    "metadata-variable-removed": "metadata variables are not defined in the DR profile",
    "scheme-unsupported": "dsm-cc: and ts: URIs are not supported in the DR profile",
    "bad-tbv-literal": "time value is neither a valid tbv literal nor an NCL time value",
}

_TRANSITION_PROPERTIES = ("transIn", "transOut")
_REMOVED_SCREEN = re.compile(r"(?:system\.)?(?:screenVideoSize|screenBackgroundSize|screenGraphicSize(?:\(\d+\))?)")
_UNSUPPORTED_SCHEME = re.compile(r"\s*(dsm-cc|ts):", re.IGNORECASE)
_AREA_TIME_ATTRS = ("begin", "end", "first", "last")
_NCL_TIME = re.compile(
    r"\d+(?:\.\d+)?(?:s|npt)?"      # seconds, normal play time, plain number
    r"|\d+f"                         # frames / samples
    r"|\d+:\d+(?::\d+)?(?:\.\d+)?"   # clock value
)


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True, order=True)
class Violation:
    line: int
    column: int
    rule_id: str
    message: str
    severity: Severity = Severity.ERROR

    @property
    def location(self) -> Tuple[int, int]:
        return self.line, self.column

    def to_line(self) -> str:
        """Machine-readable form: rule_id, line, column, message, tab separated."""
        return f"{self.rule_id}\t{self.line}\t{self.column}\t{self.message}"


def _local(name: str) -> str:
    return name.rsplit(":", 1)[-1]


class _Checker:
    def __init__(self):
        self.found: List[Violation] = []
        self.stack: List[Tuple[str, Dict[str, str]]] = []
        self.parser = expat.ParserCreate()
        self.parser.StartElementHandler = self.start
        self.parser.EndElementHandler = self.end

    def report(self, rule: str, detail: str) -> None:
        line = self.parser.CurrentLineNumber
        col = self.parser.CurrentColumnNumber + 1
        self.found.append(Violation(line, col, rule, f"{RULES[rule]}: {detail}"))

    def in_settings_media(self) -> bool:
        for tag, attrs in reversed(self.stack):
            if tag == "media":
                return attrs.get("type", "").strip() == SETTINGS_MEDIA_TYPE
        return False

    def start(self, name: str, attrs: Dict[str, str]) -> None:
        tag = _local(name)
        self.stack.append((tag, attrs))

        if tag in ("transition", "transitionBase"):
            self.report("transition-removed", f"<{tag}>")

        if tag == "area":
            for a in ("clip", "coords"):
                if a in attrs:
                    self.report("area-attribute-removed", f'{a}="{attrs[a]}"')
            for a in _AREA_TIME_ATTRS:
                if a in attrs:
                    self.check_time(a, attrs[a])

        if tag == "descriptor":
            for a in _TRANSITION_PROPERTIES:
                if a in attrs:
                    self.report("transition-reference", f'descriptor attribute {a}="{attrs[a]}"')

        if tag == "descriptorParam" and attrs.get("name") in _TRANSITION_PROPERTIES:
            self.report("transition-reference", f'<descriptorParam name="{attrs["name"]}">')

        if tag == "property":
            self.check_property(attrs.get("name", ""))

        for a, v in attrs.items():
            m = _UNSUPPORTED_SCHEME.match(v)
            if m:
                self.report("scheme-unsupported", f'{a}="{v}"')

    def end(self, name: str) -> None:
        self.stack.pop()

    def check_property(self, pname: str) -> None:
        if pname in _TRANSITION_PROPERTIES:
            self.report("transition-reference", f'<property name="{pname}">')
        elif pname == "plane":
            self.report("property-removed", f'<property name="{pname}">')
        elif self.in_settings_media():
            if _REMOVED_SCREEN.fullmatch(pname):
                self.report("settings-variable-removed", pname)
            elif pname.startswith("metadata."):
                self.report("metadata-variable-removed", pname)

    def check_time(self, attr: str, value: str) -> None:
        v = value.strip()
        if v.endswith("tbv"):
            try:
                parse_tbv_literal(v)
            except BadTbvLiteral as exc:
                self.report("bad-tbv-literal", f"{attr}: {exc}")
            return
        if not _NCL_TIME.fullmatch(v):
            self.report("bad-tbv-literal", f'{attr}="{value}"')


def validate_ncl(document) -> List[Violation]:
    """Check an NCL document (text or bytes) against the DR profile.

    Raises MalformedDocument when the input is not well-formed XML.
    """
    checker = _Checker()
    data = document.encode("utf-8") if isinstance(document, str) else bytes(document)
    try:
        checker.parser.Parse(data, True)
    except expat.ExpatError as exc:
        raise MalformedDocument(f"{RULES['malformed-document']}: {expat.errors.messages.get(exc.code, exc)}",
                                exc.lineno, exc.offset + 1) from exc
    return sorted(checker.found)


def malformed_violation(exc: MalformedDocument) -> Violation:
    return Violation(exc.line, exc.column, "malformed-document", str(exc))


def format_report(violations: List[Violation], source: str = "<document>") -> str:
    """Human-readable report."""
    if not violations:
        return f"{source}: conforms to the DR profile"
    lines = [f"{source}:{v.line}:{v.column}: {v.severity.value}: [{v.rule_id}] {v.message}" for v in violations]
    lines.append(f"{len(violations)} violation(s)")
    return "\n".join(lines)
