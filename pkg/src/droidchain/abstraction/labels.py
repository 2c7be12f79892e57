from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class AbstractionMode(str, Enum):
    FAMILY = "family"
    PACKAGE = "package"

    @classmethod
    def parse(cls, raw: "str | AbstractionMode") -> "AbstractionMode":
        if isinstance(raw, AbstractionMode):
            return raw
        return cls(str(raw).strip().lower())


class LabelKind(str, Enum):
    FAMILY = "family"
    PACKAGE = "package"
    OBFUSCATED = "obfuscated"
    SELF_DEFINED = "self-defined"


@dataclass(frozen=True, order=True)
class Label:
    """An abstracted state of the behavioral model."""

    name: str
    kind: LabelKind

    def __str__(self) -> str:
        return self.name


# Fixed family order; also the Family-mode state order before the catch-alls.
FAMILY_NAMES = ("google", "java", "javax", "android", "xml", "apache", "junit", "json", "dom")

# (prefix, family) pairs; matched on whole dot segments.
FAMILY_PREFIXES = (
    ("com.google", "google"),
    ("java", "java"),
    ("javax", "javax"),
    ("android", "android"),
    ("org.xml", "xml"),
    ("org.apache", "apache"),
    ("junit", "junit"),
    ("org.json", "json"),
    ("org.w3c.dom", "dom"),
)

OBFUSCATED = Label("obfuscated", LabelKind.OBFUSCATED)
SELF_DEFINED = Label("self-defined", LabelKind.SELF_DEFINED)
FAMILY_LABELS = tuple(Label(name, LabelKind.FAMILY) for name in FAMILY_NAMES)


def has_prefix(name: str, prefix: str) -> bool:
    return name == prefix or name.startswith(prefix + ".")


def family_of(package: str) -> Label | None:
    for prefix, family in FAMILY_PREFIXES:
        if has_prefix(package, prefix):
            return Label(family, LabelKind.FAMILY)
    return None


__all__ = [
    "AbstractionMode",
    "FAMILY_LABELS",
    "FAMILY_NAMES",
    "FAMILY_PREFIXES",
    "Label",
    "LabelKind",
    "OBFUSCATED",
    "SELF_DEFINED",
    "family_of",
    "has_prefix",
]
