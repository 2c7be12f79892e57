from __future__ import annotations

from dataclasses import dataclass, field

from src.droidchain.errors import InvalidSignature


@dataclass(frozen=True, order=True)
class MethodSig:
    """Fully qualified ``pkg.segments.Class.method`` identifier.

    A trailing parameter list (``m(java.lang.String)``) stays part of the method
    name; dots inside it are not treated as segment separators.
    """

    raw: str
    segments: tuple[str, ...] = field(compare=False, repr=False)
    class_fqn: str = field(compare=False, repr=False)

    @classmethod
    def parse(cls, raw: str) -> "MethodSig":
        text = (raw or "").strip()
        if not text:
            raise InvalidSignature("empty signature")
        head = text.split("(", 1)[0]
        segments = tuple(head.split("."))
        if len(segments) < 2 or any(not part for part in segments):
            raise InvalidSignature(f"signature needs class and method segments: {text!r}")
        class_fqn = ".".join(segments[:-1])
        return cls(raw=text, segments=segments, class_fqn=class_fqn)

    @property
    def method(self) -> str:
        return self.raw[len(self.class_fqn) + 1:]

    def __str__(self) -> str:
        return self.raw


def belongs_to(class_fqn: str, package: str) -> bool:
    """True when ``class_fqn`` lives in ``package`` or one of its sub-packages."""
    return bool(package) and class_fqn.startswith(package + ".")
