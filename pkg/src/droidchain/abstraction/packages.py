from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from src.droidchain.abstraction.labels import family_of
from src.droidchain.config import BUNDLED_PACKAGE_LIST
from src.droidchain.errors import InvalidSpec
from src.droidchain.ingest.files import iter_content_lines, read_text

LOG = logging.getLogger(__name__)


def _segment_count(entry: str) -> int:
    return entry.count(".") + 1


@dataclass(frozen=True)
class PackageList:
    """Whitelisted API package prefixes, longest (most segments) first.

    ``api_classes``, when set, restricts API matches to those exact class FQNs.
    """

    entries: tuple[str, ...]
    api_classes: Optional[frozenset[str]] = None
    obfuscation_max_median: float = 2.0
    _lookup: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        cleaned = [entry.strip() for entry in self.entries]
        if any(not entry for entry in cleaned):
            raise InvalidSpec("package list contains an empty entry")
        if len(set(cleaned)) != len(cleaned):
            raise InvalidSpec("package list contains duplicate entries")
        ordered = tuple(sorted(cleaned, key=lambda e: (-_segment_count(e), e)))
        object.__setattr__(self, "entries", ordered)
        object.__setattr__(self, "_lookup", frozenset(ordered))

    @classmethod
    def from_entries(cls, entries: Iterable[str], **kwargs) -> "PackageList":
        return cls(entries=tuple(entries), **kwargs)

    def __len__(self) -> int:
        return len(self.entries)

    def match(self, class_fqn: str) -> Optional[str]:
        """Longest whitelisted prefix of ``class_fqn`` on segment boundaries."""
        if self.api_classes is not None and class_fqn not in self.api_classes:
            return None
        parts = class_fqn.split(".")
        for n in range(len(parts), 0, -1):
            candidate = ".".join(parts[:n])
            if candidate in self._lookup:
                return candidate
        return None

    def lexicographic(self) -> list[str]:
        return sorted(self.entries)


def load_package_list(
    path: Path | str | None = None,
    *,
    class_whitelist: Path | str | None = None,
    obfuscation_max_median: float = 2.0,
) -> PackageList:
    source = Path(path) if path else BUNDLED_PACKAGE_LIST
    entries: list[str] = []
    seen: set[str] = set()
    for _, raw in iter_content_lines(read_text(source)):
        line = raw.strip()
        if line in seen:
            LOG.debug("Duplicate package entry skipped entry=%s", line)
            continue
        seen.add(line)
        entries.append(line)
    unmapped = [entry for entry in entries if family_of(entry) is None]
    if unmapped:
        LOG.warning("Package entries outside every family count as non-API in family mode: %s", unmapped)
    api_classes = None
    if class_whitelist:
        api_classes = frozenset(line.strip() for _, line in iter_content_lines(read_text(class_whitelist)))
    LOG.debug("Package list loaded path=%s entries=%s", source, len(entries))
    return PackageList.from_entries(
        entries,
        api_classes=api_classes,
        obfuscation_max_median=obfuscation_max_median,
    )
