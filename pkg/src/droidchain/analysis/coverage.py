from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from src.droidchain.abstraction.packages import PackageList
from src.droidchain.errors import NoCandidate
from src.droidchain.ingest.signatures import MethodSig, belongs_to

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoverageReport:
    app_id: str
    app_package: str
    triggered: int
    total_static: int
    percent: Optional[float]

    @property
    def empty_static(self) -> bool:
        """EmptyStaticSet flag: nothing in the static set starts with the app package."""
        return self.total_static == 0


def _packages(app_package: str | Sequence[str]) -> tuple[str, ...]:
    if isinstance(app_package, str):
        return (app_package,)
    return tuple(app_package)


def _in_app(sig: MethodSig, packages: Sequence[str]) -> bool:
    return any(belongs_to(sig.class_fqn, pkg) for pkg in packages)


def code_coverage(
    app_package: str | Sequence[str],
    dynamic_methods: Iterable[MethodSig],
    static_methods: Iterable[MethodSig],
    app_id: str = "",
) -> CoverageReport:
    """Share of the app's own static methods that show up in its traces.

    Distinct signatures are counted, not invocations.
    """
    packages = _packages(app_package)
    own_static = {sig for sig in static_methods if _in_app(sig, packages)}
    own_dynamic = {sig for sig in dynamic_methods if _in_app(sig, packages)}
    triggered = len(own_static & own_dynamic)
    total = len(own_static)
    percent = 100.0 * triggered / total if total else None
    if percent is None:
        LOG.debug("Empty static set app_id=%s packages=%s", app_id, packages)
    return CoverageReport(
        app_id=app_id,
        app_package=";".join(packages),
        triggered=triggered,
        total_static=total,
        percent=percent,
    )


def infer_app_packages(
    static_methods: Iterable[MethodSig],
    declared_package: str,
    component_classes: Iterable[str] = (),
    pkgs: Optional[PackageList] = None,
    dynamic_methods: Iterable[MethodSig] = (),
    app_id: str = "",
) -> list[str]:
    """Declared package if any method lives in it, else non-API packages of component classes."""
    declared = (declared_package or "").strip()
    if declared:
        for sig in [*static_methods, *dynamic_methods]:
            if belongs_to(sig.class_fqn, declared):
                return [declared]
    candidates: set[str] = set()
    for class_fqn in component_classes:
        class_fqn = class_fqn.strip()
        if "." not in class_fqn:
            continue
        package = class_fqn.rsplit(".", 1)[0]
        if pkgs is not None and pkgs.match(class_fqn) is not None:
            continue
        candidates.add(package)
    if not candidates:
        raise NoCandidate(app_id)
    LOG.debug("Package fallback app_id=%s declared=%s candidates=%s", app_id, declared, sorted(candidates))
    return sorted(candidates)


def dynamic_load_ratio(dynamic_methods: Iterable[MethodSig], static_methods: Iterable[MethodSig]) -> float:
    """Percent of traced methods absent from the static method set (0 for an empty trace)."""
    dynamic = set(dynamic_methods)
    if not dynamic:
        return 0.0
    static = set(static_methods)
    return 100.0 * len(dynamic - static) / len(dynamic)


def common_dynamic_only(per_app: Sequence[tuple[frozenset[MethodSig], frozenset[MethodSig]]]) -> float:
    """Percent of all dynamically loaded signatures that every app loads.

    ``per_app`` holds ``(dynamic_methods, static_methods)`` pairs.
    """
    loaded = [set(dynamic) - set(static) for dynamic, static in per_app]
    if not loaded:
        return 0.0
    union = set().union(*loaded)
    if not union:
        return 0.0
    common = set.intersection(*loaded)
    return 100.0 * len(common) / len(union)


def mean_and_pooled(reports: Iterable[CoverageReport]) -> tuple[Optional[float], Optional[float]]:
    """Per-app mean of percents and pooled triggered/total over flagged-free reports."""
    usable = [r for r in reports if not r.empty_static]
    if not usable:
        return None, None
    mean = sum(r.percent for r in usable) / len(usable)
    pooled = 100.0 * sum(r.triggered for r in usable) / sum(r.total_static for r in usable)
    return mean, pooled
