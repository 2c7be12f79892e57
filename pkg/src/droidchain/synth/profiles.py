from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from src.droidchain.config import env_seed
from src.droidchain.errors import IOFailure, InvalidSpec
from src.droidchain.ingest.manifest import SampleLabel

# Chain state tokens with special meaning; any other token is used verbatim as a package.
APP_STATE = "@app"
OBFUSCATED_STATE = "@obf"


@dataclass(frozen=True)
class ProfileSpec:
    label: SampleLabel
    generator_chain: Mapping[str, Mapping[str, float]]
    n_methods: int = 24
    walk_length: int = 120
    dynamic_subset_fraction: float = 0.5
    noise: float = 0.0
    dynamic_only_fraction: float = 0.0
    declared_mismatch_fraction: float = 0.0
    start_state: Optional[str] = None
    max_runs: int = 3

    def __post_init__(self) -> None:
        self.validate()

    @property
    def states(self) -> list[str]:
        return list(self.generator_chain)

    @property
    def start(self) -> str:
        return self.start_state or self.states[0]

    def validate(self) -> None:
        chain = self.generator_chain
        if not chain:
            raise InvalidSpec("generator_chain has no states")
        for src, row in chain.items():
            if not row:
                raise InvalidSpec(f"state {src!r} has no outgoing transitions")
            unknown = [dst for dst in row if dst not in chain]
            if unknown:
                raise InvalidSpec(f"state {src!r} points at undeclared states {unknown}")
            if any(p < 0 for p in row.values()):
                raise InvalidSpec(f"state {src!r} has negative probabilities")
            if not math.isclose(sum(row.values()), 1.0, abs_tol=1e-6):
                raise InvalidSpec(f"row {src!r} sums to {sum(row.values())}, expected 1")
        if self.start not in chain:
            raise InvalidSpec(f"start_state {self.start!r} is not a chain state")
        if self.n_methods < len(chain):
            raise InvalidSpec(f"n_methods={self.n_methods} is below the {len(chain)} chain states")
        if self.walk_length < 1:
            raise InvalidSpec("walk_length must be positive")
        if not 0.0 < self.dynamic_subset_fraction <= 1.0:
            raise InvalidSpec(f"dynamic_subset_fraction={self.dynamic_subset_fraction} outside (0, 1]")
        if not 0.0 <= self.noise < 1.0:
            raise InvalidSpec(f"noise={self.noise} outside [0, 1)")
        if not 0.0 <= self.dynamic_only_fraction <= 1.0:
            raise InvalidSpec(f"dynamic_only_fraction={self.dynamic_only_fraction} outside [0, 1]")
        if not 0.0 <= self.declared_mismatch_fraction <= 1.0:
            raise InvalidSpec("declared_mismatch_fraction outside [0, 1]")
        if self.max_runs < 1:
            raise InvalidSpec("max_runs must be positive")

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label.value,
            "generator_chain": {src: dict(row) for src, row in self.generator_chain.items()},
            "n_methods": self.n_methods,
            "walk_length": self.walk_length,
            "dynamic_subset_fraction": self.dynamic_subset_fraction,
            "noise": self.noise,
            "dynamic_only_fraction": self.dynamic_only_fraction,
            "declared_mismatch_fraction": self.declared_mismatch_fraction,
            "start_state": self.start_state,
            "max_runs": self.max_runs,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ProfileSpec":
        try:
            payload = dict(raw)
            payload["label"] = SampleLabel(str(payload["label"]).lower())
            payload["generator_chain"] = {
                str(src): {str(dst): float(p) for dst, p in row.items()}
                for src, row in payload["generator_chain"].items()
            }
            return cls(**payload)
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InvalidSpec(f"invalid profile spec: {exc}") from exc

    def with_overrides(self, **changes: Any) -> "ProfileSpec":
        payload = self.to_dict()
        payload.update(changes)
        return ProfileSpec.from_dict(payload)


# Benign and malware chains whose family-level transitions are disjoint.
DEFAULT_BENIGN = ProfileSpec(
    label=SampleLabel.BENIGN,
    generator_chain={
        "android.widget": {"java.util": 0.6, "org.json": 0.4},
        "java.util": {"android.widget": 0.7, "org.json": 0.3},
        "org.json": {APP_STATE: 1.0},
        APP_STATE: {"android.widget": 1.0},
    },
    start_state="android.widget",
)

DEFAULT_MALWARE = ProfileSpec(
    label=SampleLabel.MALWARE,
    generator_chain={
        "javax.crypto": {OBFUSCATED_STATE: 1.0},
        OBFUSCATED_STATE: {"android.telephony": 1.0},
        "android.telephony": {"javax.crypto": 0.5, "org.apache.http": 0.5},
        "org.apache.http": {"android.telephony": 0.6, OBFUSCATED_STATE: 0.4},
    },
    start_state="javax.crypto",
)


@dataclass(frozen=True)
class CorpusSpec:
    n_benign: int = 20
    n_malware: int = 20
    seed: int = 42
    benign: ProfileSpec = field(default=DEFAULT_BENIGN)
    malware: ProfileSpec = field(default=DEFAULT_MALWARE)

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "CorpusSpec":
        try:
            return cls(
                n_benign=int(raw.get("n_benign", 20)),
                n_malware=int(raw.get("n_malware", 20)),
                seed=int(raw.get("seed", env_seed())),
                benign=ProfileSpec.from_dict(raw["benign"]) if "benign" in raw else DEFAULT_BENIGN,
                malware=ProfileSpec.from_dict(raw["malware"]) if "malware" in raw else DEFAULT_MALWARE,
            )
        except (TypeError, ValueError) as exc:
            raise InvalidSpec(f"invalid corpus spec: {exc}") from exc


def load_corpus_spec(path: Path | str) -> CorpusSpec:
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise IOFailure(f"spec file not found: {p}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"spec file is not valid JSON: {p}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidSpec(f"spec file must hold a JSON object: {p}")
    return CorpusSpec.from_dict(raw)
