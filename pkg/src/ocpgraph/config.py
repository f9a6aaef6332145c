"""Build configuration shared by the transforms and the command line."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .model import WeightPolicy

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"
FOAF_NAME = "http://xmlns.com/foaf/0.1/name"

DANGLING_POLICIES = ("fail", "skip")
DEDUP_MODES = ("edges", "types")


@dataclass(frozen=True)
class BuildConfig:
    original_weight: float = 1.0
    opposite_weight: float = 2.0
    # candidate property names for object names, highest priority first
    name_attributes: tuple[str, ...] = ("name", "title", "label", "caption")
    synthesize_names: bool = False
    dangling: str = "fail"
    pcdata_attribute: str = "text"
    overrides: str | None = None
    drop_container_root: bool = True
    type_predicates: tuple[str, ...] = (RDF_TYPE,)
    name_predicates: tuple[str, ...] = (RDFS_LABEL, FOAF_NAME)
    dedup: str = "types"
    inverse: Mapping[str, str] = field(default_factory=dict)
    budget: int = 1_000_000

    def __post_init__(self) -> None:
        for name in ("name_attributes", "type_predicates", "name_predicates"):
            value = getattr(self, name)
            if isinstance(value, str):
                value = (value,)
            object.__setattr__(self, name, tuple(value))
        if self.dangling not in DANGLING_POLICIES:
            raise ValueError(f"dangling policy must be one of {DANGLING_POLICIES}, got {self.dangling!r}")
        if self.dedup not in DEDUP_MODES:
            raise ValueError(f"dedup mode must be one of {DEDUP_MODES}, got {self.dedup!r}")
        if not self.pcdata_attribute:
            raise ValueError("pcdata attribute name must be nonempty")
        if self.budget <= 0:
            raise ValueError("search budget must be positive")
        self.weight_policy()  # raises on bad weights

    @property
    def skip_dangling(self) -> bool:
        return self.dangling == "skip"

    def weight_policy(self) -> WeightPolicy:
        return WeightPolicy(self.original_weight, self.opposite_weight)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> BuildConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown configuration key(s): {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> BuildConfig:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: configuration must be a JSON object")
        return cls.from_mapping(data)

    def with_updates(self, **changes: Any) -> BuildConfig:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})
