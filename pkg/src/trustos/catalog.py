"""Normalized control catalog: framework requirements, canonical controls,
and the many-to-many mappings between them.

The shipped catalog is a representative requirement subset; the JSON file
format is the extension point for fuller regulatory corpora. Every coverage
output embeds the catalog_version it was computed against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .model import FrameworkId, ProviderKind


@dataclass(frozen=True)
class FrameworkRequirement:
    requirement_id: str
    framework: FrameworkId
    clause: str
    title: str


@dataclass(frozen=True)
class Control:
    control_id: str
    name: str
    integration: ProviderKind
    risk_weight: float
    framework_tag: str    # display string, e.g. "SOC2 CC6.7 · EU AI Act Art.10"
    primary_clause: str   # CSV export CONTROL cell
    pass_claim: str       # evidence-string claim when the control passes

    def __post_init__(self):
        if self.risk_weight <= 0:
            raise ValueError("risk_weight must be positive")


@dataclass(frozen=True)
class ControlMapping:
    mapping_id: str
    control_id: str
    requirement_id: str


class Catalog:
    def __init__(self, doc: dict):
        self.catalog_version: str = doc["catalog_version"]
        self.requirements: dict[str, FrameworkRequirement] = {}
        for r in doc["requirements"]:
            req = FrameworkRequirement(r["requirement_id"],
                                       FrameworkId(r["framework"]),
                                       r["clause"], r["title"])
            if (req.framework, req.clause) in {(x.framework, x.clause)
                                               for x in self.requirements.values()}:
                raise ValueError(f"duplicate clause {req.framework}/{req.clause}")
            self.requirements[req.requirement_id] = req
        self.controls: dict[str, Control] = {}
        for c in doc["controls"]:
            ctl = Control(c["control_id"], c["name"],
                          ProviderKind(c["integration"]), c["risk_weight"],
                          c["framework_tag"], c["primary_clause"],
                          c["pass_claim"])
            self.controls[ctl.control_id] = ctl
        self.mappings: list[ControlMapping] = []
        for m in doc["mappings"]:
            mapping = ControlMapping(m["mapping_id"], m["control_id"],
                                     m["requirement_id"])
            if mapping.control_id not in self.controls:
                raise ValueError(f"mapping {mapping.mapping_id}: dangling control")
            if mapping.requirement_id not in self.requirements:
                raise ValueError(f"mapping {mapping.mapping_id}: dangling requirement")
            self.mappings.append(mapping)

    def control_for_integration(self, provider_kind: ProviderKind) -> Control:
        for ctl in self.controls.values():
            if ctl.integration is provider_kind:
                return ctl
        raise KeyError(provider_kind)

    def mappings_for_control(self, control_id: str) -> list[ControlMapping]:
        return [m for m in self.mappings if m.control_id == control_id]

    def requirements_for_control(self, control_id: str) -> list[FrameworkRequirement]:
        return [self.requirements[m.requirement_id]
                for m in self.mappings_for_control(control_id)]

    def framework_refs_for_control(self, control_id: str) -> tuple:
        """(framework value, clause) pairs a control maps to."""
        return tuple((r.framework.value, r.clause)
                     for r in self.requirements_for_control(control_id))

    def clauses(self, framework: FrameworkId) -> list[FrameworkRequirement]:
        return [r for r in self.requirements.values() if r.framework is framework]


def load_catalog(path: Optional[str] = None) -> Catalog:
    if path is not None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    else:
        doc = json.loads(resources.files("trustos.data")
                         .joinpath("framework_catalog.json")
                         .read_text(encoding="utf-8"))
    return Catalog(doc)
