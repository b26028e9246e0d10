"""Structured results for hypothesis, conclusion and property checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SCALING_NOTE = (
    "dilation g_t = e^{2t} g scales Schouten eigenvalues by e^{-2t} "
    "(checked against geodesic spheres: k = coth t <=> lambda = e^{-2t}/2); "
    "e^{-t} is not used anywhere in the numerics"
)


class NumericalError(RuntimeError):
    """A computation produced non-finite or degenerate data."""


def _clean(value: Any) -> Any:
    """Convert numpy scalars/arrays into JSON-friendly python values."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isnan(v) or math.isinf(v):
            return repr(v)
        return v
    return value


@dataclass
class Witness:
    """Location of the worst offending sample."""

    index: tuple[int, ...] | None = None
    coords: tuple[float, ...] | None = None
    where: str | None = None  # "interior", "boundary", component name, ...
    detail: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return _clean(
            {
                "index": list(self.index) if self.index is not None else None,
                "coords": list(self.coords) if self.coords is not None else None,
                "where": self.where,
                "detail": self.detail,
            }
        )


@dataclass
class CheckReport:
    name: str
    passed: bool
    metrics: dict[str, Any] = field(default_factory=dict)
    witness: Witness | None = None
    provenance: dict[str, Any] = field(default_factory=dict)
    subchecks: list["CheckReport"] = field(default_factory=list)
    wall_time: float = 0.0

    def __post_init__(self) -> None:
        self.passed = bool(self.passed)

    def __bool__(self) -> bool:
        return self.passed

    def sub(self, name: str) -> "CheckReport":
        for s in self.subchecks:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self, timing: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "name": self.name,
            "passed": self.passed,
            "metrics": _clean(self.metrics),
            "witness": self.witness.to_dict() if self.witness else None,
            "provenance": _clean(self.provenance),
        }
        if self.subchecks:
            out["subchecks"] = [s.to_dict(timing) for s in self.subchecks]
        if timing:
            out["wall_time"] = round(float(self.wall_time), 6)
        return out


def combine(name: str, parts: list[CheckReport], **provenance: Any) -> CheckReport:
    """Aggregate sub-reports; the first failing part supplies the witness."""
    failed = [p for p in parts if not p.passed]
    return CheckReport(
        name=name,
        passed=not failed,
        metrics={"failed_gates": [p.name for p in failed]},
        witness=failed[0].witness if failed else None,
        provenance=dict(provenance),
        subchecks=list(parts),
        wall_time=sum(p.wall_time for p in parts),
    )
