"""Structured, JSON-serializable verification reports.

A report is a list of named checks, each carrying the number of samples it
ran over, the worst residual observed, and the threshold it was held to.
Reports serialize complex numbers as two-element ``[re, im]`` arrays and sort
all object keys, so identical runs produce byte-identical JSON except for the
wall-time field.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__

__all__ = ["SCHEMA_VERSION", "CheckRecord", "Report", "jsonable", "complex_pairs"]

SCHEMA_VERSION = 1


def jsonable(value: Any) -> Any:
    """Recursively convert numbers/arrays to JSON-safe structures; complex
    numbers become ``[re, im]`` pairs."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        return float(value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()] if value.ndim else jsonable(value.item())
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if value is None or isinstance(value, str):
        return value
    return str(value)


def complex_pairs(matrix: np.ndarray) -> list:
    """An array of complex numbers as nested lists of [re, im] pairs."""
    return jsonable(np.asarray(matrix, dtype=complex))


@dataclass(frozen=True)
class CheckRecord:
    """One verified predicate: worst residual over ``samples``, held to
    ``threshold``; ``passed`` is always ``max_residual <= threshold``."""

    name: str
    samples: int
    max_residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.threshold)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": int(self.samples),
            "max_residual": jsonable(self.max_residual),
            "threshold": jsonable(self.threshold),
            "passed": self.passed,
        }


@dataclass
class Report:
    """A command run: configuration echo, check records, extra payload."""

    command: str
    config: dict
    seed: int
    checks: list[CheckRecord] = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> CheckRecord | None:
        for c in self.checks:
            if not c.passed:
                return c
        return None

    def to_dict(self, *, include_wall_time: bool = True) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "config": jsonable(self.config),
            "seed": int(self.seed),
            "version": __version__,
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        }
        out.update(jsonable(self.extra))
        if include_wall_time:
            out["wall_time_s"] = float(self.wall_time_s)
        return out

    def to_json(self, *, include_wall_time: bool = True) -> str:
        return json.dumps(self.to_dict(include_wall_time=include_wall_time),
                          sort_keys=True, indent=2)

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status}  {c.name}: max residual {c.max_residual:.3e} "
                         f"<= {c.threshold:.1e} over {c.samples} samples")
        lines.append(f"{'PASS' if self.passed else 'FAIL'}  {self.command}: "
                     f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks")
        return lines
