"""Report records emitted by checkers and oracle suites."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np


def jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "to_dict"):
        return value.to_dict()
    return value


@dataclass
class CheckReport:
    """
    Outcome of one sampling certificate or oracle check.

    margin is signed so that positive means "holds with room to spare";
    passed is None when the check was skipped.
    """
    check: str
    passed: Optional[bool]
    margin: float = 0.0
    seed: Optional[int] = None
    witness: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def skipped(self) -> bool:
        return self.passed is None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "check": self.check,
            "pass": self.passed,
            "margin": float(self.margin),
            "seed": self.seed,
        }
        if self.witness is not None:
            data["witness"] = jsonable(self.witness)
        if self.details:
            data["details"] = jsonable(self.details)
        return data


@dataclass
class SuiteReport:
    """A named collection of checks; passes iff every non-skipped check passes."""
    suite: str
    checks: List[CheckReport] = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.skipped)

    def add(self, report: CheckReport) -> CheckReport:
        self.checks.append(report)
        return report

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "pass": self.passed,
            "seed": self.seed,
            "checks": [c.to_dict() for c in self.checks],
        }
