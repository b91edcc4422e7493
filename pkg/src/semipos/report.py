"""Check records and the versioned JSON report."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

SCHEMA_VERSION = 1


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [jsonable(float(x.real)), jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    return x


@dataclass
class Check:
    name: str
    passed: bool
    value: object
    expected: str
    slack: float | None = None  # distance inside the bound; negative when failing
    criterion: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def as_dict(self):
        return {
            "name": self.name,
            "status": self.status,
            "value": jsonable(self.value),
            "expected": self.expected,
            "slack": jsonable(self.slack),
            "criterion": self.criterion,
        }

    def line(self) -> str:
        v = self.value
        if isinstance(v, float):
            v = f"{v:.6g}"
        return f"{self.status.upper():4}  {self.name}: {v} (expected {self.expected})"


def check_le(name, value, bound, **kw) -> Check:
    value = float(value)
    return Check(name, bool(value <= bound), value, f"<= {bound:g}", bound - value, **kw)


def check_ge(name, value, bound, **kw) -> Check:
    value = float(value)
    return Check(name, bool(value >= bound), value, f">= {bound:g}", value - bound, **kw)


def check_in(name, value, lo, hi, **kw) -> Check:
    value = float(value)
    return Check(name, bool(lo <= value <= hi), value, f"in [{lo:g}, {hi:g}]",
                 min(value - lo, hi - value), **kw)


def check_eq(name, value, expected, **kw) -> Check:
    """Exact equality (for rational class numbers)."""
    return Check(name, value == expected, value, f"== {expected}", None, **kw)


def check_true(name, ok, value, expected, **kw) -> Check:
    return Check(name, bool(ok), value, expected, None, **kw)


@dataclass
class Report:
    command: list
    seed: int
    tolerances: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    runtime: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def sorted_checks(self):
        return sorted(self.checks, key=lambda c: c.name)

    def as_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "command": list(self.command),
            "seed": self.seed,
            "tolerances": jsonable(self.tolerances),
            "checks": [c.as_dict() for c in self.sorted_checks()],
            "passed": self.passed,
            "extra": jsonable(self.extra),
            "runtime": jsonable(self.runtime),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")
