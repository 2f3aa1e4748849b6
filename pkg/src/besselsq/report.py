"""Report records emitted by every check."""
from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np


def _plain(v: Any) -> Any:
    """JSON-safe copy: numpy scalars and arrays to Python, complex to [re, im]."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


@dataclass
class Report:
    suite: str
    case: str
    inputs: dict
    values: dict
    value: float
    tolerance: float
    passed: bool
    runtime: float = 0.0
    seed: int | None = None
    stable: bool | None = None

    def __post_init__(self):
        self.inputs = _plain(self.inputs)
        self.values = _plain(self.values)
        self.value = float(self.value)
        self.tolerance = float(self.tolerance)
        self.passed = bool(self.passed)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@contextmanager
def timed(out: dict):
    t0 = time.perf_counter()
    try:
        yield out
    finally:
        out["runtime"] = time.perf_counter() - t0


def deviation_report(suite: str, case: str, inputs: dict, dev: float, tol: float,
                     values: dict | None = None, runtime: float = 0.0, seed: int | None = None,
                     stable: bool | None = None) -> Report:
    """Report passing when ``dev <= tol``."""
    vals = {"deviation": dev, **(values or {})}
    return Report(suite, case, inputs, vals, dev, tol, bool(np.isfinite(dev) and dev <= tol),
                  runtime, seed, stable)
