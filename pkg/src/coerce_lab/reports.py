"""Report containers and their JSON / CSV serialization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["InequalityReport", "SCHEMA", "jsonable", "dumps"]

SCHEMA = "coerce-lab/report-v1"


def jsonable(obj):
    """Recursively convert to JSON-safe values; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj):
    return json.dumps(jsonable(obj), sort_keys=True, indent=2)


@dataclass
class InequalityReport:
    """Empirical constant of one inequality over a test bank.

    ``constant`` is the max (``kind == "sup"``) or min (``kind == "inf"``)
    of ``ratios`` and ``witness`` names the member that attains it.
    ``checks`` holds the named pass/fail conditions; ``passed`` is their
    conjunction.
    """

    inequality: str
    params: dict
    constant: float
    kind: str
    witness: str | None
    ratios: dict
    skipped: list = field(default_factory=list)
    refinement_delta: float | None = None
    paper_bound: float | None = None
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(bool(v) for v in self.checks.values())

    @classmethod
    def from_ratios(cls, inequality, params, ratios, kind="sup", **kw):
        if not ratios:
            constant, witness = math.nan, None
        else:
            pick = max if kind == "sup" else min
            witness = pick(ratios, key=lambda n: ratios[n])
            constant = float(ratios[witness])
        return cls(inequality, params, constant, kind, witness, dict(ratios), **kw)

    def recomputed_constant(self):
        vals = list(self.ratios.values())
        if not vals:
            return math.nan
        return float(max(vals) if self.kind == "sup" else min(vals))

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "inequality": self.inequality,
            "params": self.params,
            "constant": self.constant,
            "kind": self.kind,
            "witness": self.witness,
            "ratios": self.ratios,
            "skipped": self.skipped,
            "refinement_delta": self.refinement_delta,
            "paper_bound": self.paper_bound,
            "checks": self.checks,
            "passed": self.passed,
            "details": self.details,
            "grid": self.grid,
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["member", "ratio"])
            for name, r in self.ratios.items():
                w.writerow([name, repr(float(r))])
        return path
