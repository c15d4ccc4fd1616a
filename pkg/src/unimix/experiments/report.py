"""Deterministic JSON and CSV serialization of experiment reports."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .. import __version__
from ..toy_m import MACHINE_SPEC_VERSION
from .config import ExperimentConfig

SCHEMA = "unimix-report/1"


def _plain(v):
    # JSON-safe and stable: exact rationals as strings, non-finite floats as strings
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    if hasattr(v, "item"):  # numpy scalar
        return _plain(v.item())
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return str(v)


@dataclass
class ExperimentReport:
    experiment: str
    columns: tuple
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "experiment": self.experiment,
            "provenance": _plain(self.provenance),
            "summary": _plain(self.summary),
            "flags": _plain(self.flags),
            "passed": self.passed,
            "columns": list(self.columns),
            "records": [[_plain(r.get(c)) for c in self.columns] for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        head = {k: v for k, v in self.to_dict().items() if k not in ("records", "columns")}
        for key in ("schema", "experiment", "provenance", "summary", "flags", "passed"):
            buf.write(f"# {key}: {json.dumps(head[key], sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.records:
            w.writerow([_cell(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item"):
        return _cell(v.item())
    return str(v)


def provenance(config: ExperimentConfig) -> dict:
    return {
        "config_hash": config.config_hash,
        "config": config.canonical(),
        "machine_spec_version": MACHINE_SPEC_VERSION,
        "package_version": __version__,
        "schema": SCHEMA,
        "seed": config.seed,
    }
