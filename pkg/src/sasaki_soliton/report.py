"""Residual bookkeeping and the serialisable verification report."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

SCHEMA_VERSION = 1


def max_abs(x) -> float:
    """Largest absolute component of an array (0 for empty arrays)."""
    x = np.asarray(x, dtype=float)
    return float(np.max(np.abs(x))) if x.size else 0.0


@dataclass
class Check:
    """Outcome of one named identity or property over a set of sample points.

    ``comparison`` is ``"below"`` for identities (pass iff the max residual is
    at most ``threshold``) and ``"above"`` for non-degeneracy or mutation checks
    (pass iff the smallest value exceeds ``threshold``).
    """

    name: str
    tag: str
    threshold: float
    passed: bool
    points: int
    max_residual: float | None = None
    mean_residual: float | None = None
    min_residual: float | None = None
    comparison: str = "below"
    applicable: bool = True
    note: str = ""

    @classmethod
    def from_values(
        cls,
        name: str,
        tag: str,
        values: Iterable[float],
        threshold: float,
        comparison: str = "below",
        note: str = "",
    ) -> "Check":
        vals = np.asarray(list(values), dtype=float)
        if vals.size == 0:
            return cls.not_applicable(name, tag, threshold, "no sample points")
        mx, mn, mean = float(vals.max()), float(vals.min()), float(vals.mean())
        if not np.all(np.isfinite(vals)):
            ok = False
        elif comparison == "below":
            ok = mx <= threshold
        elif comparison == "above":
            ok = mn > threshold
        else:
            raise ValueError(f"unknown comparison {comparison!r}")
        return cls(
            name=name,
            tag=tag,
            threshold=threshold,
            passed=bool(ok),
            points=int(vals.size),
            max_residual=mx,
            mean_residual=mean,
            min_residual=mn,
            comparison=comparison,
            note=note,
        )

    @classmethod
    def not_applicable(cls, name: str, tag: str, threshold: float, note: str) -> "Check":
        return cls(
            name=name,
            tag=tag,
            threshold=threshold,
            passed=False,
            points=0,
            applicable=False,
            note=note,
        )

    @property
    def statistic(self) -> float | None:
        return self.min_residual if self.comparison == "above" else self.max_residual


@dataclass
class Fitted:
    value: float
    spread: float


class Residuals:
    """Collects per-point residuals for several named checks, in insertion order."""

    def __init__(self):
        self._data: dict[str, tuple[str, list[float]]] = {}

    def add(self, name: str, tag: str, residual) -> None:
        entry = self._data.setdefault(name, (tag, []))
        entry[1].append(max_abs(residual))

    def values(self, name: str) -> list[float]:
        return self._data[name][1]

    def checks(self, tol: float, overrides: dict[str, float] | None = None) -> list[Check]:
        overrides = overrides or {}
        return [
            Check.from_values(name, tag, vals, overrides.get(name, tol))
            for name, (tag, vals) in self._data.items()
        ]


def fit_constant(values: Iterable[float]) -> Fitted:
    """Mean of per-point estimates and their max deviation from it."""
    vals = np.asarray(list(values), dtype=float)
    mean = float(vals.mean())
    return Fitted(mean, float(np.max(np.abs(vals - mean))))


@dataclass
class VerificationReport:
    suite: str
    model: str
    checks: list[Check] = field(default_factory=list)
    fitted: dict[str, Fitted] = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    runtime: float | None = None
    classification: str | None = None

    @property
    def passed(self) -> bool:
        applicable = [c for c in self.checks if c.applicable]
        return bool(applicable) and all(c.passed for c in applicable)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(**{**asdict(c), "name": prefix + c.name}))
        for k, v in other.fitted.items():
            self.fitted.setdefault(prefix + k, v)
        self.notes.extend(other.notes)

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "model": self.model,
            "passed": self.passed,
            "classification": self.classification,
            "checks": [asdict(c) for c in self.checks],
            "fitted": {k: asdict(v) for k, v in self.fitted.items()},
            "config": self.config,
            "notes": list(self.notes),
        }
        if include_runtime:
            out["runtime"] = self.runtime
        return out

    def to_json(self, include_runtime: bool = False) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {data.get('schema_version')!r}")
        return cls(
            suite=data["suite"],
            model=data["model"],
            checks=[Check(**c) for c in data["checks"]],
            fitted={k: Fitted(**v) for k, v in data["fitted"].items()},
            config=data["config"],
            notes=list(data["notes"]),
            runtime=data.get("runtime"),
            classification=data.get("classification"),
        )

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    def text(self) -> str:
        lines = [f"suite {self.suite} on {self.model}: {'PASS' if self.passed else 'FAIL'}"]
        if self.classification:
            lines.append(f"  classification: {self.classification}")
        for k, v in self.fitted.items():
            lines.append(f"  {k} = {v.value:.12g} (spread {v.spread:.3g})")
        for c in self.checks:
            if not c.applicable:
                lines.append(f"  [n/a ] {c.name} [{c.tag}]: {c.note}")
                continue
            op = "<=" if c.comparison == "below" else ">"
            flag = "ok  " if c.passed else "FAIL"
            lines.append(
                f"  [{flag}] {c.name} [{c.tag}]: {c.statistic:.3e} {op} {c.threshold:.1e}"
                f" over {c.points} pts"
            )
        for note in self.notes:
            lines.append(f"  note: {note}")
        if self.runtime is not None:
            lines.append(f"  runtime: {self.runtime:.2f}s")
        return "\n".join(lines)
