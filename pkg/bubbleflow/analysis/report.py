"""Named checks and scan tables collected into a JSON verification report."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Literal

from rich.console import Console
from rich.table import Table

from bubbleflow.hemisphere.basis import BasisTable
from bubbleflow.utils.atomic_write import atomic_write, atomic_write_json
from bubbleflow.utils.output import format_float

#: "abs": |value - target| <= tolerance; "rel": the same relative to |target|;
#: "max"/"min": value <= / >= target; "flag": value is 1.0 for a passing boolean
CheckKind = Literal["abs", "rel", "max", "min", "flag"]

#: exact: follows from symmetry or flatness; derived: an independent numerical oracle;
#: asymptotic: a small-lambda statement verified through its scaling
Anchor = Literal["exact", "derived", "asymptotic"]


@dataclass
class Check:
    name: str
    value: float
    target: float
    tolerance: float
    anchor: Anchor
    kind: CheckKind = "abs"
    detail: str = ""
    passed: bool = field(init=False)

    def __post_init__(self):
        self.value = float(self.value)
        self.target = float(self.target)
        self.passed = self._evaluate()

    def _evaluate(self) -> bool:
        if not math.isfinite(self.value):
            return False
        match self.kind:
            case "abs":
                return abs(self.value - self.target) <= self.tolerance
            case "rel":
                scale = abs(self.target) if self.target != 0.0 else 1.0
                return abs(self.value - self.target) <= self.tolerance * scale
            case "max":
                return self.value <= self.target + self.tolerance
            case "min":
                return self.value >= self.target - self.tolerance
            case "flag":
                return self.value == 1.0
        raise ValueError(f"Unknown check kind: {self.kind}")

    @classmethod
    def flag(cls, name: str, ok: bool, anchor: Anchor, detail: str = "") -> Check:
        return cls(name, 1.0 if ok else 0.0, 1.0, 0.0, anchor, kind="flag", detail=detail)

    @classmethod
    def at_most(cls, name: str, value: float, bound: float, anchor: Anchor, detail: str = "") -> Check:
        return cls(name, value, bound, 0.0, anchor, kind="max", detail=detail)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class ScanTable:
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def add(self, *values: float) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append([float(v) for v in values])

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows([[format_float(v) for v in row] for row in self.rows])
        return buffer.getvalue()


@dataclass
class VerificationReport:
    config_hash: str = ""
    resolution: dict[str, int] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, ScanTable] = field(default_factory=dict)
    #: measured quantities that no single check judges (bounds, fitted rates, extrapolations)
    values: dict[str, float] = field(default_factory=dict)
    #: suites that ran, in order
    suites: list[str] = field(default_factory=list)

    @classmethod
    def for_basis(cls, basis: BasisTable, config_hash: str = "") -> VerificationReport:
        resolution = {
            "l_max": basis.l_max,
            "n_theta": basis.grid.n_theta,
            "n_phi": basis.grid.n_phi,
            "trace_order": basis.trace_order,
        }
        return cls(config_hash=config_hash, resolution=resolution)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def table(self, name: str, columns: list[str]) -> ScanTable:
        self.tables[name] = ScanTable(columns=list(columns))
        return self.tables[name]

    def merge(self, other: VerificationReport) -> None:
        self.checks.extend(other.checks)
        self.tables.update(other.tables)
        self.values.update(other.values)
        self.suites.extend(s for s in other.suites if s not in self.suites)

    def __getitem__(self, name: str) -> Check:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [check for check in self.checks if not check.passed]

    def to_dict(self) -> dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "resolution": self.resolution,
            "suites": self.suites,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
            "values": self.values,
            "tables": {name: {"columns": t.columns, "rows": t.rows} for name, t in self.tables.items()},
        }

    def write(self, path: Path) -> None:
        """Write the JSON record to `path` and every scan table as CSV next to it."""
        path = Path(path)
        atomic_write_json(path, self.to_dict())
        for name, table in self.tables.items():
            atomic_write(path.parent / "tables" / f"{name}.csv", table.to_csv())

    def render(self, console: Console | None = None) -> None:
        console = console or Console()
        table = Table(title=f"Verification ({sum(c.passed for c in self.checks)}/{len(self.checks)} passed)")
        for column in ("check", "value", "target", "tol", "anchor", ""):
            table.add_column(column)
        for check in self.checks:
            status = "[green]pass[/green]" if check.passed else "[red]FAIL[/red]"
            table.add_row(
                check.name,
                f"{check.value:.6g}",
                f"{check.target:.6g}",
                f"{check.tolerance:.1e} ({check.kind})",
                check.anchor,
                status,
            )
        console.print(table)
