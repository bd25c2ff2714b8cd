from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np

from bubbleflow.constants import TRAJECTORY_COLUMNS
from bubbleflow.exceptions import StepError
from bubbleflow.geometry.metric import PullbackMetric
from bubbleflow.hemisphere.basis import SpectralField, parity_split
from bubbleflow.surfaces.surface import ChartData


@dataclass(frozen=True)
class FlowState:
    """Graph function u over the barycenter chart at xi, in the rescaled clock t."""

    t: float
    u: SpectralField
    chart: ChartData
    lam: float
    step: int = 0

    @property
    def xi(self) -> np.ndarray:
        return self.chart.point

    @property
    def metric(self) -> PullbackMetric:
        return PullbackMetric(self.chart, self.lam)

    @property
    def t_physical(self) -> float:
        return self.lam**4 * self.t

    @property
    def t_fast(self) -> float:
        """Clock in which the barycenter follows (3/2) grad H^S."""
        return self.lam**3 * self.t

    def odd_norm(self) -> float:
        return parity_split(self.u)[1].sup_norm()

    def advanced(self, *, dt: float, u: SpectralField, chart: ChartData) -> FlowState:
        return replace(self, t=self.t + dt, u=u, chart=chart, step=self.step + 1)

    def describe(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "step": self.step,
            "lam": self.lam,
            "xi": self.xi.tolist(),
            "frame": self.chart.frame.matrix.T.tolist(),
            "l_max": self.u.basis.l_max,
            "trace_order": self.u.basis.trace_order,
        }


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    t_physical: float
    xi_x: float
    xi_y: float
    xi_z: float
    energy: float
    area: float
    u_norm: float
    u_odd_norm: float
    I1: float
    I2: float
    dissipation: float

    def row(self) -> list[float]:
        return [getattr(self, name) for name in TRAJECTORY_COLUMNS]


@dataclass
class Trajectory:
    """Time series of a flow run plus the states kept as snapshots."""

    lam: float
    records: list[TrajectoryRecord] = field(default_factory=list)
    snapshots: list[FlowState] = field(default_factory=list)
    # world components of the barycenter velocity, one per record
    velocities: list[np.ndarray] = field(default_factory=list)
    # energy of every state the integrator visited, recorded or not
    step_energies: list[float] = field(default_factory=list)
    stopped: str = "t_end"

    def append(self, record: TrajectoryRecord, velocity: np.ndarray) -> None:
        if self.records and record.t <= self.records[-1].t:
            raise StepError("trajectory time must increase", t=record.t, previous=self.records[-1].t)
        values = np.array(record.row(), dtype=float)
        if not np.all(np.isfinite(values)):
            raise StepError("non-finite trajectory record", record=asdict(record))
        self.records.append(record)
        self.velocities.append(np.asarray(velocity, dtype=float))

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    @property
    def positions(self) -> np.ndarray:
        return np.stack([self.column("xi_x"), self.column("xi_y"), self.column("xi_z")], axis=-1)

    @property
    def energies(self) -> np.ndarray:
        return self.column("energy")

    def max_energy_increase(self) -> float:
        """Largest increase of the energy between consecutive steps (recorded samples if steps were not kept)."""
        energies = np.asarray(self.step_energies) if len(self.step_energies) >= 2 else self.energies
        return float(np.max(np.diff(energies), initial=0.0))

    def rows(self) -> list[list[float]]:
        return [r.row() for r in self.records]
