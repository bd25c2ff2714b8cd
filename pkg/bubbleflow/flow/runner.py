from __future__ import annotations

import logging
import time
from pathlib import Path

import numpy as np
from tqdm.auto import tqdm

from bubbleflow.config import RunConfig, SeedConfig, StartConfig, config_hash
from bubbleflow.constants import FILE_CONFIG, FILE_SUMMARY, FILE_TRAJECTORY
from bubbleflow.exceptions import StepError
from bubbleflow.flow.state import FlowState, Trajectory, TrajectoryRecord
from bubbleflow.flow.stepper import RhsData, admissible_initialize, dt_max, rhs, step
from bubbleflow.hemisphere.basis import BasisTable, SpectralField, build_basis
from bubbleflow.hemisphere.grid import HemisphereGrid
from bubbleflow.surfaces import get_surface
from bubbleflow.surfaces.surface import HostSurface
from bubbleflow.utils.atomic_write import atomic_write, atomic_write_json
from bubbleflow.utils.log import add_root_file_handler, cleanup_file_handlers, get_logger, remove_file_handler
from bubbleflow.utils.output import write_snapshot, write_trajectory_csv

# Per-step energy increase tolerated before a warning is logged
ENERGY_SLACK = 1e-8


def basis_for(config: RunConfig) -> BasisTable:
    res = config.resolution
    return build_basis(res.l_max, HemisphereGrid(res.n_theta, res.n_phi), res.trace_order)


def seed_field(basis: BasisTable, seed: SeedConfig) -> SpectralField:
    field = basis.zeros()
    for mode in seed.modes:
        field = field + basis.mode(mode.l, mode.m, mode.amplitude)
    return field


def starting_point(surface: HostSurface, start: StartConfig) -> np.ndarray:
    """Host point f[a, p0] in the chart at the (projected) anchor a."""
    anchor = surface.default_anchor() if start.anchor is None else surface.nearest_point(np.array(start.anchor))
    return surface.chart(anchor).position(np.array(start.p0, dtype=float))


def initial_state(config: RunConfig, basis: BasisTable | None = None) -> FlowState:
    basis = basis or basis_for(config)
    surface = get_surface(config.surface)
    return admissible_initialize(
        surface, starting_point(surface, config.start), config.lam, seed_field(basis, config.seed), config.solver
    )


def world_velocity(state: FlowState, data: RhsData) -> np.ndarray:
    return data.xi_dot @ state.chart.frame.tangent


def make_record(state: FlowState, data: RhsData) -> TrajectoryRecord:
    return TrajectoryRecord(
        t=state.t,
        t_physical=state.t_physical,
        xi_x=float(state.xi[0]),
        xi_y=float(state.xi[1]),
        xi_z=float(state.xi[2]),
        energy=data.energy,
        area=data.willmore.geometry.area,
        u_norm=state.u.sup_norm(),
        u_odd_norm=state.odd_norm(),
        I1=float(data.I[0]),
        I2=float(data.I[1]),
        dissipation=data.dissipation,
    )


class FlowRunner:
    """Integrates one configured flow and writes its artifacts to `output_dir` (if given)."""

    def __init__(self, config: RunConfig, *, output_dir: Path | None = None, name: str = "FlowRunner"):
        self.config = config
        self.name = name
        self.run_id = f"{name}.{config.surface.kind}.{time.strftime('%y%m%d%H%M%S')}"
        self.basis = basis_for(config)
        self.dt = config.time.dt if config.time.dt is not None else dt_max(self.basis)
        if self.dt > dt_max(self.basis) * (1.0 + 1e-12):
            raise StepError(
                f"dt={self.dt:.3e} exceeds the stability bound {dt_max(self.basis):.3e} for l_max={self.basis.l_max}",
                dt=self.dt,
                dt_max=dt_max(self.basis),
            )
        self.output_dir = None if output_dir is None else Path(output_dir).resolve()
        self._root_file_handler: logging.FileHandler | None = None
        if self.output_dir is not None:
            self.logger = get_logger(name, log_path=self.output_dir / "bubbleflow.log", emoji="🫧")
            self._root_file_handler = add_root_file_handler(self.output_dir / "everything.log")
        else:
            self.logger = get_logger(name, emoji="🫧")
        self.trajectory = Trajectory(lam=config.lam)
        self.state: FlowState | None = None

    def get_metadata(self) -> dict:
        return {
            "name": self.name,
            "run_id": self.run_id,
            "config_hash": config_hash(self.config),
            "dt": self.dt,
        }

    def cleanup_handlers(self) -> None:
        """Close and remove file handlers to prevent file descriptor leaks."""
        if self._root_file_handler is not None:
            remove_file_handler(logging.getLogger(), self._root_file_handler)
            self._root_file_handler = None
        cleanup_file_handlers(self.logger)

    def run(self) -> Trajectory:
        try:
            self._run()
        finally:
            self.end()
        return self.trajectory

    def _run(self) -> None:
        timing = self.config.time
        self.state = initial_state(self.config, self.basis)
        self.logger.info(
            f"Starting flow on {get_surface(self.config.surface)!r} at xi={np.round(self.state.xi, 6).tolist()} "
            f"(lambda={self.config.lam}, dt={self.dt:.3e}, {self.basis!r})"
        )
        n_steps = min(timing.max_steps, int(np.ceil(timing.t_end / self.dt - 1e-9)))
        info = None
        for index in tqdm(range(n_steps), desc="flow", disable=self.output_dir is None):
            state = self.state
            new_state, info = step(state, self.dt, self.config.solver, previous=info)
            data = info.rhs
            energies = self.trajectory.step_energies
            if energies and data.energy > energies[-1] + ENERGY_SLACK:
                self.logger.warning(f"energy increased by {data.energy - energies[-1]:.3e} at step {state.step}")
            energies.append(data.energy)
            stationary = data.stationarity <= timing.stop_tol
            if index % timing.record_every == 0 or stationary:
                self.trajectory.append(make_record(state, data), world_velocity(state, data))
            if index % timing.snapshot_every == 0:
                self._snapshot(state)
            if stationary:
                self.trajectory.stopped = "stationary"
                self.logger.info(f"Stationary at t={state.t:.4e} (|P_H^perp W| = {data.stationarity:.2e})")
                return
            self.logger.debug(
                f"step {state.step}: energy={data.energy:.12f} |P_H W|={data.stationarity:.3e} "
                f"area drift={info.area_drift:.2e} boundary iterations={info.boundary.iterations} "
                f"admissibility iterations={info.admissibility.iterations}"
            )
            self.state = new_state
        final = rhs(self.state)
        self.trajectory.step_energies.append(final.energy)
        self.trajectory.append(make_record(self.state, final), world_velocity(self.state, final))
        if final.stationarity <= timing.stop_tol:
            self.trajectory.stopped = "stationary"
        elif n_steps == timing.max_steps:
            self.trajectory.stopped = "max_steps"
        self.logger.info(f"Finished at t={self.state.t:.4e} after {self.state.step} steps ({self.trajectory.stopped})")

    def _snapshot(self, state: FlowState) -> None:
        self.trajectory.snapshots.append(state)
        if self.output_dir is None:
            return
        sidecar = {
            **state.describe(),
            "modes": [[mode.l, mode.m] for mode in self.basis.modes],
        }
        write_snapshot(self.output_dir, state.step, state.u.coeffs, sidecar)

    def summary(self) -> dict:
        state = self.state
        summary = {**self.get_metadata(), "stopped": self.trajectory.stopped, "records": len(self.trajectory)}
        if state is not None:
            summary |= {
                "steps": state.step,
                "t": state.t,
                "t_physical": state.t_physical,
                "t_fast": state.t_fast,
                "xi": state.xi.tolist(),
            }
        if len(self.trajectory):
            last = self.trajectory.records[-1]
            summary |= {
                "energy": last.energy,
                "stationarity": float(np.sqrt(last.dissipation)),
                "max_energy_increase": self.trajectory.max_energy_increase(),
            }
        return summary

    def end(self) -> None:
        snapshots = self.trajectory.snapshots
        if self.state is not None and (not snapshots or snapshots[-1] is not self.state):
            self._snapshot(self.state)
        if self.output_dir is not None:
            write_trajectory_csv(self.output_dir / FILE_TRAJECTORY, self.trajectory.rows())
            atomic_write(self.output_dir / FILE_CONFIG, self.config.to_yaml())
            atomic_write_json(self.output_dir / FILE_SUMMARY, self.summary())
        self.cleanup_handlers()
