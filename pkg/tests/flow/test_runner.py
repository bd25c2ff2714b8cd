import json

import numpy as np
import pytest

from bubbleflow.config import config_from_dict, parse_config
from bubbleflow.constants import CSV_SCHEMA_VERSION, DIR_SNAPSHOTS, FILE_CONFIG, FILE_SUMMARY, FILE_TRAJECTORY
from bubbleflow.exceptions import StepError
from bubbleflow.flow.runner import FlowRunner, initial_state, seed_field, starting_point
from bubbleflow.surfaces import get_surface
from bubbleflow.utils.output import read_snapshot, read_trajectory_csv


class TestFlowRunner:
    def test_run_writes_artifacts(self, plane_config, tmp_path):
        trajectory = FlowRunner(plane_config, output_dir=tmp_path).run()
        assert trajectory.stopped == "max_steps"
        assert len(trajectory) == 5

        schema, columns = read_trajectory_csv(tmp_path / FILE_TRAJECTORY)
        assert schema == CSV_SCHEMA_VERSION
        assert columns["t"].size == 5
        assert np.all(np.diff(columns["energy"]) < 0)
        np.testing.assert_allclose(columns["area"], 2 * np.pi, atol=1e-10)

        summary = json.loads((tmp_path / FILE_SUMMARY).read_text())
        assert summary["steps"] == 4
        assert summary["stopped"] == "max_steps"
        assert parse_config(tmp_path / FILE_CONFIG) == plane_config

        snapshots = sorted((tmp_path / DIR_SNAPSHOTS).glob("*.f64"))
        assert [p.name for p in snapshots] == ["u_000000.f64", "u_000002.f64", "u_000004.f64"]
        coeffs, sidecar = read_snapshot(snapshots[-1])
        assert sidecar["step"] == 4
        assert coeffs.size == len(sidecar["modes"])

    def test_trajectory_is_reproducible(self, plane_config, tmp_path):
        FlowRunner(plane_config, output_dir=tmp_path / "a").run()
        FlowRunner(plane_config, output_dir=tmp_path / "b").run()
        first = (tmp_path / "a" / FILE_TRAJECTORY).read_bytes()
        assert first == (tmp_path / "b" / FILE_TRAJECTORY).read_bytes()

    def test_round_seed_stops_immediately(self, plane_config_data):
        config = config_from_dict({**plane_config_data, "seed": {"modes": []}})
        runner = FlowRunner(config)
        trajectory = runner.run()
        assert trajectory.stopped == "stationary"
        assert len(trajectory) == 1
        assert runner.state.step == 0

    def test_without_output_dir(self, plane_config):
        trajectory = FlowRunner(plane_config).run()
        assert len(trajectory.snapshots) == 3
        assert trajectory.velocities[0].shape == (3,)
        assert len(trajectory.step_energies) == 5
        assert trajectory.max_energy_increase() == 0.0

    def test_dt_above_the_stability_bound(self, plane_config_data):
        config = config_from_dict({**plane_config_data, "time": {"dt": 0.01, "t_end": 1.0}})
        with pytest.raises(StepError, match="stability bound"):
            FlowRunner(config)


class TestInitialState:
    def test_seed_field(self, basis, plane_config):
        field = seed_field(basis, plane_config.seed)
        assert field.coeffs[basis.index(2, 0)] == 0.02
        assert field.coeffs[basis.index(2, 2)] == 0.01

    def test_starting_point_moves_along_the_host(self, ellipsoid):
        config = config_from_dict({"surface": {"kind": "ellipsoid"}, "start": {"p0": [0.05, 0.0]}})
        p = starting_point(get_surface(config.surface), config.start)
        assert abs(float(ellipsoid.level(p))) < 1e-13
        assert np.linalg.norm(p - ellipsoid.default_anchor()) == pytest.approx(0.05, rel=1e-2)

    def test_initial_state_is_admissible(self, basis, plane_config):
        state = initial_state(plane_config, basis)
        assert state.lam == plane_config.lam
        np.testing.assert_allclose(state.xi, 0.0)
