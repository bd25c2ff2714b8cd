import json

import numpy as np
import pytest

from bubbleflow.constants import CSV_SCHEMA_VERSION, TRAJECTORY_COLUMNS
from bubbleflow.utils.atomic_write import atomic_write, atomic_write_json
from bubbleflow.utils.output import read_snapshot, read_trajectory_csv, write_snapshot, write_trajectory_csv
from bubbleflow.utils.yaml_utils import load_yaml, resolve_includes


class TestTrajectoryCsv:
    def test_schema_and_columns(self, tmp_path):
        rows = [[0.1 * k + j for j in range(len(TRAJECTORY_COLUMNS))] for k in range(3)]
        write_trajectory_csv(tmp_path / "trajectory.csv", rows)
        text = (tmp_path / "trajectory.csv").read_text()
        assert text.startswith(f"# schema: {CSV_SCHEMA_VERSION}\nt,t_physical,")
        schema, columns = read_trajectory_csv(tmp_path / "trajectory.csv")
        assert schema == CSV_SCHEMA_VERSION
        assert list(columns) == list(TRAJECTORY_COLUMNS)
        np.testing.assert_array_equal(columns["energy"], [row[5] for row in rows])

    def test_empty_trajectory(self, tmp_path):
        write_trajectory_csv(tmp_path / "trajectory.csv", [])
        _, columns = read_trajectory_csv(tmp_path / "trajectory.csv")
        assert columns["t"].size == 0

    def test_missing_schema(self, tmp_path):
        (tmp_path / "bad.csv").write_text("t,energy\n0.0,1.0\n")
        with pytest.raises(ValueError, match="schema"):
            read_trajectory_csv(tmp_path / "bad.csv")


class TestSnapshots:
    def test_little_endian_coefficients(self, tmp_path):
        coeffs = np.array([1.0, -0.5, 1e-300])
        path = write_snapshot(tmp_path, 12, coeffs, {"step": 12, "xi": np.zeros(3)})
        assert path.name == "u_000012.f64"
        assert path.read_bytes() == coeffs.astype("<f8").tobytes()
        loaded, sidecar = read_snapshot(path)
        np.testing.assert_array_equal(loaded, coeffs)
        assert sidecar == {"step": 12, "xi": [0.0, 0.0, 0.0]}


class TestAtomicWrite:
    def test_creates_parents_and_leaves_no_temporary(self, tmp_path):
        target = tmp_path / "a" / "b.txt"
        atomic_write(target, "hello")
        assert target.read_text() == "hello"
        assert list(target.parent.iterdir()) == [target]

    def test_json_with_numpy_values(self, tmp_path):
        atomic_write_json(tmp_path / "r.json", {"x": np.float64(0.5), "v": np.arange(2), "p": tmp_path})
        record = json.loads((tmp_path / "r.json").read_text())
        assert record == {"x": 0.5, "v": [0, 1], "p": str(tmp_path)}

    def test_json_rejects_unknown_objects(self, tmp_path):
        with pytest.raises(TypeError, match="not JSON serializable"):
            atomic_write_json(tmp_path / "r.json", {"x": object()})


class TestIncludes:
    def test_mapping_include(self, tmp_path):
        (tmp_path / "res.yaml").write_text("l_max: 8\nn_theta: 24\n")
        text = resolve_includes("lambda: 0.05\nresolution: !include res.yaml\n", base_dir=tmp_path)
        assert "  l_max: 8" in text

    def test_merge_key(self, tmp_path):
        (tmp_path / "base.yaml").write_text("a: 1\nb: 2\n")
        (tmp_path / "top.yaml").write_text("section:\n  <<: !include base.yaml\n  b: 3\n")
        assert load_yaml(tmp_path / "top.yaml") == {"section": {"a": 1, "b": 3}}

    def test_fallback_directory(self, tmp_path):
        (tmp_path / "shared").mkdir()
        (tmp_path / "shared" / "res.yaml").write_text("l_max: 8\n")
        text = resolve_includes("resolution: !include res.yaml\n", base_dir=tmp_path, fallback_dir=tmp_path / "shared")
        assert "l_max: 8" in text

    def test_missing_target(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="!include target not found"):
            resolve_includes("x: !include nowhere.yaml\n", base_dir=tmp_path)
