import pytest
from pydantic import ValidationError

from bubbleflow import CONFIG_DIR
from bubbleflow.config import (
    EllipsoidConfig,
    ModeAmplitude,
    RunConfig,
    SphereConfig,
    config_from_dict,
    config_hash,
    parse_config,
)
from bubbleflow.exceptions import ConfigError


class TestRunConfig:
    def test_defaults(self):
        config = config_from_dict({})
        assert isinstance(config.surface, SphereConfig)
        assert config.lam == 0.05
        assert config.resolution.l_max == 16
        assert config.resolution.trace_order == 13
        assert config.time.dt is None
        assert config.suites == ["round", "anchors", "surfaces", "barycenter"]

    def test_lambda_alias(self):
        config = config_from_dict({"lambda": 0.02})
        assert config.lam == 0.02
        assert "lambda" in config.model_dump(by_alias=True)

    @pytest.mark.parametrize("lam", [-0.1, 0.0, 0.6])
    def test_lambda_range(self, lam):
        with pytest.raises(ConfigError, match=r"lambda must be in \(0, lambda_max\]"):
            config_from_dict({"lambda": lam})

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="viscosity: unknown key"):
            config_from_dict({"viscosity": 1.0})

    def test_surface_discriminator(self):
        config = config_from_dict({"surface": {"kind": "ellipsoid", "a": 2.0}})
        assert config.surface == EllipsoidConfig(a=2.0)

    def test_unknown_suite(self):
        with pytest.raises(ConfigError, match="unknown suites"):
            config_from_dict({"verify": {"suites": ["round", "banana"]}})

    def test_all_suites(self):
        config = config_from_dict({"verify": {"suites": ["all"]}})
        assert config.suites[0] == "round"
        assert "convergence" in config.suites

    def test_resolution_must_be_resolvable(self):
        with pytest.raises(ConfigError, match="2\\*l_max \\+ 2"):
            config_from_dict({"resolution": {"l_max": 8, "n_theta": 12, "n_phi": 48, "trace_order": 5}})
        with pytest.raises(ConfigError, match="trace_order"):
            config_from_dict({"resolution": {"l_max": 8, "n_theta": 24, "n_phi": 48, "trace_order": 6}})

    def test_explicit_trace_order_is_kept(self):
        config = config_from_dict({"resolution": {"l_max": 8, "n_theta": 24, "n_phi": 48, "trace_order": 3}})
        assert config.resolution.trace_order == 3

    def test_config_is_frozen(self, plane_config):
        with pytest.raises(ValidationError):
            plane_config.lam = 0.1


class TestSeedModes:
    def test_neumann_mode(self):
        assert ModeAmplitude(l=3, m=-1, amplitude=0.1).m == -1

    def test_odd_mode_rejected(self):
        with pytest.raises(ValueError, match="Neumann class"):
            ModeAmplitude(l=2, m=1, amplitude=0.1)

    def test_order_exceeds_degree(self):
        with pytest.raises(ConfigError, match="exceeds degree"):
            config_from_dict({"seed": {"modes": [{"l": 1, "m": 3, "amplitude": 0.1}]}})

    def test_degree_above_l_max(self):
        with pytest.raises(ConfigError, match="above l_max"):
            config_from_dict({"seed": {"modes": [{"l": 18, "m": 0, "amplitude": 0.1}]}})


class TestParseConfig:
    @pytest.mark.parametrize(
        "name", ["plane.yaml", "sphere.yaml", "ellipsoid.yaml", "graph.yaml", "convergence/ellipsoid.yaml"]
    )
    def test_shipped_configs(self, name):
        config = parse_config(CONFIG_DIR / name)
        assert isinstance(config, RunConfig)
        assert config.resolution.l_max >= 6

    def test_include_resolution(self):
        config = parse_config(CONFIG_DIR / "ellipsoid.yaml")
        assert config.resolution.l_max == 12
        assert config.resolution.trace_order == 9
        assert config.surface.kind == "ellipsoid"
        assert config.time.max_steps == 2000

    def test_to_yaml_round_trip(self, plane_config, write_config):
        path = write_config(plane_config.to_yaml())
        assert parse_config(path) == plane_config

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "absent.yaml")

    def test_missing_include(self, write_config):
        path = write_config("resolution: !include resolution/absent.yaml\n")
        with pytest.raises(ConfigError, match="!include target not found"):
            parse_config(path)

    def test_syntax_error_reports_line(self, write_config):
        path = write_config("lambda: 0.05\nsurface: [plane\n")
        with pytest.raises(ConfigError, match="line"):
            parse_config(path)

    def test_top_level_must_be_mapping(self, write_config):
        path = write_config("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            parse_config(path)

    def test_empty_file_gets_defaults(self, write_config):
        assert parse_config(write_config("")) == config_from_dict({})


class TestConfigHash:
    def test_deterministic(self, plane_config_data):
        assert config_hash(config_from_dict(plane_config_data)) == config_hash(config_from_dict(plane_config_data))

    def test_changes_with_lambda(self, plane_config_data):
        other = dict(plane_config_data, **{"lambda": 0.04})
        assert config_hash(config_from_dict(plane_config_data)) != config_hash(config_from_dict(other))
