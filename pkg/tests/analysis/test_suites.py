import pytest

from bubbleflow.analysis.suites import SUITES, SuiteContext, run_suites
from bubbleflow.config import SUITE_NAMES


class TestSuiteRegistry:
    def test_every_configurable_suite_is_registered(self):
        assert tuple(SUITES) == SUITE_NAMES

    def test_unknown_suite(self, plane_config):
        with pytest.raises(ValueError, match="Unknown suites"):
            run_suites(plane_config, ["round", "banana"])

    def test_context_defaults_to_the_stability_bound(self, plane_config):
        ctx = SuiteContext.from_config(plane_config)
        assert ctx.dt == pytest.approx(1.0 / 5040.0)
        assert ctx.lam == plane_config.lam


class TestRunSuites:
    def test_surfaces_on_the_plane(self, plane_config):
        report = run_suites(plane_config, ["surfaces"])
        assert report.passed, report.failures
        assert report.suites == ["surfaces"]
        assert report["surfaces.flat_state"].value == 0.0
        assert report.resolution["l_max"] == 8

    def test_flow_cache_is_shared(self, plane_config):
        ctx = SuiteContext.from_config(plane_config)
        first = ctx.flow(ctx.lam, ctx.dt)
        assert ctx.flow(ctx.lam, ctx.dt) is first
        trajectory, state = first
        assert state.step == plane_config.time.max_steps

    @pytest.mark.slow
    def test_flat_suites(self, plane_config):
        report = run_suites(plane_config, ["round", "anchors", "barycenter", "expansion"])
        assert report.passed, report.failures
