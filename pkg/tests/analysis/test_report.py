import json

import pytest

from bubbleflow.analysis.report import Check, ScanTable, VerificationReport


class TestCheck:
    @pytest.mark.parametrize(
        ("kind", "value", "target", "tolerance", "passed"),
        [
            ("abs", 1.05, 1.0, 0.1, True),
            ("abs", 1.2, 1.0, 0.1, False),
            ("rel", 105.0, 100.0, 0.1, True),
            ("rel", 0.05, 0.0, 0.1, True),
            ("max", 0.5, 1.0, 0.0, True),
            ("max", 1.5, 1.0, 0.0, False),
            ("min", 1.5, 1.0, 0.0, True),
            ("min", 0.8, 0.9, 0.0, False),
        ],
    )
    def test_kinds(self, kind, value, target, tolerance, passed):
        assert Check("c", value, target, tolerance, "exact", kind=kind).passed is passed

    def test_nan_fails(self):
        assert not Check.at_most("c", float("nan"), 1.0, "exact").passed

    def test_flag(self):
        assert Check.flag("ok", True, "derived").passed
        assert not Check.flag("ok", False, "derived").passed

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="Unknown check kind"):
            Check("c", 1.0, 1.0, 0.0, "exact", kind="median")


class TestScanTable:
    def test_row_length(self):
        table = ScanTable(["lambda", "slope"])
        with pytest.raises(ValueError, match="2 columns"):
            table.add(0.1)

    def test_csv(self):
        table = ScanTable(["lambda", "slope"])
        table.add(0.1, -6.25)
        assert table.to_csv() == "lambda,slope\n0.1,-6.25\n"


class TestVerificationReport:
    def test_merge_and_lookup(self):
        report = VerificationReport(suites=["round"])
        report.add(Check.at_most("round.area", 0.0, 1e-10, "exact"))
        other = VerificationReport(suites=["flow"], values={"flow.order": 1.0})
        other.add(Check.at_most("flow.area", 1.0, 1e-10, "derived"))
        report.merge(other)
        assert report.suites == ["round", "flow"]
        assert report["flow.area"].anchor == "derived"
        assert not report.passed
        assert [c.name for c in report.failures] == ["flow.area"]
        with pytest.raises(KeyError):
            report["missing"]

    def test_for_basis(self, basis):
        report = VerificationReport.for_basis(basis, "abc")
        assert report.resolution == {"l_max": 8, "n_theta": 24, "n_phi": 48, "trace_order": 5}
        assert report.config_hash == "abc"

    def test_write(self, tmp_path):
        report = VerificationReport(config_hash="abc")
        report.add(Check("round.energy", 6.283185307179586, 6.283185307179586, 1e-10, "exact"))
        report.table("expansion", ["lambda", "slope"]).add(0.08, 0.0)
        report.write(tmp_path / "report.json")
        record = json.loads((tmp_path / "report.json").read_text())
        assert record["passed"] is True
        assert record["checks"][0]["name"] == "round.energy"
        assert record["tables"]["expansion"]["rows"] == [[0.08, 0.0]]
        assert (tmp_path / "tables" / "expansion.csv").read_text().startswith("lambda,slope\n")
