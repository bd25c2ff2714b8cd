from bubbleflow.analysis.report import Check, ScanTable, VerificationReport
from bubbleflow.analysis.suites import SUITES, SuiteContext, run_suites

__all__ = ["SUITES", "Check", "ScanTable", "SuiteContext", "VerificationReport", "run_suites"]
