"""
Executable verification suites with reference oracles
"""
from .oracles import eg_uot_oracle, exhaustive_two_partition, gd_barycenter_oracle
from .report import Check, ExperimentReport
from .suites import SUITE_NAMES, SUITES, random_problem, run_suite

__all__ = [
    "Check",
    "ExperimentReport",
    "SUITES",
    "SUITE_NAMES",
    "run_suite",
    "random_problem",
    "eg_uot_oracle",
    "gd_barycenter_oracle",
    "exhaustive_two_partition",
]
