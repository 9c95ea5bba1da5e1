"""
Experiment reports - named checks with measured values and tolerances
"""
from dataclasses import asdict, dataclass, field
from typing import List


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


@dataclass
class ExperimentReport:
    name: str
    checks: List[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, measured: float, tolerance: float, detail: str = "") -> Check:
        item = Check(name=name, passed=bool(passed), measured=float(measured), tolerance=float(tolerance), detail=detail)
        self.checks.append(item)
        return item

    def to_dict(self) -> dict:
        data = asdict(self)
        data["passed"] = self.passed
        return data

    def summary_lines(self) -> List[str]:
        lines = [f"=== {self.name}: {'PASS' if self.passed else 'FAIL'} ({self.seconds:.2f}s) ==="]
        for c in self.checks:
            status = "ok  " if c.passed else "FAIL"
            lines.append(f"  [{status}] {c.name}: measured {c.measured:.6g}, tolerance {c.tolerance:.6g} {c.detail}".rstrip())
        return lines
