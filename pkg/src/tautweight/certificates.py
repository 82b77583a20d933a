"""Named residual checks bundled into pass/fail reports."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ResidualCheck:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.value <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class CertificateReport:
    """A set of named residuals; passes iff every residual is within tolerance."""

    title: str
    checks: tuple = field(default_factory=tuple)
    notes: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ResidualCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "notes": list(self.notes),
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        worst = max(self.checks, key=lambda c: c.value / max(c.tolerance, 1e-300), default=None)
        tail = f" (worst: {worst.name}={worst.value:.3e})" if worst else ""
        return f"[{status}] {self.title}{tail}"
