"""Small result records shared by the verification routines."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

RHS_SLACK = 1e-12


@dataclass
class MarginRow:
    alpha: Fraction
    lhs: Fraction
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - float(self.lhs)

    @property
    def passed(self) -> bool:
        return float(self.lhs) <= self.rhs + RHS_SLACK

    def as_dict(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "lhs": str(self.lhs),
            "rhs": repr(self.rhs),
            "slack": repr(self.slack),
            "pass": self.passed,
        }


@dataclass
class MarginReport:
    label: str
    rows: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def min_slack(self) -> float:
        return min((r.slack for r in self.rows), default=float("inf"))

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "params": self.params,
            "pass": self.passed,
            "min_slack": repr(self.min_slack),
            "rows": [r.as_dict() for r in self.rows],
        }


@dataclass(frozen=True)
class BoundCheck:
    """``lhs <= rhs`` with ``slack = rhs - lhs``, all exact."""

    lhs: object
    rhs: object

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs
