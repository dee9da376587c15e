"""Solver verdicts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional

from .orbits import QfType

SAT = "Sat"
UNSAT = "Unsat"


@dataclass(frozen=True)
class Verdict:
    status: str
    mode: str
    certificate: Optional[QfType] = None
    note: str = ""
    assignment: Optional[Dict[str, int]] = None

    @property
    def sat(self) -> bool:
        return self.status == SAT

    def to_json(self) -> dict:
        out = {"status": self.status, "mode": self.mode}
        if self.certificate is not None:
            out["certificate"] = str(self.certificate)
        if self.assignment is not None:
            out["assignment"] = dict(self.assignment)
        if self.note:
            out["note"] = self.note
        return out
