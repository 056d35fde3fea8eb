"""Diagnostics and analysis reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .labels import Label

MODULE_SCOPE = "<module>"


class Verdict(str, Enum):
    SECURE = "secure"
    MISUSE = "misuse"


@dataclass(frozen=True)
class Diagnostic:
    """One failed premise of one labelling rule.

    ``source``/``target`` are the two sides of the violated can-flow-to
    check when there is one; checks that are not flows (reader membership,
    downgrade ownership) leave ``target`` empty and explain in ``message``.
    """

    rule: str
    message: str
    line: int = 0
    col: int = 0
    scope: str = MODULE_SCOPE
    variable: Optional[str] = None
    source: Optional[Label] = None
    target: Optional[Label] = None
    pc: Optional[Label] = None
    clearance: Optional[Label] = None
    loop_pass: Optional[int] = None

    @property
    def constraint(self) -> Optional[str]:
        if self.source is None or self.target is None:
            return None
        return f"{self.source} ⋢ {self.target}"

    @property
    def key(self) -> tuple:
        return (self.rule, self.scope, self.line, self.col, self.variable, self.message)

    def to_json(self) -> dict:
        def lab(x):
            return None if x is None else x.to_json()
        return {
            "rule": self.rule,
            "message": self.message,
            "line": self.line,
            "col": self.col,
            "scope": self.scope,
            "variable": self.variable,
            "constraint": self.constraint,
            "source": lab(self.source),
            "target": lab(self.target),
            "pc": lab(self.pc),
            "clearance": lab(self.clearance),
            "loop_pass": self.loop_pass,
        }

    def render(self) -> str:
        where = f"line {self.line}" if self.line else "program"
        scope = "" if self.scope == MODULE_SCOPE else f" in {self.scope}()"
        lines = [f"MISUSE at {where}{scope} [{self.rule}]: {self.message}"]
        if self.constraint:
            lines.append(f"  violated: {self.constraint}")
        if self.pc is not None:
            lines.append(f"  pc: {self.pc}")
        if self.clearance is not None:
            lines.append(f"  clearance: {self.clearance}")
        if self.loop_pass is not None:
            lines.append(f"  loop pass: {self.loop_pass}")
        return "\n".join(lines)


class Misuse(Exception):
    """Raised by a labelling rule whose premise fails."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


class AnalysisInputError(Exception):
    """The program or policy cannot be analyzed at all (not a security finding)."""


class FixpointError(RuntimeError):
    """A loop failed to reach its label fixed point within the pass cap."""


@dataclass(frozen=True)
class LoopRecord:
    scope: str
    line: int
    passes: int
    nested: bool

    def to_json(self) -> dict:
        return {"scope": self.scope, "line": self.line, "passes": self.passes, "nested": self.nested}


@dataclass(frozen=True)
class TraceEvent:
    scope: str
    line: int
    kind: str
    pc: Label
    changed: Tuple[Tuple[str, Label], ...] = ()
    loop_pass: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "scope": self.scope,
            "line": self.line,
            "kind": self.kind,
            "pc": self.pc.to_json(),
            "changed": {k: v.to_json() for k, v in self.changed},
            "loop_pass": self.loop_pass,
        }

    def render(self) -> str:
        scope = "" if self.scope == MODULE_SCOPE else f"{self.scope}: "
        tag = f" (pass {self.loop_pass})" if self.loop_pass else ""
        changes = "".join(f"  λ({k})={v}" for k, v in self.changed)
        return f"{scope}line {self.line} {self.kind}{tag}: λ(pc)={self.pc}{changes}"


@dataclass
class AnalysisReport:
    verdict: Verdict
    diagnostics: List[Diagnostic]
    labels: Dict[str, Label]
    pc: Label
    loops: List[LoopRecord] = field(default_factory=list)
    trace: Optional[List[TraceEvent]] = None

    def __post_init__(self):
        if (self.verdict is Verdict.SECURE) == bool(self.diagnostics):
            raise ValueError("a secure report carries no diagnostics; a misuse report at least one")

    @property
    def secure(self) -> bool:
        return self.verdict is Verdict.SECURE

    def label_map(self) -> Dict[str, Label]:
        """Final local labels plus ``pc``."""
        out = dict(self.labels)
        out["pc"] = self.pc
        return out

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "diagnostics": [d.to_json() for d in self.diagnostics],
            "labels": {k: self.labels[k].to_json() for k in sorted(self.labels)},
            "pc": self.pc.to_json(),
            "loops": [r.to_json() for r in self.loops],
        }
        if self.trace is not None:
            out["trace"] = [e.to_json() for e in self.trace]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, ensure_ascii=False)

    def render(self) -> str:
        lines = []
        if self.trace is not None:
            lines.extend(e.render() for e in self.trace)
            lines.append("")
        if self.secure:
            lines.append("SECURE: program is flow-safe")
        else:
            lines.extend(d.render() for d in self.diagnostics)
        lines.append("final labels:" if self.secure else "labels at the point of misuse:")
        for name in sorted(self.labels):
            lines.append(f"  λ({name}) = {self.labels[name]}")
        lines.append(f"  λ(pc) = {self.pc}")
        return "\n".join(lines)
