"""The bundled example programs and their expected verdicts."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import List, Optional

from .parser import parse_source
from .policy import ProgramSpec, loads_policy
from .syntax import Program


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    program_file: str
    policy_file: str
    verdict: str
    line: Optional[int] = None

    def source(self) -> str:
        return _read(self.program_file)

    def program(self) -> Program:
        return parse_source(self.source())

    def spec(self) -> ProgramSpec:
        return loads_policy(_read(self.policy_file))

    def path(self, which: str = "program"):
        """A filesystem path to the program or policy file."""
        name = self.program_file if which == "program" else self.policy_file
        return resources.files("pyxflow") / "corpus" / name


def _read(name: str) -> str:
    return (resources.files("pyxflow") / "corpus" / name).read_text(encoding="utf-8")


def entries() -> List[CorpusEntry]:
    manifest = json.loads(_read("manifest.json"))
    return [CorpusEntry(name, e["program"], e["policy"], e["verdict"], e.get("line"))
            for name, e in manifest.items()]


def entry(name: str) -> CorpusEntry:
    for e in entries():
        if e.name == name:
            return e
    raise KeyError(name)
