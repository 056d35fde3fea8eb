"""Policy files and the initial analysis environment.

A policy is a JSON document::

    {"principals": ["A", "B", "S"],
     "executor": "S",
     "clearance": {"owner": "S", "readers": ["S"], "writers": ["A", "B"]},
     "globals": {"y": {"owner": "B", "readers": ["B", "S"], "writers": ["B"]}},
     "functions": {"f": {"executor": "B", "clearance": {...}}}}

``readers``/``writers`` entries may be ``"*"`` for every principal.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

from .labels import Label, LabelError, Universe, label_from_json
from .report import MODULE_SCOPE, Diagnostic, Misuse
from .syntax import Program
from .varsets import sources_of, vars_of


class PolicyError(ValueError):
    """Malformed or inconsistent policy document."""


@dataclass(frozen=True)
class FunctionPolicy:
    executor: str
    clearance: Label


@dataclass(frozen=True)
class ProgramSpec:
    universe: Universe
    executor: str
    clearance: Label
    globals: Mapping[str, Label]
    functions: Mapping[str, FunctionPolicy] = field(default_factory=dict)

    def __post_init__(self):
        if self.executor not in self.universe:
            raise PolicyError(f"executor {self.executor!r} is not a principal")
        for name, fp in self.functions.items():
            if fp.executor not in self.universe:
                raise PolicyError(f"executor {fp.executor!r} of function {name!r} is not a principal")

    def to_json(self) -> dict:
        return {
            "principals": list(self.universe.members),
            "executor": self.executor,
            "clearance": self.clearance.to_json(),
            "globals": {k: self.globals[k].to_json() for k in sorted(self.globals)},
            "functions": {
                k: {"executor": fp.executor, "clearance": fp.clearance.to_json()}
                for k, fp in sorted(self.functions.items())
            },
        }

    def validate_against(self, prog: Program) -> None:
        unknown = sorted(set(self.functions) - set(prog.functions))
        if unknown:
            raise PolicyError(f"policy names undefined function(s): {', '.join(unknown)}")


def _no_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise PolicyError(f"duplicate key {key!r} in policy")
        out[key] = value
    return out


def policy_from_dict(data) -> ProgramSpec:
    if not isinstance(data, dict):
        raise PolicyError("policy must be a JSON object")
    for key in ("principals", "executor", "clearance"):
        if key not in data:
            raise PolicyError(f"policy is missing {key!r}")
    try:
        universe = Universe(data["principals"])
        executor = data["executor"]
        if executor not in universe:
            raise PolicyError(f"executor {executor!r} is not a principal")
        clearance = label_from_json(universe, data["clearance"])
        raw_globals = data.get("globals", {})
        if not isinstance(raw_globals, dict):
            raise PolicyError("'globals' must map variable names to labels")
        globals_ = {}
        for name, lab in raw_globals.items():
            try:
                globals_[name] = label_from_json(universe, lab)
            except LabelError as exc:
                raise PolicyError(f"global {name!r}: {exc}") from None
        functions = {}
        for name, fp in data.get("functions", {}).items():
            if not isinstance(fp, dict) or "executor" not in fp or "clearance" not in fp:
                raise PolicyError(f"function {name!r} needs 'executor' and 'clearance'")
            if fp["executor"] not in universe:
                raise PolicyError(f"executor {fp['executor']!r} of function {name!r} is not a principal")
            try:
                functions[name] = FunctionPolicy(fp["executor"], label_from_json(universe, fp["clearance"]))
            except LabelError as exc:
                raise PolicyError(f"function {name!r}: {exc}") from None
    except LabelError as exc:
        raise PolicyError(str(exc)) from None
    return ProgramSpec(universe, executor, clearance, globals_, functions)


def loads_policy(text: str) -> ProgramSpec:
    try:
        data = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise PolicyError(f"policy is not valid JSON: {exc}") from None
    return policy_from_dict(data)


def load_policy(source) -> ProgramSpec:
    """Load a policy from a path, an open file, or a dict."""
    if isinstance(source, dict):
        return policy_from_dict(source)
    if hasattr(source, "read"):
        return loads_policy(source.read())
    with open(os.fspath(source), encoding="utf-8") as fh:
        return loads_policy(fh.read())


def dump_policy(spec: ProgramSpec) -> str:
    return json.dumps(spec.to_json(), indent=2, sort_keys=True)


@dataclass
class AnalysisEnv:
    """Mutable labelling state for one scope: λ over locals and globals, plus pc."""

    labels: Dict[str, Label]
    pc: Label
    globals: frozenset
    locals: frozenset
    executor: str
    clearance: Label
    scope: str = MODULE_SCOPE

    @property
    def universe(self) -> Universe:
        return self.pc.universe

    def lookup(self, name: str) -> Label:
        return self.labels[name]

    def is_global(self, name: str) -> bool:
        return name in self.globals

    def stamp(self, label: Label) -> Label:
        return label.with_owner(self.executor)

    def raise_pc(self, label: Label) -> None:
        self.pc = self.stamp(self.pc.join(label))

    def state(self) -> tuple:
        """Labels of locals and pc, for fixed-point comparison."""
        return (tuple((k, self.labels[k]) for k in sorted(self.locals)), self.pc)

    def local_labels(self) -> Dict[str, Label]:
        return {k: self.labels[k] for k in sorted(self.locals)}

    def copy(self) -> "AnalysisEnv":
        return AnalysisEnv(dict(self.labels), self.pc, self.globals, self.locals,
                           self.executor, self.clearance, self.scope)

    def merge(self, a: "AnalysisEnv", b: "AnalysisEnv") -> None:
        """Set this env to the pointwise join of two branch results."""
        for name in self.locals:
            self.labels[name] = self.stamp(a.labels[name].join(b.labels[name]))
        self.pc = self.stamp(a.pc.join(b.pc))


def _init_misuse(message, variable=None, source=None, target=None, clearance=None, scope=MODULE_SCOPE):
    return Misuse(Diagnostic("INIT", message, scope=scope, variable=variable,
                             source=source, target=target, clearance=clearance))


def check_sources(spec: ProgramSpec, executor: str, clearance: Label, sources, globals_,
                  scope: str = MODULE_SCOPE) -> None:
    """The executor must read every global source, each within its clearance."""
    if executor not in spec.universe:
        raise _init_misuse(f"executor {executor!r} is not a principal", scope=scope)
    for name in sorted(set(sources) & set(globals_)):
        lab = spec.globals[name]
        if executor not in lab.readers:
            raise _init_misuse(f"executor {executor} is not a reader of global source {name}",
                               variable=name, source=lab, scope=scope)
        if not lab.leq(clearance):
            raise _init_misuse(f"global source {name} exceeds the clearance of {executor}",
                               variable=name, source=lab, target=clearance,
                               clearance=clearance, scope=scope)


def uncut_functions(spec: ProgramSpec, prog: Program) -> dict:
    """Functions that run under their caller's executor; the rest are checked on call."""
    return {k: v for k, v in prog.functions.items() if k not in spec.functions}


def check_initial_environment(spec: ProgramSpec, prog: Program,
                              executor: Optional[str] = None,
                              clearance: Optional[Label] = None) -> AnalysisEnv:
    """Validate the program against the policy and build the top-level environment.

    Raises :class:`Misuse` when a premise fails.
    """
    executor = spec.executor if executor is None else executor
    clearance = spec.clearance if clearance is None else clearance
    everything = vars_of(prog)
    missing = sorted(set(spec.globals) - everything)
    if missing:
        raise _init_misuse(f"global(s) {', '.join(missing)} do not occur in the program",
                           variable=missing[0])
    top = prog.statements
    sources = set()
    for stmt in top:
        sources |= sources_of(stmt, uncut_functions(spec, prog))
    check_sources(spec, executor, clearance, sources, spec.globals)

    names = set()
    for stmt in top:
        names |= vars_of(stmt, {})
    locals_ = frozenset(names - set(spec.globals))
    start = spec.universe.bottom().with_owner(executor)
    labels = dict(spec.globals)
    for name in locals_:
        labels[name] = start
    return AnalysisEnv(labels, start, frozenset(spec.globals), locals_, executor, clearance)
