"""Brute-force non-interference checking.

An observer with label ``δ`` sees every variable whose final label flows to
``δ``.  Two runs from stores that agree on those inputs must look the same
to the observer.  Termination is itself observable when the final ``pc``
label flows to ``δ``: a run that finishes and one that exhausts its step
budget are then told apart.  When ``pc`` is above ``δ`` the observer cannot
tell whether the run stopped, only what it saw of the visible variables.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .analyzer import analyze_program
from .interpreter import (
    DEFAULT_STEP_BUDGET, Outcome, StepBudgetExhausted, Terminated, run,
)
from .labels import Label
from .policy import ProgramSpec
from .report import AnalysisReport
from .syntax import Assign, BinOp, FuncDef, If, Program, Seq, UnOp, Var, While

DIVERGED = "diverged"
FAULTED = "faulted"


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class Observation:
    """What an observer at label ``observer`` learns from one run."""

    observer: Label
    values: Tuple[Tuple[str, object], ...]
    status: str = "terminated"       # or DIVERGED / FAULTED
    termination_visible: bool = True

    def as_dict(self) -> Dict[str, object]:
        return dict(self.values)

    def to_json(self) -> dict:
        return {"status": self.status, "values": dict(self.values),
                "termination_visible": self.termination_visible}


@dataclass(frozen=True)
class NoCounterexample:
    trials: int
    pairs_checked: int
    exhaustive: bool

    found = False

    def to_json(self) -> dict:
        return {"verdict": "no-counterexample", "trials": self.trials,
                "pairs_checked": self.pairs_checked, "exhaustive": self.exhaustive}


@dataclass(frozen=True)
class Counterexample:
    store1: Dict[str, object]
    store2: Dict[str, object]
    variable: Optional[str]
    observation1: Observation
    observation2: Observation

    found = True

    def to_json(self) -> dict:
        return {"verdict": "counterexample", "store1": self.store1, "store2": self.store2,
                "variable": self.variable,
                "observation1": self.observation1.to_json(),
                "observation2": self.observation2.to_json()}


def visible(labels: Mapping[str, Label], observer: Label) -> List[str]:
    return sorted(x for x, lab in labels.items() if lab.leq(observer))


def low_equivalent(store1: Mapping, store2: Mapping, labels: Mapping[str, Label], observer: Label) -> bool:
    if set(store1) != set(store2):
        raise OracleError("stores bind different variables")
    return all(store1[x] == store2[x] for x in visible(labels, observer) if x in store1)


def observe(outcome: Outcome, labels: Mapping[str, Label], observer: Label,
            pc: Optional[Label] = None) -> Observation:
    """Project a run onto the variables ``observer`` may read.

    ``pc`` is the final program-counter label; termination is observable
    only when it flows to ``observer`` (always, when ``pc`` is omitted).
    """
    term_visible = pc is None or pc.leq(observer)
    store = outcome.store.values()
    values = tuple((x, store[x]) for x in visible(labels, observer) if x in store)
    if isinstance(outcome, Terminated):
        status = "terminated"
    elif isinstance(outcome, StepBudgetExhausted):
        status = DIVERGED
    else:
        status = FAULTED
    return Observation(observer, values, status, term_visible)


def indistinguishable(o1: Observation, o2: Observation) -> Tuple[bool, Optional[str]]:
    """Compare two observations; return (same, first differing variable)."""
    t1 = o1.status == "terminated"
    t2 = o2.status == "terminated"
    if t1 != t2 and (o1.termination_visible or o2.termination_visible):
        return False, None
    if not t1 and not t2:
        return True, None
    d1, d2 = o1.as_dict(), o2.as_dict()
    for x in sorted(set(d1) | set(d2)):
        if x in d1 and x in d2 and d1[x] != d2[x]:
            return False, x
        if t1 and t2 and (x in d1) != (x in d2):
            return False, x
    return True, None


def _boolean_vars(prog: Program) -> set:
    """Variables read where a truth value is expected."""
    out: set = set()

    def expr(e, want_bool):
        if isinstance(e, Var):
            if want_bool:
                out.add(e.name)
        elif isinstance(e, BinOp):
            expr(e.left, e.op in ("and", "or"))
            expr(e.right, e.op in ("and", "or"))
        elif isinstance(e, UnOp):
            expr(e.operand, e.op == "not")

    def stmt(s):
        if isinstance(s, Assign):
            expr(s.value, False)
        elif isinstance(s, Seq):
            for c in s.body:
                stmt(c)
        elif isinstance(s, If):
            expr(s.cond, True)
            stmt(s.then)
            stmt(s.orelse)
        elif isinstance(s, While):
            expr(s.cond, True)
            stmt(s.body)
        elif isinstance(s, FuncDef):
            stmt(s.body)

    for s in prog.body:
        stmt(s)
    return out


def infer_domains(prog: Program, spec: ProgramSpec) -> Dict[str, tuple]:
    """Input domain per global: both booleans where used as a truth value, else {0, 1}."""
    bools = _boolean_vars(prog)
    return {x: (False, True) if x in bools else (0, 1) for x in sorted(spec.globals)}


def _stores(domains: Mapping[str, Sequence]) -> List[Dict[str, object]]:
    names = sorted(domains)
    return [dict(zip(names, combo)) for combo in itertools.product(*(domains[n] for n in names))]


def _pairs(stores: List[dict], labels, observer, limit: int, seed: int):
    """Low-equivalent pairs of store indices; all of them if there are at most ``limit``."""
    low = visible(labels, observer)
    classes: Dict[tuple, List[int]] = {}
    for i, s in enumerate(stores):
        classes.setdefault(tuple(s[x] for x in low if x in s), []).append(i)
    total = sum(len(c) * (len(c) - 1) // 2 for c in classes.values())
    if total <= limit:
        pairs = [p for c in classes.values() for p in itertools.combinations(c, 2)]
        return pairs, True
    rng = random.Random(seed)
    groups = [c for c in classes.values() if len(c) > 1]
    weights = [len(c) * (len(c) - 1) for c in groups]
    pairs = []
    for _ in range(limit):
        c = rng.choices(groups, weights)[0]
        pairs.append(tuple(rng.sample(c, 2)))
    return pairs, False


def check_ni(prog: Program, spec: ProgramSpec, observer: Label,
             pair_samples: int = 256, step_budget: int = DEFAULT_STEP_BUDGET,
             domains: Optional[Mapping[str, Iterable]] = None, force: bool = False,
             seed: int = 0, report: Optional[AnalysisReport] = None):
    """Search for two low-equivalent inputs whose runs the observer can tell apart.

    The labels come from analyzing ``prog`` under ``spec``.  Unless ``force``
    is set, a program the analyzer rejects raises :class:`OracleError`.
    """
    report = report if report is not None else analyze_program(spec, prog)
    if not report.secure and not force:
        raise OracleError("the analyzer rejected this program; pass force=True to check it anyway")
    labels: Dict[str, Label] = dict(spec.globals)
    labels.update(report.labels)
    doms = infer_domains(prog, spec)
    if domains:
        unknown = set(domains) - set(spec.globals)
        if unknown:
            raise OracleError(f"domains given for non-globals: {', '.join(sorted(unknown))}")
        doms.update({k: tuple(v) for k, v in domains.items()})

    stores = _stores(doms)
    pairs, exhaustive = _pairs(stores, labels, observer, pair_samples, seed)
    outcomes: Dict[int, Observation] = {}

    def obs(i):
        if i not in outcomes:
            outcomes[i] = observe(run(prog, stores[i], step_budget), labels, observer, report.pc)
        return outcomes[i]

    for i, j in pairs:
        o1, o2 = obs(i), obs(j)
        same, var = indistinguishable(o1, o2)
        if not same:
            return Counterexample(stores[i], stores[j], var, o1, o2)
    return NoCounterexample(len(outcomes), len(pairs), exhaustive)
