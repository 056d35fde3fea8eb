"""Seeded random PyX programs and policies for property and soundness tests.

Programs only read variables that are definitely assigned on every path, use
integer values throughout, and keep loops bounded unless asked otherwise.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Optional, Set

from pyxflow import Universe, policy_from_dict, targets_of, vars_of
from pyxflow.syntax import Assign, BinOp, IntLit, If, Pass, Program, Seq, UnOp, Var, While

PRINCIPALS = ["A", "B", "S"]

# L <= H <= T, L <= M <= T, M and H incomparable
LEVELS = {
    "L": {"owner": "A", "readers": ["A", "B", "S"], "writers": ["A"]},
    "M": {"owner": "A", "readers": ["A", "S"], "writers": ["A"]},
    "H": {"owner": "B", "readers": ["B", "S"], "writers": ["A", "B"]},
    "T": {"owner": "S", "readers": ["S"], "writers": ["A", "B", "S"]},
}
UNIVERSE = Universe(PRINCIPALS)


def level(name: str):
    d = LEVELS[name]
    return UNIVERSE.label(d["owner"], d["readers"], d["writers"])


@dataclass
class GenConfig:
    n_globals: int = 3
    n_locals: int = 2
    max_stmts: int = 8
    loops: bool = True
    nested: bool = False
    divergent: bool = False   # allow loops whose guard may never falsify
    force_loop: bool = False


class _Gen:
    def __init__(self, rng: random.Random, cfg: GenConfig):
        self.rng = rng
        self.cfg = cfg
        self.globals = [f"g{i}" for i in range(cfg.n_globals)]
        self.locals = [f"v{i}" for i in range(cfg.n_locals)]
        self.counters = 0
        self.budget = cfg.max_stmts
        self.loop_depth = 0

    def expr(self, defined: Set[str], depth: int = 0):
        r = self.rng.random()
        readable = sorted(defined)
        if depth >= 2 or r < 0.35:
            if readable and self.rng.random() < 0.75:
                return Var(self.rng.choice(readable))
            return IntLit(self.rng.randint(0, 2))
        if r < 0.45:
            return UnOp("-", self.expr(defined, depth + 1))
        return BinOp(self.rng.choice("+-*"), self.expr(defined, depth + 1), self.expr(defined, depth + 1))

    def cond(self, defined: Set[str], depth: int = 0):
        r = self.rng.random()
        if depth < 1 and r < 0.15:
            return BinOp(self.rng.choice(["and", "or"]), self.cond(defined, depth + 1), self.cond(defined, depth + 1))
        if depth < 1 and r < 0.22:
            return UnOp("not", self.cond(defined, depth + 1))
        op = self.rng.choice(["==", "!=", "<", "<=", ">", ">="])
        return BinOp(op, self.expr(defined, 1), self.expr(defined, 1))

    def block(self, defined: Set[str], n: int) -> List:
        out = []
        for _ in range(n):
            if self.budget <= 0:
                break
            out.extend(self.stmt(defined))
        return out

    def stmt(self, defined: Set[str]) -> List:
        self.budget -= 1
        r = self.rng.random()
        can_loop = self.cfg.loops and (self.cfg.nested or self.loop_depth == 0)
        if can_loop and self.budget >= 2 and (r < 0.25 or (self.cfg.force_loop and self.counters == 0)):
            return self.loop(defined)
        if r < 0.5 and self.budget >= 1:
            cond = self.cond(defined)
            d1, d2 = set(defined), set(defined)
            then = self.block(d1, self.rng.randint(1, 2))
            orelse = self.block(d2, self.rng.randint(0, 1))
            defined |= d1 & d2
            return [If(cond, _seq(then), _seq(orelse))]
        target = self.rng.choice(self.globals + self.locals) if self.globals else self.rng.choice(self.locals)
        s = Assign(target, self.expr(defined))
        defined.add(target)
        return [s]

    def loop(self, defined: Set[str]) -> List:
        self.counters += 1
        self.loop_depth += 1
        try:
            if self.cfg.divergent and self.globals and self.rng.random() < 0.3:
                # may spin forever: the body never writes the guard variable
                g = self.rng.choice(self.globals)
                saved = self.globals
                self.globals = [x for x in saved if x != g]
                body = self.block(set(defined), self.rng.randint(0, 2))
                self.globals = saved
                body = [s for s in body if g not in _targets(s)]
                return [While(BinOp("==", Var(g), IntLit(0)), _seq(body))]
            k = f"k{self.counters}"
            self.budget -= 1
            inner = set(defined) | {k}
            bound = self.rng.choice([IntLit(2), IntLit(3)] + [Var(x) for x in sorted(defined) if x in self.globals])
            saved = self.globals
            if isinstance(bound, Var):
                self.globals = [x for x in saved if x != bound.name]
            body = self.block(inner, self.rng.randint(1, 2))
            self.globals = saved
            body.append(Assign(k, BinOp("+", Var(k), IntLit(1))))
            defined.add(k)
            return [Assign(k, IntLit(0)), While(BinOp("<", Var(k), bound), _seq(body))]
        finally:
            self.loop_depth -= 1


def _targets(s) -> Set[str]:
    return set(targets_of(s))


def _seq(stmts):
    if not stmts:
        return Pass()
    return stmts[0] if len(stmts) == 1 else Seq(tuple(stmts))


def random_program(rng: random.Random, cfg: Optional[GenConfig] = None) -> Program:
    cfg = cfg or GenConfig()
    g = _Gen(rng, cfg)
    defined = set(g.globals)
    body = g.block(defined, cfg.max_stmts)
    return Program(tuple(body or [Pass()]), {})


def random_policy(rng: random.Random, prog: Program, levels=("L", "M", "H", "T")) -> dict:
    """Labels for the generated globals that actually occur in ``prog``."""
    used = vars_of(prog)
    return {
        "principals": PRINCIPALS,
        "executor": "S",
        "clearance": LEVELS["T"],
        "globals": {x: LEVELS[rng.choice(levels)] for x in sorted(used) if x.startswith("g")},
    }


def random_case(seed: int, cfg: Optional[GenConfig] = None):
    rng = random.Random(seed)
    cfg = cfg or GenConfig(n_globals=rng.randint(1, 4), n_locals=rng.randint(1, 3))
    prog = random_program(rng, cfg)
    spec = policy_from_dict(random_policy(rng, prog))
    return prog, spec
