"""The labelling engine.

Walks a parsed program under a policy, keeping one :class:`AnalysisEnv` per
scope.  Globals keep their policy labels; locals and ``pc`` start at the
executor's bottom label and only ever climb.  Every stored label is stamped
with the executor of the scope that computed it.
"""

from __future__ import annotations

import dataclasses
from typing import List, Optional, Tuple

from .labels import Label
from .policy import (
    AnalysisEnv, ProgramSpec, PolicyError, check_initial_environment, check_sources,
    uncut_functions,
)
from .report import (
    AnalysisInputError, AnalysisReport, Diagnostic, FixpointError,
    LoopRecord, Misuse, TraceEvent, Verdict,
)
from .syntax import (
    Assign, BinOp, BoolLit, Call, CallStmt, FuncDef, If, IntLit, Pass, Program,
    Return, ReturnDowngrade, Seq, StrLit, UnOp, Var, While,
)
from .varsets import calls_in, sources_of, targets_of, vars_of


def loop_cap(env: AnalysisEnv) -> int:
    return max(3, len(env.locals) + 2)


class Analyzer:
    """One analysis run.  Not reusable across programs; not thread-safe."""

    def __init__(self, spec: ProgramSpec, prog: Program, keep_going: bool = False, trace: bool = False):
        try:
            spec.validate_against(prog)
        except PolicyError as exc:
            raise AnalysisInputError(str(exc)) from None
        self.spec = spec
        self.prog = prog
        self.functions = prog.functions
        self.keep_going = keep_going
        self.diagnostics: List[Diagnostic] = []
        self._seen = set()
        self.loops: List[LoopRecord] = []
        self.trace: Optional[List[TraceEvent]] = [] if trace else None
        self._loop_stack: List[int] = []
        self._call_stack: List[str] = []
        self.top: Optional[AnalysisEnv] = None

    # bookkeeping

    def fail(self, diag: Diagnostic) -> None:
        """Record a failed premise; raise unless running in keep-going mode."""
        if self._loop_stack and diag.loop_pass is None:
            diag = dataclasses.replace(diag, loop_pass=self._loop_stack[-1])
        if diag.key not in self._seen:
            self._seen.add(diag.key)
            self.diagnostics.append(diag)
        if not self.keep_going:
            raise Misuse(diag)

    def emit(self, env: AnalysisEnv, node, kind: str, changed=()) -> None:
        if self.trace is None:
            return
        self.trace.append(TraceEvent(env.scope, getattr(node, "line", 0), kind, env.pc,
                                     tuple(changed),
                                     self._loop_stack[-1] if self._loop_stack else None))

    def _global_targets(self, node, env: AnalysisEnv) -> List[Tuple[str, Label]]:
        # direct writes in this scope plus writes made by any callee
        names = set(targets_of(node, {})) & env.globals
        for call in calls_in(node):
            names |= set(targets_of(call, self.functions)) & set(self.spec.globals)
        return [(x, self.spec.globals[x]) for x in sorted(names)]

    # expressions

    def label_expr(self, e, env: AnalysisEnv) -> Label:
        if isinstance(e, (IntLit, BoolLit, StrLit)):
            return env.universe.bottom()
        if isinstance(e, Var):
            try:
                return env.lookup(e.name)
            except KeyError:
                raise AnalysisInputError(f"line {e.line}: unbound variable {e.name!r}") from None
        if isinstance(e, BinOp):
            return self.label_expr(e.left, env).join(self.label_expr(e.right, env))
        if isinstance(e, UnOp):
            return self.label_expr(e.operand, env).join(env.universe.bottom())
        if isinstance(e, Call):
            result = self.analyze_call(e, env)
            return result if result is not None else env.universe.bottom()
        raise AnalysisInputError(f"not an expression: {e!r}")

    # statements

    def analyze(self, s, env: AnalysisEnv) -> None:
        if isinstance(s, Pass):
            self.emit(env, s, "pass")
        elif isinstance(s, Assign):
            self.analyze_assign(s, env)
        elif isinstance(s, Seq):
            self.analyze_seq(s.body, env)
        elif isinstance(s, If):
            self.analyze_if(s, env)
        elif isinstance(s, While):
            self.analyze_while(s, env)
        elif isinstance(s, CallStmt):
            self.analyze_call(s.call, env)
            self.emit(env, s, "call")
        elif isinstance(s, FuncDef):
            pass  # bodies are analyzed at each call site
        elif isinstance(s, (Return, ReturnDowngrade)):
            raise AnalysisInputError(f"line {s.line}: return outside a function")
        else:
            raise AnalysisInputError(f"not a statement: {s!r}")

    def analyze_seq(self, stmts, env: AnalysisEnv) -> None:
        for s in stmts:
            self.analyze(s, env)

    def analyze_assign(self, s: Assign, env: AnalysisEnv) -> None:
        l = self.label_expr(s.value, env)
        l1 = l.join(env.pc)
        env.pc = env.stamp(l1)
        if s.target in env.locals:
            env.labels[s.target] = env.stamp(l1.join(env.labels[s.target]))
            self.emit(env, s, "assign", [(s.target, env.labels[s.target])])
            return
        target = env.lookup(s.target)
        if not l1.leq(target):
            self.fail(Diagnostic(
                "ASSIGN", f"flow into global {s.target} is not permitted",
                s.line, s.col, env.scope, s.target, l1, target, env.pc))
        self.emit(env, s, "assign")

    def analyze_if(self, s: If, env: AnalysisEnv) -> None:
        l = self.label_expr(s.cond, env)
        guard = l.join(env.pc).join(env.clearance)
        for name, target in self._global_targets(s, env):
            if not guard.leq(target):
                self.fail(Diagnostic(
                    "IF", f"branch on this guard writes global {name}",
                    s.line, s.col, env.scope, name, guard, target, env.pc, env.clearance))
        env.raise_pc(l)
        changed = []
        for name in sorted(set(targets_of(s, {})) & env.locals):
            env.labels[name] = env.stamp(env.labels[name].join(l))
            changed.append((name, env.labels[name]))
        self.emit(env, s, "if", changed)
        before = dict(env.labels)
        then_env = env.copy()
        self.analyze(s.then, then_env)
        else_env = env.copy()
        self.analyze(s.orelse, else_env)
        env.merge(then_env, else_env)
        self.emit(env, s, "endif", [(k, env.labels[k]) for k in sorted(env.locals)
                                    if env.labels[k] != before[k]])

    def analyze_while(self, s: While, env: AnalysisEnv) -> None:
        cap = loop_cap(env)
        targets = self._global_targets(s.body, env)
        nested = bool(self._loop_stack)
        self._loop_stack.append(0)
        try:
            for n in range(1, cap + 1):
                self._loop_stack[-1] = n
                l1 = self.label_expr(s.cond, env).join(env.pc)
                for name, target in targets:
                    if not l1.leq(target):
                        self.fail(Diagnostic(
                            "WHILE", f"loop on this guard writes global {name}",
                            s.line, s.col, env.scope, name, l1, target, env.pc, loop_pass=n))
                env.pc = env.stamp(l1)
                self.emit(env, s, "while")
                before = env.state()
                self.analyze(s.body, env)
                if env.state() == before:
                    self.loops.append(LoopRecord(env.scope, s.line, n, nested))
                    return
        finally:
            self._loop_stack.pop()
        raise FixpointError(f"line {s.line}: loop labels did not stabilize within {cap} passes")

    # functions

    def analyze_call(self, call: Call, env: AnalysisEnv) -> Optional[Label]:
        fdef = self.functions.get(call.name)
        if fdef is None:
            raise AnalysisInputError(f"line {call.line}: call to undefined function {call.name!r}")
        if len(fdef.params) != len(call.args):
            raise AnalysisInputError(f"line {call.line}: arity mismatch calling {call.name}()")
        if call.name in self._call_stack:
            raise AnalysisInputError(f"line {call.line}: recursive call to {call.name}()")

        # the calling context must be allowed to influence every global the callee writes
        for name, target in self._global_targets(call, env):
            if not env.pc.leq(target):
                self.fail(Diagnostic(
                    "CALL", f"{call.name}() writes global {name} under a higher pc",
                    call.line, call.col, env.scope, name, env.pc, target, env.pc))

        arg_labels = []
        for a in call.args:
            lab = self.label_expr(Var(a, line=call.line, col=call.col), env)
            arg_labels.append(lab)
            env.raise_pc(lab)

        policy = self.spec.functions.get(call.name)
        executor = policy.executor if policy else env.executor
        clearance = policy.clearance if policy else env.clearance
        params = set(fdef.params)
        visible_globals = frozenset(set(self.spec.globals) - params)
        if policy is not None:
            srcs = sources_of(fdef.body, uncut_functions(self.spec, self.prog))
            try:
                check_sources(self.spec, executor, clearance, srcs - params, visible_globals, call.name)
            except Misuse as m:
                d = m.diagnostic
                self.fail(Diagnostic(d.rule, d.message, call.line, call.col, call.name,
                                     d.variable, d.source, d.target, None, d.clearance))

        start = env.universe.bottom().with_owner(executor)
        callee_locals = (set(vars_of(fdef.body, {})) | params) - visible_globals
        labels = {x: self.spec.globals[x] for x in visible_globals}
        for x in callee_locals:
            labels[x] = start
        for p, lab in zip(fdef.params, arg_labels):
            labels[p] = lab
        callee = AnalysisEnv(labels, start, visible_globals, frozenset(callee_locals),
                             executor, clearance, call.name)
        self.emit(callee, call, "enter", [(p, labels[p]) for p in fdef.params])

        self._call_stack.append(call.name)
        try:
            body = fdef.body.body if isinstance(fdef.body, Seq) else (fdef.body,)
            ret = None
            for stmt in body:
                if isinstance(stmt, (Return, ReturnDowngrade)):
                    ret = self.analyze_return(stmt, callee, env)
                else:
                    self.analyze(stmt, callee)
        finally:
            self._call_stack.pop()

        env.raise_pc(ret if ret is not None else callee.pc)
        self.emit(env, call, "return", [("return", ret)] if ret is not None else [])
        return ret

    def analyze_return(self, s, callee: AnalysisEnv, caller: AnalysisEnv) -> Label:
        x = s.var
        if x in callee.locals:
            cur = callee.lookup(x)
            l = cur.join(callee.pc).with_owner(cur.owner)
        else:
            l = callee.lookup(x)
            if not callee.pc.leq(l):
                self.fail(Diagnostic(
                    "RETURN", f"returning global {x} under a higher pc",
                    s.line, s.col, callee.scope, x, callee.pc, l, callee.pc))
        if isinstance(s, ReturnDowngrade):
            l = self.analyze_downgrade(s, l, callee)
        if caller.executor not in l.readers:
            hint = "" if isinstance(s, ReturnDowngrade) else "; downgrading is required"
            self.fail(Diagnostic(
                "RETURN", f"caller {caller.executor} is not a reader of the returned {x}{hint}",
                s.line, s.col, callee.scope, x, l, None, callee.pc))
        self.emit(callee, s, "return", [(x, l)])
        return l

    def analyze_downgrade(self, s: ReturnDowngrade, l: Label, env: AnalysisEnv) -> Label:
        p = env.executor

        def bad(msg):
            self.fail(Diagnostic("DOWNGRADE", msg, s.line, s.col, env.scope, s.var, l, None, env.pc))

        for q in s.principals:
            if q not in env.universe:
                bad(f"{q!r} is not a principal")
        if l.owner != p:
            bad(f"{p} does not own the label of {s.var} (owner {l.owner or '-'})")
        sole = l.writers == frozenset({p})
        for q in s.principals:
            if q in env.universe and not sole and q not in l.writers:
                bad(f"{q} never influenced {s.var} and {p} is not its sole writer")
        env.raise_pc(l)
        new_readers = l.readers | frozenset(q for q in s.principals if q in env.universe)
        return Label(p, new_readers, l.writers, env.universe)

    # entry point

    def run(self) -> AnalysisReport:
        try:
            env = check_initial_environment(self.spec, self.prog)
        except Misuse as m:
            self.diagnostics.append(m.diagnostic)
            start = self.spec.universe.bottom().with_owner(self.spec.executor)
            return self._report(Verdict.MISUSE, {}, start)
        self.top = env
        try:
            self.analyze_seq(self.prog.body, env)
        except Misuse:
            pass
        verdict = Verdict.MISUSE if self.diagnostics else Verdict.SECURE
        return self._report(verdict, env.local_labels(), env.pc)

    def _report(self, verdict, labels, pc) -> AnalysisReport:
        return AnalysisReport(verdict, list(self.diagnostics), labels, pc, list(self.loops), self.trace)


def analyze_program(spec: ProgramSpec, prog: Program, keep_going: bool = False,
                    trace: bool = False) -> AnalysisReport:
    """Label ``prog`` under ``spec``; the verdict is MISUSE at the first failed premise."""
    return Analyzer(spec, prog, keep_going=keep_going, trace=trace).run()
