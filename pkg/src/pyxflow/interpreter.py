"""Small-step concrete interpreter for PyX.

The machine state is a stack of frames over one shared storage.  Each frame
owns an environment (name to location, or name to closure) and a work list
of pending statements.  One call to :meth:`Machine.step` fires one rule.

Values are Python ``int``, ``bool`` and ``str``.  Integers are signed 64-bit:
a result outside that range is an ``overflow`` runtime error rather than a
wrap-around.  ``/`` is floor division and ``%`` takes the sign of the
divisor, as in Python.  ``and``/``or`` evaluate both operands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Union

from .syntax import (
    Assign, BinOp, BoolLit, Call, CallStmt, FuncDef, If, IntLit, Pass, Program,
    Return, ReturnDowngrade, Seq, StrLit, UnOp, Var, While,
)

Value = Union[int, bool, str]

DEFAULT_STEP_BUDGET = 10_000
INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1


class PyxRuntimeError(Exception):
    """A stuck configuration: unbound name, ill-typed operand, division by zero."""

    def __init__(self, kind: str, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.kind = kind
        self.message = message
        self.line = line


@dataclass(frozen=True)
class Closure:
    name: str
    params: tuple
    body: object
    env: Mapping[str, object] = field(compare=False, repr=False)


class Store:
    """An environment (name to location) over a storage (location to value)."""

    def __init__(self, phi: Optional[Dict[str, object]] = None, sigma: Optional[Dict[int, Value]] = None):
        self.phi: Dict[str, object] = {} if phi is None else phi
        self.sigma: Dict[int, Value] = {} if sigma is None else sigma

    @classmethod
    def from_values(cls, values: Mapping[str, Value]) -> "Store":
        store = cls()
        for name in sorted(values):
            store.bind(name, values[name])
        return store

    def alloc(self, value: Value) -> int:
        loc = len(self.sigma)
        while loc in self.sigma:
            loc += 1
        self.sigma[loc] = value
        return loc

    def bind(self, name: str, value: Value) -> None:
        self.phi[name] = self.alloc(value)

    def lookup(self, name: str, line: int = 0) -> Value:
        loc = self.phi.get(name)
        if loc is None or isinstance(loc, Closure):
            raise PyxRuntimeError("unbound", f"unbound variable {name!r}", line)
        return self.sigma[loc]

    def assign(self, name: str, value: Value) -> None:
        loc = self.phi.get(name)
        if loc is None or isinstance(loc, Closure):
            self.phi[name] = self.alloc(value)
        else:
            self.sigma[loc] = value

    def values(self) -> Dict[str, Value]:
        """Variable bindings visible in this environment, closures omitted."""
        return {k: self.sigma[v] for k, v in sorted(self.phi.items()) if not isinstance(v, Closure)}

    def __contains__(self, name: str) -> bool:
        return name in self.phi and not isinstance(self.phi[name], Closure)

    def __getitem__(self, name: str) -> Value:
        return self.lookup(name)

    def __eq__(self, other) -> bool:
        return isinstance(other, Store) and self.values() == other.values()

    def __repr__(self) -> str:
        return f"Store({self.values()!r})"


@dataclass(frozen=True)
class Terminated:
    store: Store
    steps: int


@dataclass(frozen=True)
class StepBudgetExhausted:
    store: Store  # top-level bindings when the budget ran out
    steps: int


@dataclass(frozen=True)
class RuntimeFault:
    kind: str
    message: str
    line: int
    store: Store
    steps: int


Outcome = Union[Terminated, StepBudgetExhausted, RuntimeFault]


class _NeedCall(Exception):
    def __init__(self, call: Call):
        self.call = call


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _kind(v) -> str:
    return "bool" if isinstance(v, bool) else "int" if isinstance(v, int) else "str"


def _apply(op: str, a: Value, b: Value, line: int) -> Value:
    if op in ("and", "or"):
        if not (isinstance(a, bool) and isinstance(b, bool)):
            raise PyxRuntimeError("type", f"'{op}' needs booleans", line)
        return (a and b) if op == "and" else (a or b)
    if op in ("==", "!="):
        if _kind(a) != _kind(b):
            raise PyxRuntimeError("type", f"cannot compare {_kind(a)} with {_kind(b)}", line)
        return (a == b) if op == "==" else (a != b)
    if not (_is_int(a) and _is_int(b)):
        raise PyxRuntimeError("type", f"'{op}' needs integers", line)
    if op in ("/", "%") and b == 0:
        raise PyxRuntimeError("zero-division", "division by zero", line)
    result = {
        "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
        "/": lambda: a // b, "%": lambda: a % b,
        "<": lambda: a < b, "<=": lambda: a <= b, ">": lambda: a > b, ">=": lambda: a >= b,
    }[op]()
    return _checked(result, line)


def _checked(v, line: int):
    if _is_int(v) and not INT_MIN <= v <= INT_MAX:
        raise PyxRuntimeError("overflow", "integer overflow", line)
    return v


def _eval(e, store: Store, memo: Optional[dict]) -> Value:
    if isinstance(e, IntLit):
        return _checked(e.value, e.line)
    if isinstance(e, (BoolLit, StrLit)):
        return e.value
    if isinstance(e, Var):
        return store.lookup(e.name, e.line)
    if isinstance(e, BinOp):
        a = _eval(e.left, store, memo)
        b = _eval(e.right, store, memo)
        return _apply(e.op, a, b, e.line)
    if isinstance(e, UnOp):
        v = _eval(e.operand, store, memo)
        if e.op == "not":
            if not isinstance(v, bool):
                raise PyxRuntimeError("type", "'not' needs a boolean", e.line)
            return not v
        if not _is_int(v):
            raise PyxRuntimeError("type", "unary '-' needs an integer", e.line)
        return _checked(-v, e.line)
    if isinstance(e, Call):
        if memo is None or id(e) not in memo:
            raise _NeedCall(e)
        result = memo[id(e)]
        if result is None:
            raise PyxRuntimeError("no-value", f"{e.name}() returned no value", e.line)
        return result
    raise PyxRuntimeError("stuck", f"not an expression: {e!r}")


def eval_expr(store: Store, e) -> Value:
    """Evaluate a call-free expression strictly, left to right."""
    try:
        return _eval(e, store, None)
    except _NeedCall as need:
        raise PyxRuntimeError("stuck", "calls need a running machine", need.call.line) from None


class _Frame:
    __slots__ = ("store", "work", "deliver", "result", "name")

    def __init__(self, store: Store, work: list, deliver, name: str):
        self.store = store
        self.work = work        # pending (node, memo) items; top of stack is the last element
        self.deliver = deliver  # memo dict of the caller item waiting for this call
        self.result: Optional[Value] = None
        self.name = name


class Machine:
    """Configuration of a running program; advance it with :meth:`step`."""

    def __init__(self, prog: Program, initial: Union[Store, Mapping[str, Value], None] = None,
                 trace: Optional[Callable[[int, str, object], None]] = None):
        if initial is None:
            store = Store()
        elif isinstance(initial, Store):
            store = Store(dict(initial.phi), dict(initial.sigma))
        else:
            store = Store.from_values(initial)
        self.sigma = store.sigma
        self.top = store
        self.frames: List[_Frame] = [_Frame(store, [(s, None) for s in reversed(prog.body)], None, "<module>")]
        self.steps = 0
        self.trace = trace

    @property
    def done(self) -> bool:
        return len(self.frames) == 1 and not self.frames[0].work

    def _note(self, rule: str, node) -> None:
        if self.trace is not None:
            self.trace(self.steps, rule, node)

    def step(self) -> None:
        frame = self.frames[-1]
        self.steps += 1
        if not frame.work:
            self.frames.pop()
            if frame.deliver is not None:
                memo, key = frame.deliver
                memo[key] = frame.result
            self._note("RETURN", frame.name)
            return
        node, memo = frame.work.pop()
        store = frame.store
        if isinstance(node, Pass):
            self._note("SKIP", node)
        elif isinstance(node, Seq):
            frame.work.extend((s, None) for s in reversed(node.body))
            self._note("COMPOSE", node)
        elif isinstance(node, Assign):
            memo = {} if memo is None else memo
            if self._evaluate(node, node.value, memo, frame):
                store.assign(node.target, memo["value"])
                self._note("ASSIGN", node)
        elif isinstance(node, If):
            memo = {} if memo is None else memo
            if self._evaluate(node, node.cond, memo, frame):
                cond = memo["value"]
                if not isinstance(cond, bool):
                    raise PyxRuntimeError("type", "guard is not a boolean", node.line)
                frame.work.append((node.then if cond else node.orelse, None))
                self._note("IF-TRUE" if cond else "IF-FALSE", node)
        elif isinstance(node, While):
            unrolled = If(node.cond, Seq((node.body, node), line=node.line), Pass(line=node.line),
                          line=node.line, col=node.col)
            frame.work.append((unrolled, None))
            self._note("WHILE", node)
        elif isinstance(node, FuncDef):
            store.phi[node.name] = Closure(node.name, node.params, node.body, dict(store.phi))
            self._note("FDEF", node)
        elif isinstance(node, CallStmt):
            memo = {} if memo is None else memo
            if id(node.call) in memo:
                self._note("CALL-DONE", node)
            else:
                frame.work.append((node, memo))
                self._enter(node.call, memo, frame)
        elif isinstance(node, (Return, ReturnDowngrade)):
            frame.result = store.lookup(node.var, node.line)
            frame.work.clear()
            self._note("RETURN-VALUE", node)
        else:
            raise PyxRuntimeError("stuck", f"not a statement: {node!r}")

    def _evaluate(self, node, expr, memo: dict, frame: _Frame) -> bool:
        """Evaluate ``expr``; if a call is pending, start it and requeue ``node``."""
        try:
            memo["value"] = _eval(expr, frame.store, memo)
            return True
        except _NeedCall as need:
            frame.work.append((node, memo))
            self._enter(need.call, memo, frame)
            return False

    def _enter(self, call: Call, memo: dict, frame: _Frame) -> None:
        closure = frame.store.phi.get(call.name)
        if not isinstance(closure, Closure):
            raise PyxRuntimeError("unbound", f"undefined function {call.name!r}", call.line)
        if len(closure.params) != len(call.args):
            raise PyxRuntimeError("arity", f"{call.name}() arity mismatch", call.line)
        args = [frame.store.lookup(a, call.line) for a in call.args]
        store = Store(dict(closure.env), self.sigma)
        for p, v in zip(closure.params, args):
            store.phi[p] = store.alloc(v)  # fresh location: call by value
        self.frames.append(_Frame(store, [(closure.body, None)], (memo, id(call)), call.name))
        self._note("FCALL", call)

    def snapshot(self) -> Store:
        return Store(dict(self.top.phi), dict(self.sigma))


def run(prog: Program, initial: Union[Store, Mapping[str, Value], None] = None,
        step_budget: int = DEFAULT_STEP_BUDGET,
        trace: Optional[Callable[[int, str, object], None]] = None) -> Outcome:
    """Run ``prog`` until it finishes, gets stuck, or uses ``step_budget`` steps."""
    if step_budget < 1:
        raise ValueError("step budget must be at least 1")
    m = Machine(prog, initial, trace)
    try:
        while not m.done:
            if m.steps >= step_budget:
                return StepBudgetExhausted(m.snapshot(), m.steps)
            m.step()
    except PyxRuntimeError as exc:
        return RuntimeFault(exc.kind, exc.message, exc.line, m.snapshot(), m.steps)
    return Terminated(m.snapshot(), m.steps)
