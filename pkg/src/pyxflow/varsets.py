"""Syntactic variable sets of PyX nodes.

``vars_of`` collects every identifier, ``sources_of`` the variables that can
be the origin of an explicit or implicit flow, and ``targets_of`` the
variables a command may write.  Calls are transparent: the callee body is
folded in, looked up in ``functions``.  A call whose callee is missing from
``functions`` contributes only its arguments, which lets callers cut the walk
off at chosen functions.
"""

from __future__ import annotations

from typing import Mapping, Optional

from .syntax import (
    Assign, BinOp, BoolLit, Call, CallStmt, FuncDef, If, IntLit, Pass, Program,
    Return, ReturnDowngrade, Seq, StrLit, UnOp, Var, While,
)


def _functions(node, functions):
    if functions is None and isinstance(node, Program):
        return node.functions
    return functions or {}


def vars_of(node, functions: Optional[Mapping[str, FuncDef]] = None) -> frozenset:
    functions = _functions(node, functions)
    out: set = set()
    _vars(node, functions, out, set())
    return frozenset(out)


def _vars(node, functions, out, active):
    if isinstance(node, (IntLit, BoolLit, StrLit, Pass)):
        return
    if isinstance(node, Var):
        out.add(node.name)
    elif isinstance(node, (BinOp,)):
        _vars(node.left, functions, out, active)
        _vars(node.right, functions, out, active)
    elif isinstance(node, UnOp):
        _vars(node.operand, functions, out, active)
    elif isinstance(node, (Call, CallStmt)):
        out.update(node.args)
        fdef = functions.get(node.name)
        if fdef is not None and node.name not in active:
            active.add(node.name)
            _vars(fdef, functions, out, active)
            active.discard(node.name)
    elif isinstance(node, Assign):
        out.add(node.target)
        _vars(node.value, functions, out, active)
    elif isinstance(node, Seq):
        for s in node.body:
            _vars(s, functions, out, active)
    elif isinstance(node, Program):
        for s in node.body:
            _vars(s, functions, out, active)
    elif isinstance(node, If):
        _vars(node.cond, functions, out, active)
        _vars(node.then, functions, out, active)
        _vars(node.orelse, functions, out, active)
    elif isinstance(node, While):
        _vars(node.cond, functions, out, active)
        _vars(node.body, functions, out, active)
    elif isinstance(node, FuncDef):
        out.update(node.params)
        _vars(node.body, functions, out, active)
    elif isinstance(node, (Return, ReturnDowngrade)):
        out.add(node.var)
    else:
        raise TypeError(f"not a PyX node: {node!r}")


def sources_of(node, functions: Optional[Mapping[str, FuncDef]] = None) -> frozenset:
    functions = _functions(node, functions)
    out: set = set()
    _sources(node, functions, out, set())
    return frozenset(out)


def _sources(node, functions, out, active):
    if isinstance(node, (Pass, FuncDef)):
        return
    if isinstance(node, Assign):
        _vars(node.value, functions, out, active)
    elif isinstance(node, (Seq, Program)):
        for s in node.body:
            _sources(s, functions, out, active)
    elif isinstance(node, If):
        _vars(node.cond, functions, out, active)
        _sources(node.then, functions, out, active)
        _sources(node.orelse, functions, out, active)
    elif isinstance(node, While):
        _vars(node.cond, functions, out, active)
        _sources(node.body, functions, out, active)
    elif isinstance(node, CallStmt):
        out.update(node.args)
        fdef = functions.get(node.name)
        if fdef is not None and node.name not in active:
            active.add(node.name)
            _sources(fdef.body, functions, out, active)
            active.discard(node.name)
    elif isinstance(node, (Return, ReturnDowngrade)):
        out.add(node.var)
    else:
        # expressions: everything they mention is read
        _vars(node, functions, out, active)


def targets_of(node, functions: Optional[Mapping[str, FuncDef]] = None) -> frozenset:
    functions = _functions(node, functions)
    out: set = set()
    _targets(node, functions, out, set())
    return frozenset(out)


def _targets(node, functions, out, active):
    if isinstance(node, Assign):
        out.add(node.target)
        _expr_targets(node.value, functions, out, active)
    elif isinstance(node, (Seq, Program)):
        for s in node.body:
            _targets(s, functions, out, active)
    elif isinstance(node, If):
        _expr_targets(node.cond, functions, out, active)
        _targets(node.then, functions, out, active)
        _targets(node.orelse, functions, out, active)
    elif isinstance(node, While):
        _expr_targets(node.cond, functions, out, active)
        _targets(node.body, functions, out, active)
    elif isinstance(node, CallStmt):
        _call_targets(node.call, functions, out, active)
    elif isinstance(node, (Pass, FuncDef, Return, ReturnDowngrade)):
        return
    else:
        _expr_targets(node, functions, out, active)


def _expr_targets(e, functions, out, active):
    # calls nested in expressions write whatever their callee body writes
    if isinstance(e, Call):
        _call_targets(e, functions, out, active)
    elif isinstance(e, BinOp):
        _expr_targets(e.left, functions, out, active)
        _expr_targets(e.right, functions, out, active)
    elif isinstance(e, UnOp):
        _expr_targets(e.operand, functions, out, active)


def _call_targets(call, functions, out, active):
    # parameters are callee locals, so writes to them are invisible to the caller
    fdef = functions.get(call.name)
    if fdef is not None and call.name not in active:
        active.add(call.name)
        inner: set = set()
        _targets(fdef.body, functions, inner, active)
        active.discard(call.name)
        out.update(inner - set(fdef.params))


def calls_in(node):
    """Yield every Call node occurring in ``node`` (not descending into callees)."""
    if isinstance(node, Call):
        yield node
    elif isinstance(node, CallStmt):
        yield node.call
    elif isinstance(node, BinOp):
        yield from calls_in(node.left)
        yield from calls_in(node.right)
    elif isinstance(node, UnOp):
        yield from calls_in(node.operand)
    elif isinstance(node, Assign):
        yield from calls_in(node.value)
    elif isinstance(node, (Seq, Program)):
        for s in node.body:
            yield from calls_in(s)
    elif isinstance(node, If):
        yield from calls_in(node.cond)
        yield from calls_in(node.then)
        yield from calls_in(node.orelse)
    elif isinstance(node, While):
        yield from calls_in(node.cond)
        yield from calls_in(node.body)
