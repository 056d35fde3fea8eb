"""Reference implementations the tests compare the package against.

They share no code with ``pyxflow`` beyond the AST classes: labels are plain
set triples, and programs are run by translating them to Python and calling
``exec``.
"""

from __future__ import annotations

from pyxflow.syntax import (
    Assign, BinOp, BoolLit, Call, CallStmt, FuncDef, If, IntLit, Pass, Program, Return,
    ReturnDowngrade, Seq, StrLit, UnOp, Var, While,
)


# labels as (owner, set of readers, set of writers)

def ref_leq(a, b) -> bool:
    return set(a[1]) >= set(b[1]) and set(a[2]) <= set(b[2])


def ref_join(a, b):
    return (None, set(a[1]) & set(b[1]), set(a[2]) | set(b[2]))


def ref_meet(a, b):
    return (None, set(a[1]) | set(b[1]), set(a[2]) & set(b[2]))


def as_triple(label):
    return (label.owner, set(label.readers), set(label.writers))


# programs

class OutOfFuel(Exception):
    pass


_PY_OPS = {"/": "//"}


def _expr(e) -> str:
    if isinstance(e, (IntLit, BoolLit, StrLit)):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BinOp):
        return f"({_expr(e.left)} {_PY_OPS.get(e.op, e.op)} {_expr(e.right)})"
    if isinstance(e, UnOp):
        return f"({e.op} {_expr(e.operand)})" if e.op == "not" else f"(-{_expr(e.operand)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(e.args)})"
    raise TypeError(e)


def _assigned(s, out):
    if isinstance(s, Assign):
        out.add(s.target)
    elif isinstance(s, Seq):
        for c in s.body:
            _assigned(c, out)
    elif isinstance(s, If):
        _assigned(s.then, out)
        _assigned(s.orelse, out)
    elif isinstance(s, While):
        _assigned(s.body, out)
    return out


def _stmt(s, pad, lines, shared):
    if isinstance(s, Seq):
        for c in s.body:
            _stmt(c, pad, lines, shared)
    elif isinstance(s, Pass):
        lines.append(f"{pad}pass")
    elif isinstance(s, Assign):
        lines.append(f"{pad}{s.target} = {_expr(s.value)}")
    elif isinstance(s, CallStmt):
        lines.append(f"{pad}{_expr(s.call)}")
    elif isinstance(s, (Return, ReturnDowngrade)):
        lines.append(f"{pad}return {s.var}")
    elif isinstance(s, If):
        lines.append(f"{pad}if {_expr(s.cond)}:")
        _stmt(s.then, pad + "    ", lines, shared)
        lines.append(f"{pad}else:")
        _stmt(s.orelse, pad + "    ", lines, shared)
    elif isinstance(s, While):
        lines.append(f"{pad}while {_expr(s.cond)}:")
        lines.append(f"{pad}    _tick()")
        _stmt(s.body, pad + "    ", lines, shared)
    elif isinstance(s, FuncDef):
        lines.append(f"def {s.name}({', '.join(s.params)}):")
        writes = sorted((_assigned(s.body, set()) & shared) - set(s.params))
        if writes:
            lines.append(f"    global {', '.join(writes)}")
        _stmt(s.body, "    ", lines, shared)
        lines.append("    return None")
    else:
        raise TypeError(s)


def to_python(prog: Program, shared) -> str:
    """Python source for ``prog``; names in ``shared`` are module globals."""
    lines = []
    for s in prog.body:
        _stmt(s, "", lines, set(shared))
    return "\n".join(lines) + "\n"


def ref_run(prog: Program, initial, fuel: int = 2000):
    """Final variable values, or ``None`` if some loop iterates more than ``fuel`` times in all."""
    left = [fuel]

    def tick():
        left[0] -= 1
        if left[0] < 0:
            raise OutOfFuel

    env = {"_tick": tick}
    env.update(initial)
    try:
        exec(to_python(prog, initial), env)  # noqa: S102 - test oracle over generated programs
    except OutOfFuel:
        return None
    return {k: v for k, v in env.items()
            if not k.startswith("_") and not callable(v)}
