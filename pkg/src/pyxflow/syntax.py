"""Abstract syntax for PyX programs.

Nodes are frozen dataclasses.  Source positions are carried on every node but
excluded from equality, so a pretty-printed and re-parsed program compares
equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union


def _loc():
    return field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class IntLit:
    value: int
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class StrLit:
    value: str
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class Var:
    name: str
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class UnOp:
    op: str  # "-" or "not"
    operand: "Expr"
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple[str, ...]
    line: int = _loc()
    col: int = _loc()


Expr = Union[IntLit, BoolLit, StrLit, Var, BinOp, UnOp, Call]


@dataclass(frozen=True)
class Pass:
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class Seq:
    body: Tuple["Stmt", ...]
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: "Stmt"
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Stmt"
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class FuncDef:
    name: str
    params: Tuple[str, ...]
    body: "Stmt"
    line: int = _loc()
    col: int = _loc()

    @property
    def final_return(self) -> Optional[Union["Return", "ReturnDowngrade"]]:
        last = self.body.body[-1] if isinstance(self.body, Seq) else self.body
        if isinstance(last, (Return, ReturnDowngrade)):
            return last
        return None


@dataclass(frozen=True)
class CallStmt:
    call: Call
    line: int = _loc()
    col: int = _loc()

    @property
    def name(self) -> str:
        return self.call.name

    @property
    def args(self) -> Tuple[str, ...]:
        return self.call.args


@dataclass(frozen=True)
class Return:
    var: str
    line: int = _loc()
    col: int = _loc()


@dataclass(frozen=True)
class ReturnDowngrade:
    var: str
    principals: Tuple[str, ...]
    line: int = _loc()
    col: int = _loc()


Stmt = Union[Pass, Assign, Seq, If, While, FuncDef, CallStmt, Return, ReturnDowngrade]


@dataclass(frozen=True)
class Program:
    body: Tuple[Stmt, ...]
    functions: Dict[str, FuncDef] = field(default_factory=dict, compare=False, hash=False)

    @property
    def statements(self) -> Tuple[Stmt, ...]:
        """Top-level statements other than function definitions."""
        return tuple(s for s in self.body if not isinstance(s, FuncDef))


# Binding strength of binary operators, loosest first.
PRECEDENCE = {
    "or": 1,
    "and": 2,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
NOT_PRECEDENCE = 3
UNARY_MINUS_PRECEDENCE = 7


def format_expr(e: Expr, parent: int = 0) -> str:
    if isinstance(e, IntLit):
        text = str(e.value)
        return f"({text})" if e.value < 0 else text
    if isinstance(e, BoolLit):
        return "True" if e.value else "False"
    if isinstance(e, StrLit):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({', '.join(e.args)})"
    if isinstance(e, UnOp):
        if e.op == "not":
            prec = NOT_PRECEDENCE
            text = "not " + format_expr(e.operand, prec)
        else:
            prec = UNARY_MINUS_PRECEDENCE
            text = "-" + format_expr(e.operand, prec)
        return f"({text})" if prec <= parent else text
    if isinstance(e, BinOp):
        prec = PRECEDENCE[e.op]
        # comparisons do not chain, so both sides bind tighter
        left_floor = prec if prec == 4 else prec - 1
        text = f"{format_expr(e.left, left_floor)} {e.op} {format_expr(e.right, prec)}"
        return f"({text})" if prec <= parent else text
    raise TypeError(f"not an expression: {e!r}")


def format_stmt(s: Stmt, indent: int = 0, width: int = 4) -> str:
    pad = " " * indent
    if isinstance(s, Seq):
        return "".join(format_stmt(c, indent, width) for c in s.body)
    if isinstance(s, Pass):
        return f"{pad}pass\n"
    if isinstance(s, Assign):
        return f"{pad}{s.target} = {format_expr(s.value)}\n"
    if isinstance(s, CallStmt):
        return f"{pad}{format_expr(s.call)}\n"
    if isinstance(s, Return):
        return f"{pad}return {s.var}\n"
    if isinstance(s, ReturnDowngrade):
        who = ", ".join(repr(p) for p in s.principals)
        return f"{pad}return downgrade({s.var}, {{{who}}})\n"
    if isinstance(s, If):
        out = f"{pad}if {format_expr(s.cond)}:\n" + format_stmt(s.then, indent + width, width)
        if not isinstance(s.orelse, Pass):
            out += f"{pad}else:\n" + format_stmt(s.orelse, indent + width, width)
        return out
    if isinstance(s, While):
        return f"{pad}while {format_expr(s.cond)}:\n" + format_stmt(s.body, indent + width, width)
    if isinstance(s, FuncDef):
        return f"{pad}def {s.name}({', '.join(s.params)}):\n" + format_stmt(s.body, indent + width, width)
    raise TypeError(f"not a statement: {s!r}")


def format_program(prog: Program) -> str:
    return "".join(format_stmt(s) for s in prog.body)


def location(node) -> str:
    return f"{node.line}:{node.col}"
