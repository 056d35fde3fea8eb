"""Recursive-descent parser for PyX.

Besides building the tree, the parser enforces the language restrictions:
functions are defined at top level before use, are not recursive, take
variables as arguments, and end with at most one ``return``; ``downgrade``
appears only as the operand of such a ``return``.
"""

from __future__ import annotations

from typing import Dict, List, Optional

from .lexer import PyxSyntaxError, Token, tokenize
from .syntax import (
    Assign, BinOp, BoolLit, Call, CallStmt, Expr, FuncDef, If, IntLit, Pass,
    Program, Return, ReturnDowngrade, Seq, Stmt, StrLit, UnOp, Var, While,
)

COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")


class ParseError(PyxSyntaxError):
    pass


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0
        self.functions: Dict[str, FuncDef] = {}
        self.current_function: Optional[str] = None
        self.depth = 0  # block nesting inside the current scope

    # token helpers

    def peek(self, offset: int = 0) -> Optional[Token]:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, *kinds: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind in kinds

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, kind: str, what: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            raise self.error(f"expected {what or repr(kind)}")
        self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            return ParseError(message + " (at end of input)", last.line if last else 0, 0)
        found = tok.kind if tok.kind not in ("NAME", "INT", "STRING") else repr(tok.value)
        return ParseError(f"{message}, found {found}", tok.line, tok.col)

    # statements

    def program(self) -> Program:
        body = []
        while self.peek() is not None:
            if self.at("NEWLINE"):
                self.advance()
                continue
            body.extend(self.statement())
        return Program(tuple(body), dict(self.functions))

    def statement(self) -> List[Stmt]:
        tok = self.peek()
        if tok.kind == "def":
            return [self.funcdef()]
        if tok.kind == "if":
            return [self.if_stmt()]
        if tok.kind == "while":
            return [self.while_stmt()]
        if tok.kind in ("INDENT", "DEDENT"):
            raise self.error("unexpected indentation")
        return self.simple_statements()

    def simple_statements(self) -> List[Stmt]:
        stmts = [self.simple()]
        while self.at(";"):
            self.advance()
            if self.at("NEWLINE"):
                break
            stmts.append(self.simple())
        self.expect("NEWLINE", "end of line")
        return stmts

    def simple(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "pass":
            self.advance()
            return Pass(line=tok.line, col=tok.col)
        if tok.kind == "return":
            return self.return_stmt()
        if tok.kind == "downgrade":
            raise self.error("downgrade may only appear as 'return downgrade(...)'")
        if tok.kind == "NAME":
            nxt = self.peek(1)
            if nxt is not None and nxt.kind == "=":
                self.advance()
                self.advance()
                value = self.expr()
                return Assign(tok.value, value, line=tok.line, col=tok.col)
            if nxt is not None and nxt.kind == "(":
                call = self.call(require_result=False)
                return CallStmt(call, line=tok.line, col=tok.col)
        raise self.error("expected a statement")

    def return_stmt(self) -> Stmt:
        tok = self.advance()
        if self.current_function is None:
            raise ParseError("'return' outside a function", tok.line, tok.col)
        if self.at("downgrade"):
            self.advance()
            self.expect("(")
            var = self.expect("NAME", "variable name").value
            self.expect(",")
            self.expect("{")
            principals = []
            while True:
                p = self.advance()
                if p.kind not in ("STRING", "NAME") or not p.value:
                    raise self.error("expected a principal name", p)
                principals.append(p.value)
                if self.at(","):
                    self.advance()
                    continue
                break
            self.expect("}")
            self.expect(")")
            return ReturnDowngrade(var, tuple(sorted(set(principals))), line=tok.line, col=tok.col)
        var = self.expect("NAME", "variable name after 'return'").value
        return Return(var, line=tok.line, col=tok.col)

    def suite(self) -> Stmt:
        if not self.at("NEWLINE"):
            stmts = self.simple_statements()
        else:
            self.advance()
            self.expect("INDENT", "an indented block")
            stmts = []
            self.depth += 1
            while not self.at("DEDENT"):
                if self.peek() is None:
                    raise self.error("unterminated block")
                stmts.extend(self.statement())
            self.depth -= 1
            self.advance()
        return stmts[0] if len(stmts) == 1 else Seq(tuple(stmts), line=stmts[0].line, col=stmts[0].col)

    def if_stmt(self) -> If:
        tok = self.advance()
        cond = self.expr()
        self.expect(":")
        then = self.suite()
        if self.at("elif"):
            orelse = self.if_stmt()
        elif self.at("else"):
            self.advance()
            self.expect(":")
            orelse = self.suite()
        else:
            orelse = Pass(line=tok.line, col=tok.col)
        return If(cond, then, orelse, line=tok.line, col=tok.col)

    def while_stmt(self) -> While:
        tok = self.advance()
        cond = self.expr()
        self.expect(":")
        body = self.suite()
        return While(cond, body, line=tok.line, col=tok.col)

    def funcdef(self) -> FuncDef:
        tok = self.advance()
        if self.current_function is not None or self.depth:
            raise ParseError("function definitions are only allowed at top level", tok.line, tok.col)
        name_tok = self.expect("NAME", "function name")
        name = name_tok.value
        if name in self.functions:
            raise ParseError(f"duplicate function {name!r}", name_tok.line, name_tok.col)
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                p = self.expect("NAME", "parameter name")
                if p.value in params:
                    raise ParseError(f"duplicate parameter {p.value!r}", p.line, p.col)
                params.append(p.value)
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        self.expect(":")
        self.current_function = name
        try:
            body = self.suite()
        finally:
            self.current_function = None
        _check_single_exit_return(body, name)
        fdef = FuncDef(name, tuple(params), body, line=tok.line, col=tok.col)
        self.functions[name] = fdef
        return fdef

    # expressions

    def expr(self) -> Expr:
        return self.or_expr()

    def or_expr(self) -> Expr:
        left = self.and_expr()
        while self.at("or"):
            tok = self.advance()
            left = BinOp("or", left, self.and_expr(), line=tok.line, col=tok.col)
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self.at("and"):
            tok = self.advance()
            left = BinOp("and", left, self.not_expr(), line=tok.line, col=tok.col)
        return left

    def not_expr(self) -> Expr:
        if self.at("not"):
            tok = self.advance()
            return UnOp("not", self.not_expr(), line=tok.line, col=tok.col)
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.arith()
        if self.at(*COMPARISONS):
            tok = self.advance()
            left = BinOp(tok.kind, left, self.arith(), line=tok.line, col=tok.col)
            if self.at(*COMPARISONS):
                raise self.error("chained comparisons are not supported")
        return left

    def arith(self) -> Expr:
        left = self.term()
        while self.at("+", "-"):
            tok = self.advance()
            left = BinOp(tok.kind, left, self.term(), line=tok.line, col=tok.col)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.at("*", "/", "%"):
            tok = self.advance()
            left = BinOp(tok.kind, left, self.unary(), line=tok.line, col=tok.col)
        return left

    def unary(self) -> Expr:
        if self.at("-"):
            tok = self.advance()
            return UnOp("-", self.unary(), line=tok.line, col=tok.col)
        return self.atom()

    def atom(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise self.error("expected an expression")
        if tok.kind == "INT":
            self.advance()
            return IntLit(tok.value, line=tok.line, col=tok.col)
        if tok.kind == "STRING":
            self.advance()
            return StrLit(tok.value, line=tok.line, col=tok.col)
        if tok.kind in ("True", "False"):
            self.advance()
            return BoolLit(tok.kind == "True", line=tok.line, col=tok.col)
        if tok.kind == "NAME":
            nxt = self.peek(1)
            if nxt is not None and nxt.kind == "(":
                return self.call(require_result=True)
            self.advance()
            return Var(tok.value, line=tok.line, col=tok.col)
        if tok.kind == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.kind == "downgrade":
            raise self.error("downgrade may only appear as 'return downgrade(...)'")
        raise self.error("expected an expression")

    def call(self, require_result: bool) -> Call:
        tok = self.advance()
        name = tok.value
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                a = self.peek()
                if a is None or a.kind != "NAME" or (self.peek(1) is not None and self.peek(1).kind == "("):
                    raise self.error("function arguments must be variable names")
                self.advance()
                args.append(a.value)
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        if name == self.current_function:
            raise ParseError(f"recursive call to {name!r} is not allowed", tok.line, tok.col)
        fdef = self.functions.get(name)
        if fdef is None:
            raise ParseError(f"call to undefined function {name!r}", tok.line, tok.col)
        if len(args) != len(fdef.params):
            raise ParseError(
                f"{name}() takes {len(fdef.params)} argument(s) but {len(args)} were given",
                tok.line, tok.col)
        if require_result and fdef.final_return is None:
            raise ParseError(f"{name}() returns no value and cannot be used in an expression",
                             tok.line, tok.col)
        return Call(name, tuple(args), line=tok.line, col=tok.col)


def _check_single_exit_return(body: Stmt, fname: str) -> None:
    stmts = body.body if isinstance(body, Seq) else (body,)
    for i, stmt in enumerate(stmts):
        for ret in _returns_in(stmt):
            if ret is not stmt or i != len(stmts) - 1:
                raise ParseError(f"in {fname}(): 'return' must be the last statement of the function",
                                 ret.line, ret.col)


def _returns_in(stmt: Stmt):
    if isinstance(stmt, (Return, ReturnDowngrade)):
        yield stmt
    elif isinstance(stmt, Seq):
        for s in stmt.body:
            yield from _returns_in(s)
    elif isinstance(stmt, If):
        yield from _returns_in(stmt.then)
        yield from _returns_in(stmt.orelse)
    elif isinstance(stmt, While):
        yield from _returns_in(stmt.body)


def parse(tokens) -> Program:
    """Parse a token list (or raw source text) into a Program."""
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    return _Parser(list(tokens)).program()


def parse_source(source: str) -> Program:
    return parse(tokenize(source))
