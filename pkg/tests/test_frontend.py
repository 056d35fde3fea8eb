import random

import pytest
from hypothesis import given, settings, strategies as st

from pyxflow import LexError, ParseError, PyxSyntaxError, format_program, parse_source, tokenize
from pyxflow.syntax import (
    Assign, BinOp, BoolLit, Call, CallStmt, FuncDef, If, IntLit, Pass, Return, ReturnDowngrade,
    Seq, StrLit, UnOp, Var, While,
)

from progen import GenConfig, random_program


def kinds(src):
    return [t.kind for t in tokenize(src)]


def test_indentation_tokens():
    src = "while x:\n    y = 1\n    if y:\n        pass\nz = 2\n"
    assert kinds(src) == [
        "while", "NAME", ":", "NEWLINE",
        "INDENT", "NAME", "=", "INT", "NEWLINE",
        "if", "NAME", ":", "NEWLINE",
        "INDENT", "pass", "NEWLINE",
        "DEDENT", "DEDENT", "NAME", "=", "INT", "NEWLINE",
    ]


def test_blank_lines_and_comments_are_dropped():
    assert kinds("# header\n\nx = 1  # trailing\n\n   \n") == ["NAME", "=", "INT", "NEWLINE"]


def test_dedents_are_closed_at_end_of_input():
    assert kinds("if x:\n  if y:\n    pass")[-2:] == ["DEDENT", "DEDENT"]


def test_newlines_inside_brackets_continue_the_line():
    assert kinds("x = (1 +\n     2)\n") == ["NAME", "=", "(", "INT", "+", "INT", ")", "NEWLINE"]


def test_token_values_and_positions():
    toks = tokenize("x = 'a\\'b' + 42\n")
    assert toks[2].value == "a'b" and toks[2].kind == "STRING"
    assert toks[4].value == 42
    assert (toks[4].line, toks[4].col) == (1, 14)


@pytest.mark.parametrize("src", [
    "x = 1 $ 2\n",
    "if x:\n    y = 1\n  z = 2\n",
    "if x:\n \ty = 1\n",
    "x = (1\n",
    "x = 'open\n",
])
def test_lex_errors(src):
    with pytest.raises(LexError):
        tokenize(src)


def test_parse_statement_forms():
    prog = parse_source(
        "def f(a, b):\n"
        "    c = a + b * 2\n"
        "    return c\n"
        "def g(a):\n"
        "    return downgrade(a, {'B', 'A'})\n"
        "def h():\n"
        "    pass\n"
        "x = f(y, z)\n"
        "h()\n"
        "if not x < 3 and y == 'k':\n"
        "    x = -x\n"
        "elif True:\n"
        "    pass\n"
        "else:\n"
        "    x = g(x)\n"
        "while x > 0: x = x - 1; y = y % 2\n"
    )
    f, g, h, assign, call, cond, loop = prog.body
    assert f == FuncDef("f", ("a", "b"), Seq((
        Assign("c", BinOp("+", Var("a"), BinOp("*", Var("b"), IntLit(2)))), Return("c"))))
    assert g.body == ReturnDowngrade("a", ("A", "B"))
    assert h.body == Pass()
    assert assign == Assign("x", Call("f", ("y", "z")))
    assert call == CallStmt(Call("h", ()))
    assert cond.cond == BinOp("and", UnOp("not", BinOp("<", Var("x"), IntLit(3))),
                              BinOp("==", Var("y"), StrLit("k")))
    assert cond.orelse == If(BoolLit(True), Pass(), Assign("x", Call("g", ("x",))))
    assert loop == While(BinOp(">", Var("x"), IntLit(0)), Seq((
        Assign("x", BinOp("-", Var("x"), IntLit(1))), Assign("y", BinOp("%", Var("y"), IntLit(2))))))
    assert set(prog.functions) == {"f", "g", "h"}
    assert prog.statements == (assign, call, cond, loop)


def test_positions_are_recorded():
    prog = parse_source("x = 1\nwhile x:\n    y = x\n")
    assert prog.body[1].line == 2 and prog.body[1].body.line == 3 and prog.body[1].body.col == 5


def test_left_associativity():
    e = parse_source("x = a - b - c\n").body[0].value
    assert e == BinOp("-", BinOp("-", Var("a"), Var("b")), Var("c"))


@pytest.mark.parametrize("src, fragment", [
    ("x = \n", "expected an expression"),
    ("x = downgrade(y, {'A'})\n", "downgrade"),
    ("downgrade(y, {'A'})\n", "downgrade"),
    ("return x\n", "outside a function"),
    ("def f():\n    def g():\n        pass\n", "top level"),
    ("if x:\n    def g():\n        pass\n", "top level"),
    ("def f():\n    pass\ndef f():\n    pass\n", "duplicate function"),
    ("def f(a, a):\n    pass\n", "duplicate parameter"),
    ("def f():\n    x = f()\n    return x\n", "recursive"),
    ("x = f()\n", "undefined function"),
    ("def f(a):\n    return a\nx = f()\n", "argument"),
    ("def f(a):\n    return a\nx = f(1)\n", "variable names"),
    ("def f():\n    pass\nx = f()\n", "returns no value"),
    ("def f(a):\n    return a\n    a = 1\n", "last statement"),
    ("def f(a):\n    if a:\n        return a\n", "last statement"),
    ("x = a < b < c\n", "chained"),
    ("    x = 1\n", "indentation"),
    ("if x:\npass\n", "indented block"),
    ("x = 1 y = 2\n", "end of line"),
])
def test_parse_errors(src, fragment):
    with pytest.raises(PyxSyntaxError) as info:
        parse_source(src)
    assert fragment in str(info.value)
    assert info.value.line >= 1


def test_parse_error_is_a_syntax_error():
    assert issubclass(ParseError, PyxSyntaxError) and issubclass(LexError, PyxSyntaxError)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_format_then_parse_round_trips(seed):
    rng = random.Random(seed)
    prog = random_program(rng, GenConfig(nested=True, max_stmts=10))
    again = parse_source(format_program(prog))
    assert again == prog
    assert format_program(again) == format_program(prog)


def test_corpus_round_trips():
    from pyxflow import golden
    for e in golden.entries():
        prog = e.program()
        assert parse_source(format_program(prog)) == prog, e.name
