"""Indentation-aware tokenizer for PyX source.

Emits ``NEWLINE`` at the end of every logical line and ``INDENT``/``DEDENT``
tokens when the leading whitespace changes, in the manner of Python's own
tokenizer.  Blank lines and ``#`` comments are dropped.  Newlines inside
brackets do not end a logical line.
"""

from __future__ import annotations

import re
from typing import Iterator, List, NamedTuple

KEYWORDS = frozenset({
    "pass", "if", "elif", "else", "while", "def", "return", "downgrade",
    "True", "False", "and", "or", "not",
})

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#[^\n]*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<str>'(?:[^'\\\n]|\\.)*'|"(?:[^"\\\n]|\\.)*")
  | (?P<op>==|!=|<=|>=|[<>+\-*/%=(){},:;])
""", re.VERBOSE)


class Token(NamedTuple):
    kind: str    # NAME, INT, STRING, NEWLINE, INDENT, DEDENT, or the keyword/operator text
    value: object
    line: int
    col: int

    def __repr__(self) -> str:
        if self.kind in ("NAME", "INT", "STRING"):
            return f"{self.kind} {self.value!r}"
        return self.kind


class PyxSyntaxError(Exception):
    """Lexical or grammatical error in PyX source."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}" + (f", column {col}" if col else "")
        super().__init__(f"{where}: {message}")


class LexError(PyxSyntaxError):
    pass


_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"'}


def _unquote(text: str) -> str:
    body = text[1:-1]
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), "\\" + m.group(1)), body)


def tokenize(source: str) -> List[Token]:
    return list(iter_tokens(source))


def iter_tokens(source: str) -> Iterator[Token]:
    indents = [""]
    depth = 0  # bracket nesting
    at_line_start = True
    lines = source.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        if at_line_start:
            stripped = raw.lstrip(" \t")
            if not stripped or stripped.startswith("#"):
                continue
            prefix = raw[: len(raw) - len(stripped)]
            if " " in prefix and "\t" in prefix:
                raise LexError("tabs and spaces mixed in indentation", lineno, 1)
            current = indents[-1]
            if prefix != current:
                if prefix.startswith(current):
                    indents.append(prefix)
                    yield Token("INDENT", prefix, lineno, 1)
                else:
                    while indents[-1] != prefix:
                        if not indents[-1].startswith(prefix) or len(indents) == 1:
                            raise LexError("dedent does not match any outer indentation level", lineno, 1)
                        indents.pop()
                        yield Token("DEDENT", "", lineno, 1)
            pos = len(prefix)
        else:
            pos = 0
        at_line_start = True
        while pos < len(raw):
            m = _TOKEN_RE.match(raw, pos)
            if m is None:
                raise LexError(f"unexpected character {raw[pos]!r}", lineno, pos + 1)
            kind = m.lastgroup
            text = m.group()
            col = pos + 1
            pos = m.end()
            if kind in ("ws", "comment"):
                continue
            if kind == "name":
                yield Token(text if text in KEYWORDS else "NAME", text, lineno, col)
            elif kind == "int":
                yield Token("INT", int(text), lineno, col)
            elif kind == "str":
                yield Token("STRING", _unquote(text), lineno, col)
            else:
                if text in "({":
                    depth += 1
                elif text in ")}":
                    depth = max(0, depth - 1)
                yield Token(text, text, lineno, col)
        if depth:
            at_line_start = False
            continue
        yield Token("NEWLINE", "\n", lineno, len(raw) + 1)
    if depth:
        raise LexError("unclosed bracket at end of input", len(lines), 1)
    for _ in indents[1:]:
        yield Token("DEDENT", "", len(lines) + 1, 1)
