from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import LexError
from .syntax import Span

KEYWORDS = frozenset({
    "procedure", "returns", "requires", "ensures", "modifies", "var",
    "function", "axiom", "assert", "assume", "havoc", "call", "if", "else",
    "while", "invariant", "forall", "exists", "true", "false", "int", "bool",
    "array", "store",
})

# longest operators first
SYMBOLS = (
    "==>", "::", ":=", "==", "!=", "<=", ">=", "&&", "||",
    "<", ">", "+", "-", "*", "/", "!", "(", ")", "[", "]", "{", "}",
    ",", ";", ":",
)

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>//[^\n]*)"
    r"|(?P<num>[0-9]+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in SYMBOLS) + ")"
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "kw", "sym", "eof"
    text: str
    span: Span


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise LexError(f"unexpected character {source[pos]!r}",
                           Span(line, pos - line_start + 1))
        kind, text = m.lastgroup, m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("num", "ident", "sym"):
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            span = Span(line, col, line, col + len(text))
            tokens.append(Token(kind, text, span))
        pos = m.end()
    tokens.append(Token("eof", "", Span(line, pos - line_start + 1)))
    return tokens
