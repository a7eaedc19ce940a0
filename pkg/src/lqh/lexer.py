"""Tokenizer.  Tracks 1-based line/column positions; `--` starts a line
comment."""

from __future__ import annotations

from dataclasses import dataclass

from lqh.syntax import Span

SYMBOLS = [
    "::",
    "->",
    "==",
    "<=",
    ">=",
    "&&",
    "||",
    ":",
    "=",
    "<",
    ">",
    "+",
    "-",
    "*",
    "?",
    "|",
    "{",
    "}",
    "[",
    "]",
    "(",
    ")",
    ",",
]

KEYWORDS = {"type", "if", "then", "else", "mod", "not", "true", "false"}


@dataclass(frozen=True)
class Token:
    kind: str  # int | varid | conid | hole | wild | keyword | symbol | eof
    text: str
    span: Span


class LexError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.message = message
        self.span = span


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(source)

    def span_for(text: str) -> Span:
        return Span(line, col, line, col + len(text))

    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("--", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            text = source[i:j]
            tokens.append(Token("int", text, span_for(text)))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] in "_'"):
                j += 1
            text = source[i:j]
            sp = span_for(text)
            if text == "_":
                tokens.append(Token("wild", text, sp))
            elif text.startswith("_"):
                tokens.append(Token("hole", text, sp))
            elif text in KEYWORDS:
                tokens.append(Token("keyword", text, sp))
            elif text[0].isupper():
                tokens.append(Token("conid", text, sp))
            else:
                tokens.append(Token("varid", text, sp))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token("symbol", sym, span_for(sym)))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise LexError(f"unexpected character {c!r}", Span(line, col, line, col + 1))
    tokens.append(Token("eof", "", Span(line, col, line, col)))
    return tokens
