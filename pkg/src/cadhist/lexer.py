"""Tokenizer for the design-history text format.

Two dialects share one token stream.  The canonical dialect is the strict
output language: no unit suffixes, no arithmetic.  The raw dialect
additionally accepts unit words (``10 in``, ``0.5 * ft``) and infix
expressions; those are carried through to the model and resolved by
normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import Unit


class Dialect(Enum):
    CANONICAL = "canonical"
    RAW = "raw"


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class TokenKind(Enum):
    IDENT = "ident"
    NUMBER = "number"
    STRING = "string"
    UNIT = "unit"
    PUNCT = "punct"
    OP = "op"
    EOF = "eof"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    column: int
    offset: int


UNIT_SPELLINGS = {
    "mm": Unit.MM,
    "cm": Unit.CM,
    "m": Unit.M,
    "in": Unit.IN,
    "inch": Unit.IN,
    "ft": Unit.FT,
    "deg": Unit.DEG,
    "rad": Unit.RAD,
}

_PUNCT = "()[]{},:;="
_IDENT_START = set("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_")
_IDENT_CONT = _IDENT_START | set("0123456789")
_ESCAPES = {"\\": "\\", '"': '"', "n": "\n"}


def tokenize(text: str, dialect: Dialect = Dialect.CANONICAL) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    line_start = 0
    n = len(text)

    def col(pos: int) -> int:
        return pos - line_start + 1

    def error(msg: str, pos: int) -> ParseError:
        return ParseError(msg, line, col(pos))

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch in " \t\r":
            i += 1
            continue
        if ch == "/" and text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start = i
        if ch in _PUNCT:
            tokens.append(Token(TokenKind.PUNCT, ch, line, col(start), start))
            i += 1
            continue
        if ch in "+-*/":
            if dialect is Dialect.CANONICAL and ch != "-":
                raise error(f"arithmetic operator {ch!r} is not allowed in canonical programs", start)
            tokens.append(Token(TokenKind.OP, ch, line, col(start), start))
            i += 1
            continue
        if ch.isdigit():
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                if i + 1 >= n or not text[i + 1].isdigit():
                    raise error("expected digits after decimal point", i)
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            tokens.append(Token(TokenKind.NUMBER, text[start:i], line, col(start), start))
            continue
        if ch == '"':
            i += 1
            parts: list[str] = []
            while True:
                if i >= n or text[i] == "\n":
                    raise error("unterminated string", start)
                c = text[i]
                if c == '"':
                    i += 1
                    break
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in _ESCAPES:
                        raise error("bad escape in string", i)
                    parts.append(_ESCAPES[text[i + 1]])
                    i += 2
                    continue
                parts.append(c)
                i += 1
            tokens.append(Token(TokenKind.STRING, "".join(parts), line, col(start), start))
            continue
        if ch in _IDENT_START:
            while i < n and text[i] in _IDENT_CONT:
                i += 1
            word = text[start:i]
            if word in UNIT_SPELLINGS:
                if dialect is Dialect.CANONICAL:
                    raise error(f"unit suffix {word!r} is not allowed in canonical programs", start)
                tokens.append(Token(TokenKind.UNIT, word, line, col(start), start))
            else:
                tokens.append(Token(TokenKind.IDENT, word, line, col(start), start))
            continue
        raise error(f"unexpected character {ch!r}", start)

    tokens.append(Token(TokenKind.EOF, "", line, col(i), i))
    return tokens
