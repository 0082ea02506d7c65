"""Line-oriented input language.

Every statement sits on one line; ``#`` starts a comment.  Errors carry the
line and column of the offending token.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..algebra import AlgebraError, JetPoly, PatchSplit


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()\[\];=,|])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1, offset: int = 0) -> List[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, offset + pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), line, offset + pos + 1))
        pos = m.end()
    return out


class TokenStream:
    def __init__(self, tokens: List[Token], line: int, end_column: int):
        self.tokens = tokens
        self.i = 0
        self.line = line
        self.end_column = end_column

    def peek(self, k: int = 0) -> Optional[Token]:
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.peek()
        if tok is None:
            return ParseError(message, self.line, self.end_column)
        return ParseError(message, tok.line, tok.column)

    def next(self, what: str = "token") -> Token:
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}, found end of line")
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.i += 1
            return True
        return False

    def word(self, what: str = "word") -> Token:
        """A name possibly joined by hyphens without spaces, e.g. ``omega-r4``."""
        first = self.name(what)
        text, end = first.text, first.column + len(first.text)
        while True:
            a, b = self.peek(), self.peek(1)
            if a is None or b is None or a.text != "-" or a.column != end or b.column != end + 1:
                break
            if b.kind not in ("name", "num"):
                break
            self.i += 2
            text += "-" + b.text
            end = b.column + len(b.text)
        return Token("name", text, first.line, first.column)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            found = "end of line" if tok is None else repr(tok.text)
            raise self.error(f"expected {text!r}, found {found}")
        self.i += 1
        return tok

    def name(self, what: str = "name") -> Token:
        tok = self.next(what)
        if tok.kind != "name":
            raise self.error(f"expected {what}, found {tok.text!r}", tok)
        return tok

    def integer(self, what: str = "integer") -> int:
        neg = self.accept("-")
        tok = self.next(what)
        if tok.kind != "num":
            raise self.error(f"expected {what}, found {tok.text!r}", tok)
        return -int(tok.text) if neg else int(tok.text)

    def finish(self):
        if not self.at_end():
            raise self.error(f"unexpected {self.peek().text!r}")


# rationals and polynomials ---------------------------------------------------

def parse_rational(ts: TokenStream) -> Fraction:
    """``[-]p[/q]``."""
    sign = -1 if ts.accept("-") else 1
    if sign == 1:
        ts.accept("+")
    tok = ts.next("rational")
    if tok.kind != "num":
        raise ts.error(f"expected a rational, found {tok.text!r}", tok)
    num = int(tok.text)
    if ts.peek() is not None and ts.peek().text == "/":
        slash = ts.next()
        den_tok = ts.next("denominator")
        if den_tok.kind != "num":
            raise ts.error(f"expected a denominator, found {den_tok.text!r}", den_tok)
        if int(den_tok.text) == 0:
            raise ParseError("zero denominator", slash.line, slash.column)
        return Fraction(sign * num, int(den_tok.text))
    return Fraction(sign * num)


class PolyParser:
    """Recursive descent: sum of signed products of powers of atoms."""

    def __init__(self, ts: TokenStream, split: PatchSplit, base_only: bool = False):
        self.ts = ts
        self.split = split
        self.base_only = base_only

    def parse(self) -> JetPoly:
        return self.expr()

    def expr(self) -> JetPoly:
        ts = self.ts
        if ts.accept("-"):
            acc = -self.term()
        else:
            ts.accept("+")
            acc = self.term()
        while True:
            if ts.accept("+"):
                acc = acc + self.term()
            elif ts.accept("-"):
                acc = acc - self.term()
            else:
                return acc

    def term(self) -> JetPoly:
        ts = self.ts
        acc = self.power()
        while True:
            tok = ts.peek()
            if tok is not None and tok.text == "*":
                ts.next()
                acc = acc * self.power()
            elif tok is not None and tok.text == "/":
                ts.next()
                den_tok = ts.peek()
                den = self.power()
                if not den.is_constant():
                    raise ts.error("can only divide by a constant", den_tok)
                c = den.constant_term()
                if c == 0:
                    raise ParseError("zero denominator", tok.line, tok.column)
                acc = acc.scale(1 / c)
            else:
                return acc

    def power(self) -> JetPoly:
        base = self.atom()
        if self.ts.peek() is not None and self.ts.peek().text == "^":
            self.ts.next()
            tok = self.ts.peek()
            e = self.ts.integer("exponent")
            if e < 0:
                raise self.ts.error("negative exponent", tok)
            return base ** e
        return base

    def atom(self) -> JetPoly:
        ts = self.ts
        tok = ts.next("polynomial term")
        if tok.kind == "num":
            return JetPoly.const(self.split, int(tok.text))
        if tok.kind == "name":
            if tok.text not in self.split.variables:
                raise ts.error(f"unknown variable {tok.text!r}", tok)
            if self.base_only and self.split.is_fiber(self.split.index(tok.text)):
                raise ts.error(f"fiber variable {tok.text!r} not allowed here", tok)
            return JetPoly.var(self.split, tok.text)
        if tok.text == "(":
            inner = self.expr()
            ts.expect(")")
            return inner
        if tok.text == "-":
            return -self.atom()
        raise ts.error(f"unexpected {tok.text!r} in polynomial", tok)


def parse_poly_tokens(ts: TokenStream, split: PatchSplit, base_only: bool = False) -> JetPoly:
    return PolyParser(ts, split, base_only).parse()


def parse_poly(text: str, split: PatchSplit, base_only: bool = False) -> JetPoly:
    ts = TokenStream(tokenize(text), 1, len(text) + 1)
    p = parse_poly_tokens(ts, split, base_only)
    ts.finish()
    return p


# statements -----------------------------------------------------------------------

DECLARATIONS = ("patch", "metric", "sform", "vform", "nform", "section", "family",
                "point", "frame", "vector", "covector", "map", "load")


@dataclass
class Statement:
    kind: str
    name: Optional[str]
    tokens: List[Token]
    line: int
    text: str


@dataclass
class Document:
    statements: List[Statement] = field(default_factory=list)


def split_lines(text: str):
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            yield n, body


def parse_statements(text: str) -> Document:
    """Tokenize each line; semantic checks happen in :mod:`.document`."""
    doc = Document()
    for n, body in split_lines(text):
        toks = tokenize(body, n)
        ts = TokenStream(toks, n, len(body) + 1)
        head = ts.word("keyword")
        name = None
        if head.text in DECLARATIONS and head.text not in ("patch", "load"):
            name = ts.name(f"{head.text} name").text
        doc.statements.append(Statement(head.text, name, toks, n, body.strip()))
    return doc
