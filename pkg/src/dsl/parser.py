"""系数表达式的词法与语法分析 (优先级爬升)"""

import math
import re
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Tuple

from .ast import (
    FUNCTIONS,
    UNARY_FUNCTIONS,
    VARIABLES,
    Binary,
    Call,
    Expr,
    Imag,
    MatrixLit,
    Num,
    Unary,
    Var,
    VectorLit,
    rank,
)
from ..utils.exceptions import DslSyntaxError, UnknownIdent

# 按结合力从弱到强; 一元负号位于 * / 与 ^ 之间
BINARY_OPERATORS = {
    "+": (1, "left"),
    "-": (1, "left"),
    "*": (2, "left"),
    "/": (2, "left"),
    "^": (4, "right"),
}
UNARY_PRECEDENCE = 3

_NUMBER = re.compile(r"(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_MINUS_SIGNS = {"-", "−"}
_ATOM_START = frozenset({"number", "identifier", "(", "[", "-"})


@dataclass(frozen=True)
class Token:
    kind: str  # num, imag, ident, op, punct, eof
    text: str
    line: int
    col: int
    value: float = 0.0


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    idx, line, col = 0, 1, 1
    while idx < len(text):
        c = text[idx]
        if c == "\n":
            idx, line, col = idx + 1, line + 1, 1
            continue
        if c.isspace():
            idx, col = idx + 1, col + 1
            continue

        m = _NUMBER.match(text, idx)
        if m:
            raw = m.group(0)
            value = float(raw)
            if not math.isfinite(value):
                raise DslSyntaxError(line, col, {"finite number"}, raw)
            end = m.end()
            ident_after = _IDENT.match(text, end)
            if ident_after and ident_after.group(0) == "i":
                tokens.append(Token("imag", raw + "i", line, col, value))
                end += 1
            else:
                tokens.append(Token("num", raw, line, col, value))
            col += end - idx
            idx = end
            continue

        m = _IDENT.match(text, idx)
        if m:
            tokens.append(Token("ident", m.group(0), line, col))
            col += m.end() - idx
            idx = m.end()
            continue

        if c in _MINUS_SIGNS:
            tokens.append(Token("op", "-", line, col))
        elif c in "+*/^":
            tokens.append(Token("op", c, line, col))
        elif c in "()[],":
            tokens.append(Token("punct", c, line, col))
        else:
            raise DslSyntaxError(line, col, _ATOM_START | {"operator"}, c)
        idx, col = idx + 1, col + 1

    tokens.append(Token("eof", "", line, col))
    return tokens


class Parser:
    """把 token 序列解析成 Expr"""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    def peek(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def error(self, expected: FrozenSet[str], tok: Optional[Token] = None) -> DslSyntaxError:
        tok = tok or self.peek()
        found = tok.text if tok.kind != "eof" else "end of input"
        return DslSyntaxError(tok.line, tok.col, expected, found)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind in ("num", "imag", "ident", "eof"):
            raise self.error(frozenset({text}))
        return self.advance()

    def parse(self) -> Expr:
        node = self.parse_top()
        if self.peek().kind != "eof":
            raise self.error(frozenset(BINARY_OPERATORS) | {"end of input"})
        return node

    def parse_top(self) -> Expr:
        """顶层允许向量/矩阵字面量"""
        if self.peek().text == "[":
            return self.parse_literal()
        return self.parse_expression(1)

    def parse_literal(self) -> Expr:
        open_tok = self.expect("[")
        items: List[Expr] = [self.parse_top()]
        while self.peek().text == ",":
            self.advance()
            items.append(self.parse_top())
        self.expect("]")
        pos = (open_tok.line, open_tok.col)

        ranks = {rank(item) for item in items}
        if ranks == {0}:
            return VectorLit(tuple(items), pos)
        if ranks == {1}:
            rows = tuple(item.items for item in items)  # type: ignore[union-attr]
            if len({len(r) for r in rows}) != 1:
                raise DslSyntaxError(pos[0], pos[1], {"rows of equal length"}, "[")
            return MatrixLit(rows, pos)
        raise DslSyntaxError(pos[0], pos[1], {"scalar entries"}, "[")

    def parse_expression(self, min_prec: int) -> Expr:
        left = self.parse_prefix()
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in BINARY_OPERATORS:
                return left
            prec, assoc = BINARY_OPERATORS[tok.text]
            if prec < min_prec:
                return left
            self.advance()
            next_min = prec + 1 if assoc == "left" else prec
            right = self.parse_expression(next_min)
            left = Binary(tok.text, left, right, (tok.line, tok.col))

    def parse_prefix(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            operand = self.parse_expression(UNARY_PRECEDENCE)
            return Unary("-", operand, (tok.line, tok.col))
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        tok = self.peek()
        pos = (tok.line, tok.col)
        if tok.kind == "num":
            self.advance()
            return Num(tok.value, pos)
        if tok.kind == "imag":
            self.advance()
            return Imag(tok.value, pos)
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if name == "i":
                return Imag(1.0, pos)
            if name in FUNCTIONS:
                return self.parse_call(name, pos)
            if name in VARIABLES:
                return Var(name, pos)
            raise UnknownIdent(name, tok.line, tok.col)
        if tok.text == "(" and tok.kind == "punct":
            self.advance()
            node = self.parse_expression(1)
            self.expect(")")
            return node
        raise self.error(_ATOM_START)

    def parse_call(self, name: str, pos: Tuple[int, int]) -> Expr:
        if self.peek().text != "(":
            raise self.error(frozenset({"("}))
        self.advance()
        args: List[Expr] = [self.parse_expression(1)]
        while self.peek().text == ",":
            self.advance()
            args.append(self.parse_expression(1))
        close = self.peek()
        self.expect(")")
        if name in UNARY_FUNCTIONS and len(args) != 1:
            raise DslSyntaxError(close.line, close.col, {f"{name} takes 1 argument"}, ")")
        if name not in UNARY_FUNCTIONS and len(args) < 2:
            raise DslSyntaxError(close.line, close.col, {f"{name} takes at least 2 arguments"}, ")")
        return Call(name, tuple(args), pos)


def parse_expr(text: str) -> Expr:
    """解析系数表达式

    Raises:
        DslSyntaxError: 带行列号与期望集合
        UnknownIdent: 未知标识符
    """
    return Parser(text).parse()
