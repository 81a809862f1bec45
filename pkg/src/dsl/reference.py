"""独立的逐点参考求值器 (直接对文本递归下降，cmath 标量运算)

与 Parser/Evaluator 不共享代码，用于差分测试。
"""

import cmath
import math
import re
from typing import Callable, Dict, List

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z_0-9]))?"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<sym>[-−+*/^(),]))"
)

_FUNCS: Dict[str, Callable[[complex], complex]] = {
    "exp": cmath.exp,
    "sin": cmath.sin,
    "cos": cmath.cos,
    "sqrt": cmath.sqrt,
    "abs": lambda z: complex(abs(z)),
}


class ReferenceEvaluator:
    def __init__(self, text: str):
        self.items: List[tuple] = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if not m or m.end() == pos:
                raise ValueError(f"无法识别的字符 @ {pos}")
            if m.group("num") is not None:
                value = float(m.group("num"))
                self.items.append(("imag" if m.group("imag") else "num", value))
            elif m.group("name") is not None:
                self.items.append(("name", m.group("name")))
            else:
                sym = m.group("sym")
                self.items.append(("sym", "-" if sym == "−" else sym))
            pos = m.end()
        self.items.append(("end", None))

    def __call__(self, x: float, y: float = 0.0) -> complex:
        self.i = 0
        self.vars = {
            "x": complex(x),
            "y": complex(y),
            "r2": complex(x * x + y * y),
            "pi": complex(math.pi),
            "e": complex(math.e),
        }
        value = self.expr()
        if self.items[self.i][0] != "end":
            raise ValueError("表达式末尾有多余内容")
        return value

    def _peek(self) -> tuple:
        return self.items[self.i]

    def _take(self, sym: str) -> bool:
        if self.items[self.i] == ("sym", sym):
            self.i += 1
            return True
        return False

    def expr(self) -> complex:
        value = self.term()
        while True:
            if self._take("+"):
                value = value + self.term()
            elif self._take("-"):
                value = value - self.term()
            else:
                return value

    def term(self) -> complex:
        value = self.unary()
        while True:
            if self._take("*"):
                value = value * self.unary()
            elif self._take("/"):
                value = value / self.unary()
            else:
                return value

    def unary(self) -> complex:
        if self._take("-"):
            return -self.unary()
        return self.power()

    def power(self) -> complex:
        base = self.atom()
        if self._take("^"):
            return base ** self.unary()
        return base

    def atom(self) -> complex:
        kind, value = self._peek()
        self.i += 1
        if kind == "num":
            return complex(value)
        if kind == "imag":
            return complex(0.0, value)
        if kind == "name":
            if value == "i":
                return 1j
            if value in _FUNCS or value in ("min", "max"):
                if not self._take("("):
                    raise ValueError("函数调用缺少 '('")
                args = [self.expr()]
                while self._take(","):
                    args.append(self.expr())
                if not self._take(")"):
                    raise ValueError("函数调用缺少 ')'")
                if value in _FUNCS:
                    return _FUNCS[value](args[0])
                key = (lambda z: z.real)
                return min(args, key=key) if value == "min" else max(args, key=key)
            return self.vars[value]
        if (kind, value) == ("sym", "("):
            inner = self.expr()
            if not self._take(")"):
                raise ValueError("缺少 ')'")
            return inner
        raise ValueError(f"意外的记号 {value!r}")
