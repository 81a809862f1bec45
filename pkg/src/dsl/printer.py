"""规范化打印: 全括号形式，parse(to_text(ast)) == ast"""

from .ast import Binary, Call, Expr, Imag, MatrixLit, Num, Unary, Var, VectorLit


def to_text(node: Expr) -> str:
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Imag):
        return f"{float(node.value)!r}i"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, VectorLit):
        return "[" + ", ".join(to_text(a) for a in node.items) + "]"
    if isinstance(node, MatrixLit):
        rows = ("[" + ", ".join(to_text(a) for a in row) + "]" for row in node.rows)
        return "[" + ", ".join(rows) + "]"
    raise TypeError(f"未知节点类型: {type(node).__name__}")
