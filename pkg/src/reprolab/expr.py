"""Small arithmetic expression language for group specs and test functions.

Grammar: numbers, the constants ``pi`` and ``e``, declared variables,
``+ - * /``, unary minus, parentheses and the functions exp, cosh, sinh,
cos, sin, sqrt, abs.  Parsing is delegated to :mod:`ast`; only the
whitelisted node types are accepted.
"""

from __future__ import annotations

import ast
from typing import Callable, Iterable

import numpy as np

FUNCTIONS: dict[str, Callable] = {
    "exp": np.exp,
    "cosh": np.cosh,
    "sinh": np.sinh,
    "cos": np.cos,
    "sin": np.sin,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": np.pi, "e": np.e}

_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}


class ExpressionError(ValueError):
    """Syntax or name error in an expression; ``column`` is 1-based."""

    def __init__(self, message: str, column: int | None = None):
        self.column = column
        super().__init__(message if column is None else f"column {column}: {message}")


class Expression:
    """Compiled expression evaluated with numpy broadcasting."""

    def __init__(self, source: str, variables: Iterable[str]):
        self.source = str(source)
        self.variables = tuple(variables)
        try:
            tree = ast.parse(self.source.strip(), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(exc.msg, exc.offset) from None
        self._fn = self._compile(tree.body)

    def __call__(self, **values):
        missing = [v for v in self.variables if v not in values]
        if missing:
            raise ExpressionError(f"missing values for {missing}")
        return self._fn(values)

    def __repr__(self):
        return f"Expression({self.source!r})"

    def _fail(self, node, message):
        raise ExpressionError(message, getattr(node, "col_offset", -1) + 1)

    def _compile(self, node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            c = float(node.value)
            return lambda env: c
        if isinstance(node, ast.Name):
            name = node.id
            if name in self.variables:
                return lambda env: env[name]
            if name in CONSTANTS:
                c = CONSTANTS[name]
                return lambda env: c
            self._fail(node, f"unknown name {name!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op = _BINOPS[type(node.op)]
            left, right = self._compile(node.left), self._compile(node.right)
            return lambda env: op(left(env), right(env))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = self._compile(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda env: -inner(env)
            return inner
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            fn = FUNCTIONS.get(node.func.id)
            if fn is None:
                self._fail(node, f"unknown function {node.func.id!r}")
            if len(node.args) != 1 or node.keywords:
                self._fail(node, f"{node.func.id} takes exactly one argument")
            arg = self._compile(node.args[0])
            return lambda env: fn(arg(env))
        self._fail(node, f"unsupported syntax: {type(node).__name__}")
