"""Affine expressions over the global decision vector.

An expression represents ``linear @ x + constant`` where ``x`` is the
problem's decision vector.  Expressions only store columns up to the last
variable they reference; the compiler zero-pads them to the full decision
dimension, so variables added after an expression was built simply do not
appear in it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class Variable:
    """A contiguous block of the decision vector."""

    offset: int
    size: int

    @property
    def expr(self) -> "Expression":
        """Identity expression selecting this variable's entries."""
        linear = np.zeros((self.size, self.offset + self.size))
        linear[:, self.offset : self.offset + self.size] = np.eye(self.size)
        return Expression(linear, np.zeros(self.size))


class Expression:
    """Affine map ``linear @ x + constant``."""

    __slots__ = ("linear", "constant")

    def __init__(self, linear, constant=None):
        linear = np.atleast_2d(np.asarray(linear, dtype=float))
        if constant is None:
            constant = np.zeros(linear.shape[0])
        constant = np.atleast_1d(np.asarray(constant, dtype=float))
        if constant.ndim != 1 or linear.shape[0] != constant.shape[0]:
            raise DimensionError(
                f"linear has {linear.shape[0]} rows but constant has shape {constant.shape}"
            )
        if not (np.all(np.isfinite(linear)) and np.all(np.isfinite(constant))):
            raise ValueError("expression entries must be finite")
        self.linear = linear
        self.constant = constant

    @property
    def rows(self) -> int:
        return self.linear.shape[0]

    @property
    def cols(self) -> int:
        return self.linear.shape[1]

    @staticmethod
    def from_variable(variable: Variable) -> "Expression":
        return variable.expr

    @staticmethod
    def constant_vector(values) -> "Expression":
        values = np.atleast_1d(np.asarray(values, dtype=float))
        return Expression(np.zeros((values.shape[0], 0)), values)

    def padded_linear(self, width: int) -> np.ndarray:
        """Linear part zero-padded (or validated) to ``width`` columns."""
        if self.cols > width:
            raise DimensionError(
                f"expression spans {self.cols} decision columns, problem has {width}"
            )
        if self.cols == width:
            return self.linear
        out = np.zeros((self.rows, width))
        out[:, : self.cols] = self.linear
        return out

    def value(self, x) -> np.ndarray:
        """Evaluate at a decision vector (may be longer than ``cols``)."""
        x = np.asarray(x, dtype=float)
        if x.shape[0] < self.cols:
            raise DimensionError(
                f"decision vector has {x.shape[0]} entries, expression needs {self.cols}"
            )
        return self.linear @ x[: self.cols] + self.constant

    # -- algebra ---------------------------------------------------------

    def _coerce(self, other) -> "Expression":
        if isinstance(other, Expression):
            return other
        if isinstance(other, Variable):
            return other.expr
        arr = np.atleast_1d(np.asarray(other, dtype=float))
        if arr.ndim != 1:
            raise DimensionError("only vectors and scalars combine with expressions")
        if arr.shape[0] == 1 and self.rows != 1:
            arr = np.full(self.rows, arr[0])
        return Expression.constant_vector(arr)

    def __add__(self, other) -> "Expression":
        other = self._coerce(other)
        if self.rows != other.rows:
            raise DimensionError(f"row mismatch: {self.rows} vs {other.rows}")
        width = max(self.cols, other.cols)
        return Expression(
            self.padded_linear(width) + other.padded_linear(width),
            self.constant + other.constant,
        )

    def __radd__(self, other) -> "Expression":
        return self.__add__(other)

    def __sub__(self, other) -> "Expression":
        return self.__add__(self._coerce(other).__neg__())

    def __rsub__(self, other) -> "Expression":
        return self._coerce(other).__sub__(self)

    def __neg__(self) -> "Expression":
        return Expression(-self.linear, -self.constant)

    def __mul__(self, factor) -> "Expression":
        factor = float(factor)
        if not np.isfinite(factor):
            raise ValueError("scale factor must be finite")
        return Expression(factor * self.linear, factor * self.constant)

    __rmul__ = __mul__

    def row(self, index: int) -> "Expression":
        return Expression(self.linear[index : index + 1], self.constant[index : index + 1])

    # -- comparisons build constraints ------------------------------------

    def __le__(self, other) -> "Comparison":
        return Comparison(self - other, "<=")

    def __ge__(self, other) -> "Comparison":
        return Comparison(self._coerce(other) - self, "<=")

    def __eq__(self, other):  # type: ignore[override]
        return Comparison(self - other, "==")

    def __hash__(self):
        return id(self)


def stack(expressions) -> Expression:
    """Vertically stack expressions into one."""
    expressions = [e if isinstance(e, Expression) else e.expr for e in expressions]
    if not expressions:
        raise DimensionError("cannot stack zero expressions")
    width = max(e.cols for e in expressions)
    return Expression(
        np.vstack([e.padded_linear(width) for e in expressions]),
        np.concatenate([e.constant for e in expressions]),
    )


@dataclass(frozen=True)
class Comparison:
    """A normalized relation: ``expression == 0`` or ``expression <= 0``."""

    expression: Expression
    relation: str  # "==" or "<="
