"""Declarative QP construction and compilation to standard form.

A Problem collects variables, weighted least-squares objectives and
prioritized constraints, then compiles them into
``min 1/2 x^T P x + a^T x  s.t.  A x = b, G x <= h`` with
``P = sum_i w_i M_i^T M_i + ridge * I`` and ``a = sum_i w_i M_i^T c_i`` for
objective expressions ``M_i x + c_i``.  Soft inequalities get a nonnegative
slack block appended after the user variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import active_set
from .errors import DimensionError, EmptyProblemError
from .expressions import Comparison, Expression, Variable
from .qr_reduction import (
    eliminate_redundant_equalities,
    recover_solution,
    reduce_qr,
)

DEFAULT_RIDGE = 1e-8


@dataclass(frozen=True)
class ObjectiveTerm:
    expression: Expression
    weight: float


class ConstraintSpec:
    """One declared constraint, normalized to ``expr == 0`` or ``expr <= 0``."""

    def __init__(self, expression: Expression, relation: str, label: str):
        self.expression = expression
        self.relation = relation  # "==" or "<="
        self.label = label
        self.priority = "hard"
        self.weight = 1.0
        self.slack_variable: Variable | None = None

    def configure(self, priority: str, weight: float = 1.0):
        """Switch between hard and soft enforcement."""
        if priority not in ("hard", "soft"):
            raise ValueError(f"priority must be 'hard' or 'soft', got {priority!r}")
        if priority == "soft" and not weight > 0:
            raise ValueError("soft constraints need a positive weight")
        self.priority = priority
        self.weight = float(weight)
        return self

    @property
    def rows(self) -> int:
        return self.expression.rows


@dataclass
class StandardQP:
    """Dense standard-form data. ``n_user`` marks where slack columns start."""

    P: np.ndarray
    a: np.ndarray
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    h: np.ndarray
    eq_labels: list[str] = field(default_factory=list)
    ineq_labels: list[str] = field(default_factory=list)
    n_user: int | None = None

    @property
    def dimension(self) -> int:
        return self.P.shape[0]


@dataclass
class ConstraintDiagnostics:
    label: str
    relation: str
    priority: str
    violation: float  # max over rows of the unrelaxed residual, <= 0 when satisfied
    active_rows: list[int]
    slack: np.ndarray | None
    penalty: float


@dataclass
class ProblemResult:
    x: np.ndarray  # user variables only
    x_full: np.ndarray  # including slack entries
    cost: float  # true least-squares value, constants included
    solver: active_set.SolveResult
    constraints: list[ConstraintDiagnostics]


class Problem:
    """Mutable container of variables, objectives and constraints."""

    def __init__(self, ridge: float = DEFAULT_RIDGE, use_qr_reduction: bool = True):
        if not ridge > 0:
            raise ValueError("ridge must be positive")
        self.ridge = float(ridge)
        self.use_qr_reduction = use_qr_reduction
        self._dim = 0
        self._variables: list[Variable] = []
        self._objectives: list[ObjectiveTerm] = []
        self._constraints: list[ConstraintSpec] = []
        self._result: ProblemResult | None = None
        self._last_qp: StandardQP | None = None

    # -- construction ------------------------------------------------------

    @property
    def dimension(self) -> int:
        return self._dim

    def add_variable(self, size: int) -> Variable:
        size = int(size)
        if size < 1:
            raise ValueError(f"variable size must be >= 1, got {size}")
        variable = Variable(offset=self._dim, size=size)
        self._variables.append(variable)
        self._dim += size
        return variable

    def add_objective(self, expression, weight: float = 1.0) -> ObjectiveTerm:
        """Add ``weight * ||expression||^2`` to the cost."""
        if isinstance(expression, Variable):
            expression = expression.expr
        if not isinstance(expression, Expression):
            raise TypeError("objectives take an Expression")
        if not weight > 0:
            raise ValueError(f"objective weight must be positive, got {weight}")
        if expression.cols > self._dim:
            raise DimensionError("expression references unknown decision columns")
        term = ObjectiveTerm(expression, float(weight))
        self._objectives.append(term)
        return term

    def add_constraint(self, comparison, relation: str | None = None, label: str | None = None):
        """Register ``expr (<=|>=|==) rhs``; returns a configurable handle."""
        if isinstance(comparison, Comparison):
            expression, rel = comparison.expression, comparison.relation
        else:
            expression = comparison.expr if isinstance(comparison, Variable) else comparison
            if relation is None:
                raise ValueError("pass a Comparison or an (expression, relation) pair")
            if relation in ("==", "="):
                rel = "=="
            elif relation == "<=":
                rel = "<="
            elif relation == ">=":
                expression, rel = -expression, "<="
            else:
                raise ValueError(f"unknown relation {relation!r}")
        if expression.cols > self._dim:
            raise DimensionError("expression references unknown decision columns")
        if label is None:
            label = f"constraint_{len(self._constraints)}"
        spec = ConstraintSpec(expression, rel, label)
        self._constraints.append(spec)
        return spec

    # -- compilation -------------------------------------------------------

    def compile(self) -> StandardQP:
        if self._dim == 0:
            raise EmptyProblemError("problem has no decision variables")

        # Slack columns for soft inequalities trail the user variables.
        slack_offset = self._dim
        for spec in self._constraints:
            if spec.priority == "soft" and spec.relation == "<=":
                spec.slack_variable = Variable(offset=slack_offset, size=spec.rows)
                slack_offset += spec.rows
            else:
                spec.slack_variable = None
        total = slack_offset

        P = np.zeros((total, total))
        a = np.zeros(total)

        def accumulate(M, c, w):
            P[:, :] += w * (M.T @ M)
            a[:] += w * (M.T @ c)

        for term in self._objectives:
            M = term.expression.padded_linear(total)
            accumulate(M, term.expression.constant, term.weight)

        eq_rows, eq_rhs, eq_labels = [], [], []
        ineq_rows, ineq_rhs, ineq_labels = [], [], []
        for spec in self._constraints:
            M = spec.expression.padded_linear(total)
            c = spec.expression.constant
            if spec.priority == "hard":
                if spec.relation == "==":
                    eq_rows.append(M)
                    eq_rhs.append(-c)
                    eq_labels.extend(f"{spec.label}[{i}]" for i in range(spec.rows))
                else:
                    ineq_rows.append(M)
                    ineq_rhs.append(-c)
                    ineq_labels.extend(f"{spec.label}[{i}]" for i in range(spec.rows))
            elif spec.relation == "==":
                accumulate(M, c, spec.weight)
            else:
                # w * ||expr + s||^2 with hard rows s >= 0.
                sl = spec.slack_variable
                M_aug = M.copy()
                M_aug[:, sl.offset : sl.offset + sl.size] = np.eye(sl.size)
                accumulate(M_aug, c, spec.weight)
                nonneg = np.zeros((sl.size, total))
                nonneg[:, sl.offset : sl.offset + sl.size] = -np.eye(sl.size)
                ineq_rows.append(nonneg)
                ineq_rhs.append(np.zeros(sl.size))
                ineq_labels.extend(f"{spec.label}.slack[{i}]" for i in range(sl.size))

        P += self.ridge * np.eye(total)
        A = np.vstack(eq_rows) if eq_rows else np.zeros((0, total))
        b = np.concatenate(eq_rhs) if eq_rhs else np.zeros(0)
        G = np.vstack(ineq_rows) if ineq_rows else np.zeros((0, total))
        h = np.concatenate(ineq_rhs) if ineq_rhs else np.zeros(0)
        A, b, eq_labels, _ = eliminate_redundant_equalities(A, b, eq_labels)
        return StandardQP(
            P=P, a=a, A=A, b=b, G=G, h=h,
            eq_labels=eq_labels, ineq_labels=ineq_labels, n_user=self._dim,
        )

    # -- solving -----------------------------------------------------------

    def solve(self, max_iterations: int | None = None) -> ProblemResult:
        qp = self.compile()
        self._last_qp = qp
        if qp.A.shape[0] and self.use_qr_reduction:
            reduced = reduce_qr(qp)
            inner = active_set.solve_qp(reduced.inner, max_iterations)
            x_full = recover_solution(reduced, inner.x)
            lam_ineq = inner.ineq_multipliers
            # Equality multipliers from stationarity on the full problem.
            grad = qp.P @ x_full + qp.a
            if qp.G.shape[0]:
                grad = grad + qp.G.T @ lam_ineq
            lam_eq = np.linalg.solve(qp.A @ qp.A.T, qp.A @ -grad)
            residual = active_set.kkt_residual(
                qp.P, qp.a, qp.A, qp.b, qp.G, qp.h, x_full, lam_eq, lam_ineq
            )
            solver_result = active_set.SolveResult(
                x=x_full,
                active_set=inner.active_set,
                lagrange_multipliers=np.concatenate(
                    [lam_eq, inner.lagrange_multipliers]
                ),
                iterations=inner.iterations,
                kkt_residual=residual,
                eq_multipliers=lam_eq,
                ineq_multipliers=lam_ineq,
            )
        else:
            solver_result = active_set.solve_qp(qp, max_iterations)
            x_full = solver_result.x

        diagnostics = self._diagnose(qp, x_full, solver_result)
        cost = self._true_cost(x_full)
        result = ProblemResult(
            x=x_full[: self._dim].copy(),
            x_full=x_full,
            cost=cost,
            solver=solver_result,
            constraints=diagnostics,
        )
        self._result = result
        return result

    def _true_cost(self, x_full) -> float:
        cost = 0.0
        for term in self._objectives:
            r = term.expression.value(x_full)
            cost += term.weight * float(r @ r)
        for spec in self._constraints:
            if spec.priority != "soft":
                continue
            r = spec.expression.value(x_full)
            if spec.relation == "==":
                cost += spec.weight * float(r @ r)
            else:
                s = x_full[spec.slack_variable.offset : spec.slack_variable.offset + spec.rows]
                v = r + s
                cost += spec.weight * float(v @ v)
        return cost

    def _diagnose(self, qp, x_full, solver_result) -> list[ConstraintDiagnostics]:
        out = []
        active = set(solver_result.active_set)
        # Recover which inequality rows belong to which spec, in emission order.
        row = 0
        hard_ineq_spans = {}
        slack_spans = {}
        for spec in self._constraints:
            if spec.priority == "hard" and spec.relation == "<=":
                hard_ineq_spans[id(spec)] = range(row, row + spec.rows)
                row += spec.rows
            elif spec.priority == "soft" and spec.relation == "<=":
                slack_spans[id(spec)] = range(row, row + spec.rows)
                row += spec.rows
        for spec in self._constraints:
            residual = spec.expression.value(x_full)
            violation = float(np.max(np.abs(residual))) if spec.relation == "==" else float(
                np.max(residual)
            )
            active_rows = []
            slack = None
            penalty = 0.0
            if spec.priority == "hard" and spec.relation == "<=":
                active_rows = [r for r in hard_ineq_spans[id(spec)] if r in active]
            if spec.priority == "soft":
                if spec.relation == "<=":
                    sl = spec.slack_variable
                    slack = x_full[sl.offset : sl.offset + sl.size].copy()
                    v = residual + slack
                    penalty = spec.weight * float(v @ v)
                else:
                    penalty = spec.weight * float(residual @ residual)
            out.append(
                ConstraintDiagnostics(
                    label=spec.label,
                    relation=spec.relation,
                    priority=spec.priority,
                    violation=violation,
                    active_rows=active_rows,
                    slack=slack,
                    penalty=penalty,
                )
            )
        return out

    # -- post-solve queries --------------------------------------------------

    @property
    def last_result(self) -> ProblemResult | None:
        return self._result

    @property
    def last_qp(self) -> StandardQP | None:
        return self._last_qp

    def value(self, expression) -> np.ndarray:
        """Evaluate an expression or variable at the last solution."""
        if self._result is None:
            raise RuntimeError("problem has not been solved yet")
        if isinstance(expression, Variable):
            expression = expression.expr
        return expression.value(self._result.x_full)

    def slack_value(self, spec: ConstraintSpec) -> np.ndarray:
        if self._result is None:
            raise RuntimeError("problem has not been solved yet")
        if spec.slack_variable is None:
            raise ValueError("constraint has no slack variable")
        sl = spec.slack_variable
        return self._result.x_full[sl.offset : sl.offset + sl.size].copy()
