"""Equality elimination via full QR factorization.

Hard equalities ``A x = b`` are removed by the change of variables
``x = x_p + Q2 xbar`` where ``A^T = [Q1 Q2] [R1; 0]`` and
``x_p = Q1 (R1^T)^{-1} b``.  The reduced problem has ``p - r`` variables and
no equality block; inequalities become ``G Q2 xbar <= h - G x_p``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, InfeasibleError, RankDeficiencyError

RANK_TOL = 1e-10


def eliminate_redundant_equalities(A, b, labels=None, feas_tol=None):
    """Drop equality rows that are linear combinations of earlier ones.

    Returns ``(A, b, labels, kept_indices)``.  Raises InfeasibleError when a
    dependent row is inconsistent with the rows it depends on (the classic
    ``x = 0`` and ``x = 1`` case).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    m = A.shape[0]
    if labels is None:
        labels = [f"eq[{i}]" for i in range(m)]
    if m == 0:
        return A, b, list(labels), []
    if feas_tol is None:
        feas_tol = 1e-8 * max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)

    _, R, piv = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R)) if R.size else np.zeros(0)
    scale = diag.max() if diag.size else 0.0
    rank = int(np.sum(diag > RANK_TOL * max(scale, 1.0e-300)))
    keep = sorted(piv[:rank])

    if rank < m:
        # Dropping rows only preserves the solution set if the full system
        # is consistent.
        x_ls, *_ = np.linalg.lstsq(A, b, rcond=None)
        residual = A @ x_ls - b
        worst = int(np.argmax(np.abs(residual)))
        if abs(residual[worst]) > feas_tol:
            raise InfeasibleError(
                f"hard equalities are mutually inconsistent at row {worst}"
                f" ({labels[worst]}): residual {residual[worst]:.3e}",
                row=worst,
                kind="equality",
                label=labels[worst],
            )
    kept_labels = [labels[i] for i in keep]
    return A[keep], b[keep], kept_labels, keep


@dataclass(frozen=True)
class ReducedQP:
    """Equality-free problem plus the data to map solutions back."""

    inner: "StandardQP"
    basis: np.ndarray  # Q2, shape (p, p - r)
    particular_solution: np.ndarray  # x_p with A @ x_p = b

    @property
    def reduced_dimension(self) -> int:
        return self.basis.shape[1]


def reduce_qr(qp) -> ReducedQP:
    """Eliminate the equality block of a StandardQP.

    Requires ``A`` to have full row rank; a near-zero diagonal entry of R1
    (relative test against the largest entry) raises RankDeficiencyError
    naming the offending row.
    """
    from .problem import StandardQP

    p = qp.P.shape[0]
    r = qp.A.shape[0]
    if r == 0:
        inner = StandardQP(
            P=qp.P.copy(),
            a=qp.a.copy(),
            A=np.zeros((0, p)),
            b=np.zeros(0),
            G=qp.G.copy(),
            h=qp.h.copy(),
            ineq_labels=list(qp.ineq_labels),
        )
        return ReducedQP(inner, np.eye(p), np.zeros(p))
    if r > p:
        raise RankDeficiencyError(
            f"{r} equality rows exceed the decision dimension {p}", row=p
        )

    Q, R = np.linalg.qr(qp.A.T, mode="complete")  # A^T = Q @ R, R is (p, r)
    R1 = R[:r, :r]
    diag = np.abs(np.diag(R1))
    scale = diag.max() if diag.size else 0.0
    for i, d in enumerate(diag):
        if d < RANK_TOL * max(scale, 1.0e-300):
            raise RankDeficiencyError(
                f"equality row {i} is numerically dependent on the others", row=i
            )
    Q1 = Q[:, :r]
    Q2 = Q[:, r:]
    x_p = Q1 @ scipy.linalg.solve_triangular(R1, qp.b, trans="T", lower=False)

    P_bar = Q2.T @ qp.P @ Q2
    P_bar = 0.5 * (P_bar + P_bar.T)
    a_bar = Q2.T @ (qp.P @ x_p + qp.a)
    G_bar = qp.G @ Q2 if qp.G.size else np.zeros((qp.G.shape[0], p - r))
    h_bar = qp.h - (qp.G @ x_p if qp.G.size else 0.0)

    inner = StandardQP(
        P=P_bar,
        a=a_bar,
        A=np.zeros((0, p - r)),
        b=np.zeros(0),
        G=G_bar,
        h=h_bar,
        ineq_labels=list(qp.ineq_labels),
    )
    return ReducedQP(inner, Q2, x_p)


def recover_solution(reduced: ReducedQP, x_bar) -> np.ndarray:
    """Map a reduced-space minimizer back to the full decision space."""
    x_bar = np.atleast_1d(np.asarray(x_bar, dtype=float))
    if x_bar.shape[0] != reduced.basis.shape[1]:
        raise DimensionError(
            f"reduced solution has {x_bar.shape[0]} entries,"
            f" expected {reduced.basis.shape[1]}"
        )
    return reduced.particular_solution + reduced.basis @ x_bar
