"""Dense dual active-set solver for strictly convex QPs.

Solves ``min 1/2 x^T P x + a^T x`` subject to ``A x = b`` and ``G x <= h``
with P positive definite.  The method starts at the equality-constrained
minimizer and adds violated inequalities one at a time, taking dual steps
that keep the working-set multipliers nonnegative (the Goldfarb-Idnani
scheme).  Equalities stay in the working set for the whole solve and their
multipliers are free in sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    InfeasibleError,
    NonconvergenceError,
    NotPositiveDefiniteError,
)
from .qr_reduction import eliminate_redundant_equalities

STATIONARITY_TOL = 1e-8


@dataclass
class SolveResult:
    x: np.ndarray
    active_set: list[int]
    lagrange_multipliers: np.ndarray  # equalities first, then active inequalities
    iterations: int
    kkt_residual: float
    eq_multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ineq_multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))  # full length


def _cholesky_with_retry(P):
    try:
        return scipy.linalg.cho_factor(P, lower=True)
    except scipy.linalg.LinAlgError:
        pass
    n = P.shape[0]
    bump = 1e-10 * np.trace(P) / max(n, 1)
    try:
        return scipy.linalg.cho_factor(P + bump * np.eye(n), lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "cost Hessian is not positive definite (Cholesky failed twice)"
        ) from exc


def kkt_residual(P, a, A, b, G, h, x, lam_eq, lam_ineq):
    """Max norm over stationarity, primal feasibility and complementarity."""
    stationarity = P @ x + a
    if A.shape[0]:
        stationarity = stationarity + A.T @ lam_eq
    if G.shape[0]:
        stationarity = stationarity + G.T @ lam_ineq
    parts = [float(np.max(np.abs(stationarity))) if stationarity.size else 0.0]
    if A.shape[0]:
        parts.append(float(np.max(np.abs(A @ x - b))))
    if G.shape[0]:
        slack = G @ x - h
        parts.append(float(max(0.0, np.max(slack))))
        parts.append(float(np.max(np.abs(lam_ineq * slack))))
    return max(parts)


def _matrix_block(block, n):
    if block is None:
        return np.zeros((0, n))
    arr = np.asarray(block, dtype=float)
    if arr.ndim == 2:
        return arr
    if arr.size == 0:
        return np.zeros((0, n))
    return arr.reshape(-1, n)


def solve_qp(qp, max_iterations=None) -> SolveResult:
    """Solve a StandardQP (or any object exposing P, a, A, b, G, h)."""
    P = np.asarray(qp.P, dtype=float)
    a = np.asarray(qp.a, dtype=float)
    n = P.shape[0]
    A = _matrix_block(qp.A, n)
    b = np.asarray(qp.b, dtype=float).reshape(-1) if qp.b is not None else np.zeros(0)
    G = _matrix_block(qp.G, n)
    h = np.asarray(qp.h, dtype=float).reshape(-1) if qp.h is not None else np.zeros(0)
    for block in (P, a, A, b, G, h):
        if block.size and not np.all(np.isfinite(block)):
            raise ValueError("QP data must be finite")

    eq_labels = list(getattr(qp, "eq_labels", None) or [f"eq[{i}]" for i in range(A.shape[0])])
    ineq_labels = list(
        getattr(qp, "ineq_labels", None) or [f"ineq[{i}]" for i in range(G.shape[0])]
    )

    if n == 0:
        # Fully determined elsewhere (e.g. a QR reduction with r = p); only
        # constant constraint rows remain to check.
        for i, bi in enumerate(b):
            if abs(bi) > 1e-10:
                raise InfeasibleError(
                    f"equality row {i} ({eq_labels[i]}) is unsatisfiable",
                    row=i, kind="equality", label=eq_labels[i],
                )
        for i, hi in enumerate(h):
            if hi < -1e-10:
                raise InfeasibleError(
                    f"inequality row {i} ({ineq_labels[i]}) is unsatisfiable",
                    row=i, kind="inequality", label=ineq_labels[i],
                )
        return SolveResult(
            x=np.zeros(0), active_set=[], lagrange_multipliers=np.zeros(len(b)),
            iterations=0, kkt_residual=0.0,
            eq_multipliers=np.zeros(len(b)), ineq_multipliers=np.zeros(len(h)),
        )

    A, b, eq_labels, _ = eliminate_redundant_equalities(A, b, eq_labels)
    m_eq = A.shape[0]
    m_ineq = G.shape[0]
    if max_iterations is None:
        max_iterations = 10 * (n + m_eq + m_ineq)

    chol = _cholesky_with_retry(P)

    def p_solve(rhs):
        return scipy.linalg.cho_solve(chol, rhs)

    # Equality-constrained start.  Stationarity reads P x + a - A^T u_eq = 0.
    if m_eq:
        Y = p_solve(A.T)
        S = A @ Y
        try:
            u_eq = np.linalg.solve(S, b + A @ p_solve(a))
        except np.linalg.LinAlgError as exc:
            raise InfeasibleError(
                "equality block is rank deficient after elimination", kind="equality"
            ) from exc
        x = p_solve(A.T @ u_eq - a)
    else:
        u_eq = np.zeros(0)
        x = -p_solve(a)

    active: list[int] = []
    u_act: list[float] = []
    feas_tol = 1e-10 * max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    iterations = 0

    while True:
        residuals = G @ x - h if m_ineq else np.zeros(0)
        if active:
            residuals = residuals.copy()
            residuals[active] = 0.0  # working-set rows are tight by construction
        p = int(np.argmax(residuals)) if m_ineq else -1
        if m_ineq == 0 or residuals[p] <= feas_tol:
            break

        n_p = -G[p]  # normal in the ">=" convention: n_p^T x >= -h[p]
        b_p = -h[p]
        u_p = 0.0

        while True:
            iterations += 1
            if iterations > max_iterations:
                raise NonconvergenceError(
                    f"active-set iteration cap {max_iterations} exceeded"
                )
            # Primal direction z and dual direction r from
            # [P N; N^T 0] [z; r] = [n_p; 0] with N the working-set normals.
            normals = [A.T] if m_eq else []
            if active:
                normals.append(-G[active].T)
            y = p_solve(n_p)
            if normals:
                N = np.hstack(normals)
                YN = p_solve(N)
                S = N.T @ YN
                r = np.linalg.solve(S, N.T @ y)
                z = y - YN @ r
            else:
                r = np.zeros(0)
                z = y

            z_scale = max(1.0, float(np.max(np.abs(y))))
            z_is_zero = float(np.max(np.abs(z))) <= 1e-11 * z_scale if z.size else True

            # Blocking step over droppable (inequality) working-set members.
            r_ineq = r[m_eq:]
            t1 = np.inf
            drop_pos = -1
            for pos, row in enumerate(active):
                if r_ineq[pos] > 1e-12:
                    step = u_act[pos] / r_ineq[pos]
                    if step < t1 - 1e-15 or (
                        abs(step - t1) <= 1e-15 and (drop_pos < 0 or row < active[drop_pos])
                    ):
                        t1 = step
                        drop_pos = pos

            if z_is_zero:
                t2 = np.inf
            else:
                denom = float(z @ n_p)
                s_p = float(n_p @ x - b_p)  # negative while violated
                t2 = max(0.0, -s_p / denom)

            t = min(t1, t2)
            if not np.isfinite(t):
                raise InfeasibleError(
                    f"inequality row {p} ({ineq_labels[p]}) cannot be satisfied"
                    " together with the working set",
                    row=p,
                    kind="inequality",
                    label=ineq_labels[p],
                )

            if m_eq:
                u_eq = u_eq - t * r[:m_eq]
            for pos in range(len(u_act)):
                u_act[pos] -= t * r_ineq[pos]
            u_p += t
            if not z_is_zero:
                x = x + t * z

            if t2 <= t1 and not z_is_zero:
                active.append(p)
                u_act.append(u_p)
                break
            # Partial (dual) step: drop the blocking constraint and retry.
            del active[drop_pos]
            del u_act[drop_pos]

    lam_ineq = np.zeros(m_ineq)
    for pos, row in enumerate(active):
        lam_ineq[row] = u_act[pos]
    lam_eq = -u_eq

    order = np.argsort(active) if active else []
    active_sorted = [active[i] for i in order]
    multipliers = np.concatenate([lam_eq, np.array([u_act[i] for i in order])])

    residual = kkt_residual(P, a, A, b, G, h, x, lam_eq, lam_ineq)
    if residual > STATIONARITY_TOL:
        raise NonconvergenceError(
            f"solution does not satisfy the KKT conditions (residual {residual:.3e})"
        )
    return SolveResult(
        x=x,
        active_set=active_sorted,
        lagrange_multipliers=multipliers,
        iterations=iterations,
        kkt_residual=residual,
        eq_multipliers=lam_eq,
        ineq_multipliers=lam_ineq,
    )
