"""Linear dynamics embedded in the decision vector by exact discretization.

A continuous-time system ``y' = D y + E x`` with piecewise-constant inputs
becomes ``y_{k+1} = D_d y_k + E_d x_k`` where the discrete matrices are read
off the block matrix exponential

    exp([[D, E], [0, 0]] * dt) = [[D_d, E_d], [0, I]]

Unrolling the recursion gives every step state as an affine function of the
stacked inputs, which is exactly what the QP layer consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError
from .expressions import Expression, Variable


@dataclass(frozen=True)
class LinearSystem:
    """Continuous-time state matrix D (m x m) and input matrix E (m x p)."""

    D: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        E = np.asarray(self.E, dtype=float)
        if E.ndim == 1:
            E = E.reshape(-1, 1)
        if D.shape[0] != D.shape[1]:
            raise DimensionError(f"state matrix must be square, got {D.shape}")
        if E.shape[0] != D.shape[0]:
            raise DimensionError(
                f"input matrix has {E.shape[0]} rows, state dimension is {D.shape[0]}"
            )
        if not (np.all(np.isfinite(D)) and np.all(np.isfinite(E))):
            raise ValueError("system matrices must be finite")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "E", E)

    @property
    def state_dim(self) -> int:
        return self.D.shape[0]

    @property
    def input_dim(self) -> int:
        return self.E.shape[1]


def chain_system(order: int) -> LinearSystem:
    """Integrator chain: state stacks derivatives, input drives the last one."""
    order = int(order)
    if order < 1:
        raise ValueError(f"chain order must be >= 1, got {order}")
    D = np.zeros((order, order))
    for i in range(order - 1):
        D[i, i + 1] = 1.0
    E = np.zeros((order, 1))
    E[-1, 0] = 1.0
    return LinearSystem(D, E)


def discretize(system: LinearSystem, tau: float):
    """Exact zero-order-hold discretization over a duration ``tau``."""
    tau = float(tau)
    if not tau > 0:
        raise ValueError(f"discretization period must be positive, got {tau}")
    m, p = system.state_dim, system.input_dim
    block = np.zeros((m + p, m + p))
    block[:m, :m] = system.D
    block[:m, m:] = system.E
    exp = scipy.linalg.expm(block * tau)
    lower_left = exp[m:, :m]
    lower_right = exp[m:, m:]
    assert np.max(np.abs(lower_left)) < 1e-12
    assert np.max(np.abs(lower_right - np.eye(p))) < 1e-12
    return exp[:m, :m], exp[:m, m:]


class Integrator:
    """Distributes a stacked input variable over an N-step horizon.

    ``variable`` holds ``x_0 ... x_{N-1}`` back to back; ``expr(k, row)``
    returns the affine expression of state component ``row`` at step ``k``,
    built from the cached powers of the discrete state matrix.
    """

    def __init__(self, variable: Variable, initial_state, system, dt: float, steps=None):
        if isinstance(system, (int, np.integer)):
            system = chain_system(system)
        if not isinstance(system, LinearSystem):
            raise TypeError("system must be a LinearSystem or a chain order")
        dt = float(dt)
        if not dt > 0:
            raise ValueError(f"sampling period must be positive, got {dt}")
        initial_state = np.atleast_1d(np.asarray(initial_state, dtype=float))
        if initial_state.shape[0] != system.state_dim:
            raise DimensionError(
                f"initial state has {initial_state.shape[0]} entries,"
                f" state dimension is {system.state_dim}"
            )
        p = system.input_dim
        if variable.size % p != 0:
            raise DimensionError(
                f"variable size {variable.size} is not a multiple of the"
                f" input dimension {p}"
            )
        n_steps = variable.size // p
        if steps is not None and int(steps) != n_steps:
            raise DimensionError(
                f"variable holds {n_steps} steps of {p} inputs, asked for {steps}"
            )

        self.variable = variable
        self.system = system
        self.dt = dt
        self.steps = n_steps
        self.initial_state = initial_state
        self.D_d, self.E_d = discretize(system, dt)
        powers = [np.eye(system.state_dim)]
        for _ in range(n_steps):
            powers.append(self.D_d @ powers[-1])
        self.powers = powers

    @property
    def state_dim(self) -> int:
        return self.system.state_dim

    def expr(self, step: int, row: int | None = None) -> Expression:
        """State at a discrete step as an expression over the inputs."""
        step = int(step)
        if step < 0 or step > self.steps:
            raise ValueError(f"step {step} outside horizon [0, {self.steps}]")
        m, p = self.state_dim, self.system.input_dim
        width = self.variable.offset + self.variable.size
        linear = np.zeros((m, width))
        for i in range(step):
            coef = self.powers[step - 1 - i] @ self.E_d
            col = self.variable.offset + i * p
            linear[:, col : col + p] = coef
        constant = self.powers[step] @ self.initial_state
        expression = Expression(linear, constant)
        if row is None:
            return expression
        if row < 0 or row >= m:
            raise ValueError(f"state row {row} outside [0, {m})")
        return expression.row(row)

    def expr_t(self, t: float, row: int | None = None) -> Expression:
        """State at a continuous time ``t`` within the horizon.

        The interval index is ``k = floor(t / dt)``; exact step boundaries
        use ``tau = 0`` against step k rather than ``tau = dt`` against the
        previous one.
        """
        t = float(t)
        horizon = self.steps * self.dt
        slop = 1e-9 * self.dt
        if t < -slop or t > horizon + slop:
            raise ValueError(f"time {t} outside horizon [0, {horizon}]")
        k = int(np.floor(t / self.dt + 1e-9))
        k = min(max(k, 0), self.steps)
        tau = t - k * self.dt
        if tau <= slop or k == self.steps:
            return self.expr(k, row)
        D_tau, E_tau = discretize(self.system, tau)
        base = self.expr(k)
        p = self.system.input_dim
        col = self.variable.offset + k * p
        linear = D_tau @ base.linear
        linear[:, col : col + p] += E_tau
        expression = Expression(linear, D_tau @ base.constant)
        if row is None:
            return expression
        return expression.row(row)

    def simulate(self, inputs) -> np.ndarray:
        """Roll the discrete dynamics over an input sequence.

        Returns an array of shape (steps + 1, state_dim) including the
        initial state.
        """
        inputs = np.asarray(inputs, dtype=float).reshape(self.steps, self.system.input_dim)
        states = np.zeros((self.steps + 1, self.state_dim))
        states[0] = self.initial_state
        for k in range(self.steps):
            states[k + 1] = self.D_d @ states[k] + self.E_d @ inputs[k]
        return states
