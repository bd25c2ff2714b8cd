"""Gauss-Newton solve of the overdetermined residual maps behind the boundary and admissibility conditions.

The Jacobian is a finite-difference one taken at the current iterate. Between rebuilds it follows
Broyden rank-one updates; it is rebuilt whenever a step fails to contract the residual. Steps are
accepted by Armijo backtracking on the 2-norm of the residual vector.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from bubbleflow.constants import FD_JACOBIAN_STEP
from bubbleflow.exceptions import BoundarySolveError
from bubbleflow.utils.log import get_logger

logger = get_logger("newton")

# A step shorter than this (relative to the iterate) cannot change the residual.
_STAGNATION = 1e-13
_ARMIJO = 1e-4
_BACKTRACKS = 6


@dataclass(frozen=True)
class Evaluation:
    """Residual map at one iterate: `vector` for the least-squares step, `error` for the history."""

    vector: np.ndarray
    error: float
    converged: bool
    payload: Any = None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass
class NewtonResult:
    x: np.ndarray
    evaluation: Evaluation
    iterations: int
    jacobian: np.ndarray
    history: list[float] = field(default_factory=list)
    refreshes: int = 0


def fd_jacobian(
    evaluate: Callable[[np.ndarray], Evaluation], x: np.ndarray, at: Evaluation, step: float = FD_JACOBIAN_STEP
) -> np.ndarray:
    """Forward differences of the residual vector, one column per unknown."""
    columns = []
    for k in range(x.size):
        h = step * (1.0 + abs(x[k]))
        shifted = x.copy()
        shifted[k] += h
        columns.append((evaluate(shifted).vector - at.vector) / h)
    return np.stack(columns, axis=1)


def newton_solve(
    evaluate: Callable[[np.ndarray], Evaluation],
    x0: np.ndarray,
    *,
    jacobian: np.ndarray | None = None,
    max_iter: int,
    first_damping: float = 1.0,
    error: type[BoundarySolveError] = BoundarySolveError,
    what: str = "newton solve",
) -> NewtonResult:
    """Drive `evaluate(x).converged` to True.

    `jacobian` seeds the iteration (e.g. the linearization at the round hemisphere); without one it is
    built by finite differences at x0. Raises `error` carrying the residual history when the iteration
    stagnates above tolerance or runs out of iterations.
    """
    x = np.array(x0, dtype=float)
    current = evaluate(x)
    history = [current.error]
    refreshes = 0
    if jacobian is None:
        jacobian = fd_jacobian(evaluate, x, current)
        refreshes += 1
        fresh = True
    else:
        jacobian = np.array(jacobian, dtype=float)
        fresh = False

    def fail(reason: str, iteration: int) -> BoundarySolveError:
        return error(
            f"{what} {reason} after {iteration} iterations (residual {history[-1]:.3e})",
            history=history,
            iterations=iteration,
            jacobian_refreshes=refreshes,
        )

    for iteration in range(max_iter + 1):
        logger.debug(f"{what} iteration {iteration}: residual {current.error:.3e}")
        if current.converged:
            return NewtonResult(x, current, iteration, jacobian, history, refreshes)
        if iteration == max_iter:
            break
        step = np.linalg.lstsq(jacobian, current.vector, rcond=None)[0]
        if np.linalg.norm(step) <= _STAGNATION * (1.0 + np.linalg.norm(x)):
            if fresh:
                raise fail("stagnated above tolerance", iteration)
            jacobian, fresh = fd_jacobian(evaluate, x, current), True
            refreshes += 1
            continue

        alpha = first_damping if iteration == 0 else 1.0
        accepted: tuple[np.ndarray, Evaluation] | None = None
        for _ in range(_BACKTRACKS):
            trial_x = x - alpha * step
            trial = evaluate(trial_x)
            if np.isfinite(trial.norm) and trial.norm <= (1.0 - _ARMIJO * alpha) * current.norm:
                accepted = (trial_x, trial)
                break
            if not fresh:
                break
            alpha *= 0.5

        if accepted is None:
            if fresh:
                raise fail("stagnated above tolerance", iteration)
            jacobian, fresh = fd_jacobian(evaluate, x, current), True
            refreshes += 1
            continue

        trial_x, trial = accepted
        dx = trial_x - x
        jacobian = jacobian + np.outer(trial.vector - current.vector - jacobian @ dx, dx) / float(dx @ dx)
        fresh = False
        contraction = trial.norm / current.norm
        x, current = trial_x, trial
        history.append(current.error)
        if contraction > 1.0 - 0.5 * alpha and not current.converged:
            jacobian, fresh = fd_jacobian(evaluate, x, current), True
            refreshes += 1
    raise fail("did not converge", max_iter)
