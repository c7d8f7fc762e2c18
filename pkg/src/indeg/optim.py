"""Dense convex QP solver for the penalized estimator.

Solves  min 1/2 x'Qx + q'x  s.t.  sum(x) = b,  x >= 0  with a primal
active-set method. The single equality constraint stays in the working set
throughout; bound constraints enter and leave it. Problem sizes here are a
few hundred variables at most, so each subproblem is solved by a dense
factorization of the reduced KKT system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

__all__ = ["QpProblem", "QpSolution", "solve_qp"]


@dataclass(frozen=True)
class QpProblem:
    Q: np.ndarray
    q: np.ndarray
    equality_sum: float

    def validate(self) -> None:
        Q = np.asarray(self.Q, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if q.shape != (Q.shape[0],):
            raise ValueError("q length must match Q")
        scale = max(1.0, float(np.abs(Q).max()))
        if np.abs(Q - Q.T).max() > 1e-12 * scale:
            raise ValueError("Q must be symmetric (within 1e-12 relative)")
        if self.equality_sum <= 0:
            raise ValueError("equality_sum must be positive")


@dataclass
class QpSolution:
    x: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    active_set: frozenset
    converged: bool = True
    multiplier: float = 0.0


def solve_qp(problem: QpProblem, tol: float = 1e-9, max_iter: int = 500,
             x0: np.ndarray | None = None) -> QpSolution:
    """Primal active-set solve of the bound-and-sum constrained QP.

    ``x0`` may warm-start from any feasible point (defaults to the uniform
    point b/m). Returns the best iterate flagged non-converged if max_iter
    is exhausted.
    """
    problem.validate()
    Qin = np.asarray(problem.Q, dtype=float)
    Q = 0.5 * (Qin + Qin.T)
    q = np.asarray(problem.q, dtype=float)
    b = float(problem.equality_sum)
    m = Q.shape[0]

    try:
        np.linalg.cholesky(Q + np.eye(m) * (1e-14 * max(1.0, np.abs(Q).max())))
    except np.linalg.LinAlgError:
        raise NumericalError("Q is not positive definite") from None

    if x0 is None:
        x = np.full(m, b / m)
    else:
        x = np.asarray(x0, dtype=float).copy()
        if x.shape != (m,) or (x < 0).any() or abs(x.sum() - b) > 1e-6 * max(1.0, b):
            raise ValueError("x0 must be a feasible warm start")
        x *= b / x.sum()

    active = x <= 0.0
    if active.all():
        active[int(np.argmin(q))] = False
        x[:] = 0.0
        x[~active] = b
    mu = 0.0
    converged = False
    iteration = 0

    while iteration < max_iter:
        iteration += 1
        free = np.flatnonzero(~active)
        k = len(free)
        # equality-constrained subproblem on the free variables
        kkt = np.empty((k + 1, k + 1))
        kkt[:k, :k] = Q[np.ix_(free, free)]
        kkt[:k, k] = 1.0
        kkt[k, :k] = 1.0
        kkt[k, k] = 0.0
        rhs = np.empty(k + 1)
        rhs[:k] = -q[free]
        rhs[k] = b
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            raise NumericalError("singular reduced KKT system") from None
        target = sol[:k]
        mu = float(sol[k])

        step = target - x[free]
        if np.abs(step).max() <= tol * max(1.0, b):
            # at the subproblem optimum; check multipliers of active bounds
            if not active.any():
                converged = True
                break
            grad = Q @ x + q
            s_active = grad[active] - mu
            if s_active.min() >= -tol * max(1.0, abs(mu)):
                converged = True
                break
            release = np.flatnonzero(active)[int(np.argmin(s_active))]
            active[release] = False
            continue

        # longest feasible step toward the subproblem optimum
        negative = step < -tol * 1e-3
        if negative.any():
            ratios = np.full(k, np.inf)
            ratios[negative] = -x[free][negative] / step[negative]
            alpha = float(min(1.0, ratios.min()))
        else:
            ratios = None
            alpha = 1.0
        x[free] = x[free] + alpha * step
        if alpha < 1.0:
            blocked = free[int(np.argmin(ratios))]
            x[blocked] = 0.0
            active[blocked] = True
        np.maximum(x, 0.0, out=x)

    # feasibility restoration against accumulated drift
    np.maximum(x, 0.0, out=x)
    total = x.sum()
    if total <= 0:
        raise NumericalError("active-set iterate collapsed to zero")
    x *= b / total

    grad = Q @ x + q
    free_mask = ~active
    if free_mask.any():
        mu = float(np.mean(grad[free_mask]))
        stationarity = float(np.abs(grad[free_mask] - mu).max())
    else:
        stationarity = 0.0
    dual = float(max(0.0, -(grad[active] - mu).min())) if active.any() else 0.0
    comp = float(np.abs(np.where(active, x * (grad - mu), 0.0)).max())
    primal = abs(x.sum() - b) / max(1.0, b)
    kkt_residual = max(stationarity, dual, comp, primal)

    return QpSolution(
        x=x,
        objective=float(0.5 * x @ Q @ x + q @ x),
        kkt_residual=kkt_residual,
        iterations=iteration,
        active_set=frozenset(int(i) for i in np.flatnonzero(active)),
        converged=converged,
        multiplier=mu,
    )
