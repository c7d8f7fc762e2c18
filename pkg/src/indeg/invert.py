"""Sampling matrices, their inversion, and the penalized estimator.

The expected sample in-degree counts satisfy E[sample_counts] = P @ counts
for a column-stochastic matrix P determined by the sampling scheme:
hypergeometric columns for sampling without replacement, binomial columns
for sampling with replacement. All probabilities are assembled in
log-space via gammaln so populations up to 10^6 stay overflow-free.

Inversion comes in two flavors: the unbiased generalized-inverse estimate
(noisy, often refused outright because these matrices are catastrophically
ill-conditioned) and a nonnegativity- and sum-constrained weighted least
squares with a second-difference smoothness penalty, with the penalty
weight chosen by a Monte Carlo divergence version of Stein's unbiased
risk estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom as _binom

from .errors import NumericalError
from .graph import DegreeCounts, as_counts
from .optim import QpProblem, solve_qp

__all__ = [
    "MatrixScheme",
    "SamplingMatrix",
    "PenaltyConfig",
    "build_ps",
    "explicit_inverse_nr",
    "log10_condition_number",
    "invert_naive",
    "NaiveInversion",
    "second_diff_operator",
    "weight_matrix",
    "invert_penalized",
    "PenalizedInversion",
    "default_lambda_grid",
    "select_lambda_sure",
    "SureSelection",
]

from enum import Enum

_EPS = np.finfo(float).eps
_ROW_MASS_CUTOFF = 1e-15
_COLSUM_TOL = 1e-10


class MatrixScheme(str, Enum):
    RVS_NR = "rvs_nr"
    RES_NR = "res_nr"
    RVS_WR = "rvs_wr"
    RES_WR = "res_wr"

    @property
    def with_replacement(self) -> bool:
        return self in (MatrixScheme.RVS_WR, MatrixScheme.RES_WR)


@dataclass(frozen=True)
class SamplingMatrix:
    """Dense (J'+1) x (J+1) matrix P with scheme parameters attached."""

    entries: np.ndarray
    scheme: MatrixScheme
    population: int  # N_v or N_e
    budget: int  # n_v or n_e

    @property
    def max_degree(self) -> int:
        return self.entries.shape[1] - 1

    @property
    def max_sample_degree(self) -> int:
        return self.entries.shape[0] - 1


def _log_binom(n, k):
    """log C(n, k) with the conventions C(n, 0) = 1 (any n) and
    C(n, k) = 0 for k > n >= 0 or k < 0."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    out = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    out = np.where(k == 0, 0.0, out)
    out = np.where((k < 0) | (k > n), -np.inf, out)
    return out


def _hypergeom_columns(N: int, n: int, J: int) -> np.ndarray:
    """Matrix whose column j is the hypergeometric pmf of the number of
    successes when drawing n of N objects, j of which are marked."""
    jp_max = min(J, n)
    jp = np.arange(jp_max + 1)[:, None].astype(float)
    j = np.arange(J + 1)[None, :].astype(float)
    logp = _log_binom(j, jp) + _log_binom(N - j, n - jp) - _log_binom(N, n)
    support = (jp >= np.maximum(0.0, n - N + j)) & (jp <= np.minimum(j, n))
    out = np.where(support, np.exp(logp), 0.0)
    return out


def _binomial_columns(N: int, n: int, J: int) -> np.ndarray:
    """Binomial counterpart for sampling with replacement; rows beyond the
    last one carrying total mass >= 1e-15 (and beyond J) are dropped."""
    # upper tail of the widest column bounds every other column's tail
    if J >= 1:
        cap = int(_binom.isf(1e-17, n, min(J, N) / N)) + 5
    else:
        cap = 0
    jp_max = min(n, max(J, cap))
    jp = np.arange(jp_max + 1)[:, None].astype(float)
    j = np.arange(J + 1)[None, :].astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = _log_binom(n, jp) + jp * np.log(j / N) + (n - jp) * np.log1p(-j / N)
    out = np.exp(logp)
    out[:, 0] = 0.0
    out[0, 0] = 1.0
    if J == N:  # degenerate column: every draw hits the full-in-degree vertex
        out[:, J] = 0.0
        if n <= jp_max:
            out[n, J] = 1.0
    row_mass = out.sum(axis=1)
    keep = max(J, int(np.flatnonzero(row_mass >= _ROW_MASS_CUTOFF).max()))
    return out[: min(keep, n) + 1]


def build_ps(scheme: MatrixScheme, N: int, n: int, J: int) -> SamplingMatrix:
    """Sampling matrix for the scheme at population N, budget n, max degree J.

    Column sums are verified to equal 1 within 1e-10; a violation means the
    log-space assembly lost mass and is reported as a numerical failure.
    """
    if N < 1 or n < 1:
        raise ValueError("population and budget must be positive")
    if J < 0 or J > N:
        raise ValueError(f"max degree J={J} must lie in [0, N]")
    if scheme.with_replacement:
        entries = _binomial_columns(N, n, J)
    else:
        if n > N:
            raise ValueError(f"budget n={n} exceeds population N={N} without replacement")
        entries = _hypergeom_columns(N, n, J)
    colsum_err = np.abs(entries.sum(axis=0) - 1.0).max()
    if colsum_err > _COLSUM_TOL:
        raise NumericalError(f"column sums deviate from 1 by {colsum_err:.2e}")
    entries.setflags(write=False)
    return SamplingMatrix(entries=entries, scheme=scheme, population=N, budget=n)


def explicit_inverse_nr(N: int, n: int, J: int) -> np.ndarray:
    """Closed-form inverse of the square no-replacement matrix (J < n).

    Entry (j', j) equals (-1)^(j'+j) C(N-n+j-j'-1, j-j') C(N, j') / C(n, j)
    for j' <= j and 0 otherwise, evaluated in log-space with sign tracking.
    """
    if J >= n:
        raise ValueError(f"explicit inverse requires J < n (got J={J}, n={n})")
    if n > N:
        raise ValueError("budget exceeds population")
    jp = np.arange(J + 1)[:, None].astype(float)
    j = np.arange(J + 1)[None, :].astype(float)
    logmag = (
        _log_binom(N - n + j - jp - 1.0, j - jp)
        + _log_binom(float(N), jp)
        - _log_binom(float(n), j)
    )
    sign = np.where(((jp + j) % 2) == 0, 1.0, -1.0)
    out = np.where(jp <= j, sign * np.exp(logmag), 0.0)
    return out


def log10_condition_number(entries: np.ndarray) -> float:
    """log10 of the two-norm condition number from float64 singular values.

    For the deeply ill-conditioned with-replacement matrices the smallest
    singular values sit far below eps * sigma_max, so the returned figure
    is a noise-floor readout that depends on the LAPACK build rather than a
    resolved quantity; treat anything above ~16 as "numerically singular".
    """
    s = np.linalg.svd(np.asarray(entries, dtype=float), compute_uv=False)
    if s[-1] <= 0:
        return float("inf")
    return float(np.log10(s[0] / s[-1]))


@dataclass
class NaiveInversion:
    counts: DegreeCounts
    log10_condition: float


def invert_naive(P: SamplingMatrix, d_hat_s) -> NaiveInversion:
    """Generalized-inverse estimate (P'P)^-1 P' d_s, solved by SVD least
    squares. Unbiased but noisy; entries may be negative.

    Refuses (NumericalError) when the matrix is numerically rank deficient,
    i.e. its condition number exceeds 1/eps; the penalized path handles
    those regimes.
    """
    entries = P.entries
    rows, cols = entries.shape
    if rows < cols:
        raise NumericalError(
            f"matrix is {rows}x{cols}: fewer observable sample degrees than "
            "unknowns, no full column rank"
        )
    log10_kappa = log10_condition_number(entries)
    if 10.0 ** log10_kappa > 1.0 / _EPS:
        raise NumericalError(
            f"sampling matrix numerically rank deficient (log10 condition "
            f"{log10_kappa:.1f}); use the penalized estimator"
        )
    d = as_counts(d_hat_s).padded(rows)
    solution, *_ = np.linalg.lstsq(entries, d, rcond=None)
    return NaiveInversion(counts=DegreeCounts(solution), log10_condition=log10_kappa)


def second_diff_operator(J: int) -> np.ndarray:
    """(J-1) x (J+1) banded matrix applying the stencil (1, -2, 1)."""
    if J < 2:
        raise ValueError("second differences need at least 3 points (J >= 2)")
    op = np.zeros((J - 1, J + 1))
    idx = np.arange(J - 1)
    op[idx, idx] = 1.0
    op[idx, idx + 1] = -2.0
    op[idx, idx + 2] = 1.0
    return op


def weight_matrix(d_hat_s) -> np.ndarray:
    """Diagonal weights diag(d_s) + (max(d_s)/20) I for the fidelity term."""
    d = as_counts(d_hat_s).values
    peak = float(d.max())
    if peak <= 0:
        raise ValueError("weight matrix undefined for an all-zero count vector")
    return np.diag(d + peak / 20.0)


@dataclass(frozen=True, eq=False)
class PenaltyConfig:
    """Penalty weight, search grid and SURE settings.

    ``ridge`` of None selects 1e-10 * trace(Q)/dim at solve time, enough to
    keep the QP strictly convex at lam=0 with a rank-deficient matrix while
    staying below reporting precision.
    """

    lam: float = 0.0
    lambda_grid: np.ndarray | None = None
    sure_perturbations: int = 20
    ridge: float | None = None
    sure_seed: int = 0
    qp_tol: float = 1e-9
    qp_max_iter: int = 2000

    def validate(self) -> None:
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.lambda_grid is not None:
            grid = np.asarray(self.lambda_grid, dtype=float)
            if grid.size == 0:
                raise ValueError("lambda_grid must be non-empty")
            if (grid <= 0).any() or (np.diff(grid) <= 0).any():
                raise ValueError("lambda_grid must be strictly increasing and positive")
        if self.sure_perturbations < 1:
            raise ValueError("sure_perturbations must be >= 1")
        if self.ridge is not None and self.ridge <= 0:
            raise ValueError("ridge must be positive")


@dataclass
class PenalizedInversion:
    counts: DegreeCounts
    lam: float
    kkt_residual: float
    objective: float
    iterations: int
    converged: bool


class _PenalizedSolver:
    """Caches the quadratic-form pieces shared across lambda values and
    SURE probes for one (matrix, weight) pair."""

    def __init__(self, P: SamplingMatrix, d_hat_s, n_vertices: int, cfg: PenaltyConfig):
        cfg.validate()
        self.cfg = cfg
        self.n_vertices = float(n_vertices)
        self.entries = P.entries
        rows, cols = self.entries.shape
        self.d = as_counts(d_hat_s).padded(rows)
        weights = np.diag(weight_matrix(DegreeCounts(np.maximum(self.d, 0.0))))
        self.inv_c = 1.0 / weights
        self.pt_cinv = self.entries.T * self.inv_c[None, :]
        self.fidelity = self.pt_cinv @ self.entries
        if cols >= 3:
            op = second_diff_operator(cols - 1)
            self.smooth = op.T @ op
        else:
            self.smooth = np.zeros((cols, cols))
        self._warm: np.ndarray | None = None

    def ridge(self, lam: float) -> float:
        if self.cfg.ridge is not None:
            return self.cfg.ridge
        m = self.fidelity.shape[0]
        trace = 2.0 * (np.trace(self.fidelity) + lam * np.trace(self.smooth))
        return 1e-10 * max(trace, _EPS) / m

    def solve(self, lam: float, data: np.ndarray | None = None, warm: bool = True):
        d = self.d if data is None else data
        m = self.fidelity.shape[0]
        Q = 2.0 * (self.fidelity + lam * self.smooth + self.ridge(lam) * np.eye(m))
        q = -2.0 * (self.pt_cinv @ d)
        x0 = self._warm if (warm and self._warm is not None) else None
        sol = solve_qp(QpProblem(Q=Q, q=q, equality_sum=self.n_vertices),
                       tol=self.cfg.qp_tol, max_iter=self.cfg.qp_max_iter, x0=x0)
        if warm:
            self._warm = sol.x
        return sol


def invert_penalized(P: SamplingMatrix, d_hat_s, n_vertices: int,
                     cfg: PenaltyConfig | None = None) -> PenalizedInversion:
    """Constrained penalized weighted least squares estimate of the counts.

    Minimizes (P D - d_s)' C^-1 (P D - d_s) + lam * ||second_diff(D)||^2
    subject to D >= 0 and sum(D) = n_vertices.
    """
    cfg = cfg or PenaltyConfig()
    solver = _PenalizedSolver(P, d_hat_s, n_vertices, cfg)
    sol = solver.solve(cfg.lam, warm=False)
    if not sol.converged:
        raise NumericalError(
            f"penalized QP did not converge in {cfg.qp_max_iter} iterations "
            f"(kkt residual {sol.kkt_residual:.2e})"
        )
    return PenalizedInversion(
        counts=DegreeCounts(sol.x),
        lam=cfg.lam,
        kkt_residual=sol.kkt_residual,
        objective=sol.objective,
        iterations=sol.iterations,
        converged=sol.converged,
    )


def default_lambda_grid(P: SamplingMatrix, d_hat_s, points: int = 30) -> np.ndarray:
    """30 log-spaced penalties spanning [1e-4, 1e4] times the scale
    trace(P'C^-1 P)/trace(S'S); scale-aware so one grid fits all sizes."""
    entries = P.entries
    d = as_counts(d_hat_s).padded(entries.shape[0])
    inv_c = 1.0 / np.diag(weight_matrix(DegreeCounts(np.maximum(d, 0.0))))
    fid_trace = float(np.einsum("ij,i,ij->", entries, inv_c, entries))
    cols = entries.shape[1]
    if cols >= 3:
        op = second_diff_operator(cols - 1)
        smooth_trace = float(np.trace(op.T @ op))
    else:
        smooth_trace = 1.0
    scale = max(fid_trace / max(smooth_trace, _EPS), _EPS)
    return np.geomspace(scale * 1e-4, scale * 1e4, points)


@dataclass
class SureSelection:
    lam: float
    grid: np.ndarray
    risks: np.ndarray
    divergences: np.ndarray


def select_lambda_sure(P: SamplingMatrix, d_hat_s, n_vertices: int,
                       cfg: PenaltyConfig | None = None) -> SureSelection:
    """Pick the grid penalty minimizing the unbiased risk surrogate
    ||P D_lam - d_s||^2_{C^-1} + 2 div, with the divergence of the map
    d_s -> P D_lam estimated by Rademacher finite-difference probes.

    The weight matrix C is held fixed at the unperturbed counts, and one
    probe set is shared across the grid so risk differences between
    neighboring penalties are not dominated by probe noise.
    """
    cfg = cfg or PenaltyConfig()
    solver = _PenalizedSolver(P, d_hat_s, n_vertices, cfg)
    grid = (np.asarray(cfg.lambda_grid, dtype=float)
            if cfg.lambda_grid is not None else default_lambda_grid(P, d_hat_s))
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    rng = np.random.default_rng(cfg.sure_seed)
    rows = solver.entries.shape[0]
    probes = rng.integers(0, 2, size=(cfg.sure_perturbations, rows)) * 2.0 - 1.0
    delta = max(float(np.max(solver.d)), 1.0) * 1e-4

    risks = np.empty(grid.size)
    divergences = np.empty(grid.size)
    for i, lam in enumerate(grid):
        base = solver.solve(lam)
        fit0 = solver.entries @ base.x
        residual = fit0 - solver.d
        fidelity = float(residual @ (solver.inv_c * residual))
        div = 0.0
        for z in probes:
            perturbed = solver.solve(lam, data=solver.d + delta * z)
            div += float(z @ (solver.entries @ perturbed.x - fit0)) / delta
        div /= len(probes)
        divergences[i] = div
        risks[i] = fidelity + 2.0 * div
    best = int(np.argmin(risks))
    return SureSelection(lam=float(grid[best]), grid=grid, risks=risks,
                         divergences=divergences)
