"""Asymptotic tail estimators for the in-degree counts.

Sampling thins each in-edge with probability p, so for degrees large
enough that 1/sqrt(p j) is small the sample in-degree concentrates at
p times the true one. Two estimators exploit this:

* ASYM (distribution-free): rescale the sample counts by p in both axes,
  subtract the 1/p level contributed by the one-count ("flat") region of
  the true distribution, and stretch the observed flat segment over its
  estimated true range.
* LINE (power-law): fit the tail exponent on the sample counts, then map
  the fitted law back through scheme-specific correction factors that
  converge to p^alpha.

Tail estimates are partial vectors: entries outside the estimated range
are NaN, meaning "no estimate here" (never zero), and are filled from the
bulk estimator by :func:`stitch`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .graph import DegreeCounts, as_counts
from .invert import MatrixScheme

__all__ = [
    "estimate_tau_s",
    "estimate_J",
    "default_onset",
    "asym_estimate",
    "cs_factor",
    "cs_limit",
    "fit_power_law",
    "PowerLawFit",
    "line_estimate",
    "TailEstimate",
    "stitch",
    "StitchedEstimate",
    "default_crossover",
]


def estimate_tau_s(d_hat_s) -> int:
    """Onset of the sample flat region: the smallest index attaining the
    minimum positive count."""
    d = as_counts(d_hat_s).values
    positive = np.flatnonzero(d > 0)
    if positive.size == 0:
        raise ValueError("tau_s undefined for an all-zero count vector")
    smallest = d[positive].min()
    return int(positive[np.flatnonzero(d[positive] == smallest)[0]])


def estimate_J(max_sample_degree: int, p: float) -> int:
    """Largest true in-degree implied by the largest sample in-degree."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return int(round(max_sample_degree / p))


def default_onset(p: float, epsilon: float = 0.1) -> int:
    """Smallest degree where the thinning approximation is trusted:
    ceil(1/(p epsilon^2))."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    return math.ceil(1.0 / (p * epsilon * epsilon))


@dataclass
class TailEstimate:
    """Partial estimate over 0..max_degree; NaN marks "no estimate"."""

    values: np.ndarray
    start: int
    flat_start: int | None
    max_degree: int
    degenerate_flat: bool = False
    alpha: float | None = None

    def counts(self) -> DegreeCounts:
        return DegreeCounts(self.values)


def _smoothed_lookup(d: np.ndarray, idx: int) -> float:
    """3-point local average around idx, clipped at the vector ends."""
    lo = max(idx - 1, 0)
    hi = min(idx + 2, len(d))
    return float(d[lo:hi].mean())


def asym_estimate(d_hat_s, p: float, j_min: int | None = None,
                  epsilon: float = 0.1) -> TailEstimate:
    """Distribution-free tail estimate by rescaling the sample counts.

    For j_min <= j <= tau_s/p the estimate is p * (d_s(round(p j)) - 1/p)
    floored at 0, where the non-integer index is resolved by rounding with
    a 3-point average (exact lookup when p = 1). Beyond tau_s/p the
    observed flat segment of d_s is stretched over [tau_s/p, J_hat] by
    nearest-index resampling. When tau_s/p >= J_hat the flat stretch is
    degenerate and only the rescaled part is emitted.
    """
    d = as_counts(d_hat_s).values
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    onset = default_onset(p, epsilon) if j_min is None else int(j_min)
    if j_min is not None and j_min < default_onset(p, epsilon):
        raise ValueError(
            f"j_min={j_min} below the trusted onset {default_onset(p, epsilon)} "
            f"for p={p}, epsilon={epsilon}"
        )
    tau_s = estimate_tau_s(d)
    max_sample_degree = int(np.flatnonzero(d > 0).max())
    j_top = estimate_J(max_sample_degree, p)
    rescale_end = int(round(tau_s / p))

    values = np.full(j_top + 1, np.nan)
    degenerate = rescale_end >= j_top
    flat_start = None

    for j in range(onset, min(rescale_end, j_top) + 1):
        idx = int(round(p * j))
        if idx >= len(d):
            break
        level = d[idx] if p == 1.0 else _smoothed_lookup(d, idx)
        values[j] = max(p * (level - 1.0 / p), 0.0)

    if not degenerate:
        flat_start = rescale_end + 1
        span = j_top - rescale_end
        for j in range(flat_start, j_top + 1):
            idx = tau_s + int(round((max_sample_degree - tau_s) / span * (j - rescale_end)))
            values[j] = d[min(idx, len(d) - 1)]

    return TailEstimate(values=values, start=onset, flat_start=flat_start,
                        max_degree=j_top, degenerate_flat=degenerate)


def _cs_log_wr(j: float, alpha: float, N: int, n: int) -> float:
    t1 = 1.0 - (alpha + 1.0) / j
    t2 = 1.0 - alpha / n
    if t1 <= 0 or t2 <= 0:
        raise ValueError(
            f"with-replacement correction undefined at j'={j}: needs j' > alpha+1 and n > alpha"
        )
    return (alpha * math.log(n / N) + 1.0
            + (j - alpha - 0.5) * math.log(t1)
            + (alpha - n + 0.5) * math.log(t2))


def _cs_log_nr(j: float, alpha: float, N: int, n: int) -> float:
    if n >= N:
        raise ValueError("no-replacement correction needs n < N")
    a = 1.0 / (1.0 - n / N)
    if j >= n:
        raise ValueError(f"no-replacement correction undefined at j'={j} >= n={n}")
    b1 = 1.0 + (a - 2.0 * alpha - 1.0) / (2.0 * j * a)
    b2 = 1.0 + (a - alpha) / (a * n)
    b3 = 1.0 + (a + 1.0) / (2.0 * a * (n - j))
    if b1 <= 0 or b2 <= 0 or b3 <= 0:
        raise ValueError(f"no-replacement correction undefined at j'={j} (negative base)")
    return (alpha * math.log(n / N)
            + (a * (j + 0.5) - alpha - 1.0) * math.log(b1)
            + (alpha - a * (1.0 + n) + 0.5) * math.log(b2)
            + a * (n - j + 0.5) * math.log(b3))


def cs_factor(scheme: MatrixScheme, j_prime: int, alpha: float, N: int, n: int) -> float:
    """Scheme-specific tail attenuation factor at sample degree j'.

    Converges to p^alpha = (n/N)^alpha for large j' and n. Raises ValueError
    outside the formula's domain (small j', n close to alpha, or n >= N for
    the no-replacement variants).
    """
    if j_prime < 1:
        raise ValueError("j_prime must be >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if scheme.with_replacement:
        return math.exp(_cs_log_wr(float(j_prime), alpha, N, n))
    return math.exp(_cs_log_nr(float(j_prime), alpha, N, n))


def cs_limit(p: float, alpha: float) -> float:
    """Large-degree limit p^alpha of the attenuation factor."""
    return p ** alpha


@dataclass
class PowerLawFit:
    alpha: float
    amplitude: float  # prefactor of the fitted pmf alpha * j^-(alpha+1)
    j_start: int
    tail_mass: float
    ks_distance: float


def _tail_alpha(degrees: np.ndarray, weights: np.ndarray, j_start: int) -> float:
    # continuous-approximation MLE on degrees >= j_start
    logs = np.log(degrees / (j_start - 0.5))
    return float(weights.sum() / (weights @ logs))


def _ks_distance(degrees: np.ndarray, weights: np.ndarray, j_start: int, alpha: float) -> float:
    # empirical vs fitted Pareto survival on the tail support
    order = np.argsort(degrees)
    x = degrees[order]
    w = weights[order]
    cdf_emp = np.cumsum(w) / w.sum()
    cdf_fit = 1.0 - (x / (j_start - 0.5)) ** (-alpha)
    return float(np.abs(cdf_emp - cdf_fit).max())


def fit_power_law(d_hat_s, j_start: int | None = None) -> PowerLawFit:
    """Tail-index fit on the sample counts.

    The MLE treats each degree value j' as observed count-many times and
    fits the survival exponent alpha (so the count decay is alpha+1). When
    j_start is not given it is chosen among candidate cutoffs to minimize
    the KS distance between the empirical tail and the fitted Pareto. The
    amplitude matches the total observed tail mass.
    """
    d = as_counts(d_hat_s).values
    support = np.flatnonzero(d > 0)
    support = support[support >= 1]
    if support.size == 0:
        raise NumericalError("no positive-degree mass to fit")

    def fit_at(js: int) -> PowerLawFit | None:
        tail = support[support >= js]
        if tail.size < 2:
            return None
        weights = d[tail]
        mass = float(weights.sum())
        if mass < 10:
            return None
        degrees = tail.astype(float)
        alpha = _tail_alpha(degrees, weights, js)
        if not np.isfinite(alpha) or alpha <= 0:
            return None
        norm = float(np.sum(alpha * degrees ** (-alpha - 1.0)))
        amplitude = mass / norm if norm > 0 else np.nan
        ks = _ks_distance(degrees, weights, js, alpha)
        return PowerLawFit(alpha=alpha, amplitude=amplitude, j_start=int(js),
                           tail_mass=mass, ks_distance=ks)

    if j_start is not None:
        if j_start < 1:
            raise ValueError("j_start must be >= 1")
        fit = fit_at(int(j_start))
        if fit is None:
            raise NumericalError(
                f"insufficient tail mass at j_start={j_start} (need >= 10 observations "
                "over >= 2 distinct degrees)"
            )
        return fit

    candidates = [fit_at(int(js)) for js in support]
    candidates = [f for f in candidates if f is not None]
    if not candidates:
        raise NumericalError("insufficient tail mass at every candidate cutoff")
    return min(candidates, key=lambda f: f.ks_distance)


def line_estimate(d_hat_s, p: float, scheme: MatrixScheme, N: int, n: int,
                  alpha: float | None = None, j_min: int | None = None,
                  epsilon: float = 0.1) -> TailEstimate:
    """Power-law tail estimate with scheme-specific attenuation correction.

    Fits alpha on the sample counts unless an external value is supplied.
    The fitted law, divided pointwise by the correction factor (falling
    back to its limit p^alpha outside the factor's domain), covers
    [j_min, tau_hat]; beyond tau_hat the estimate is the flat level 1 up to
    J_hat. tau_hat = round(K1 tau_s) with K1 from the one-count matching
    condition at tau_s.
    """
    d = as_counts(d_hat_s).values
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    base_fit = fit_power_law(d)
    if alpha is None:
        alpha = base_fit.alpha
        amplitude = base_fit.amplitude
    else:
        # keep the fitted cutoff but re-match the tail mass at the external alpha
        tail = np.flatnonzero(d > 0)
        tail = tail[tail >= base_fit.j_start].astype(float)
        norm = float(np.sum(alpha * tail ** (-alpha - 1.0)))
        amplitude = base_fit.tail_mass / norm

    onset = default_onset(p, epsilon) if j_min is None else int(j_min)
    tau_s = estimate_tau_s(d)
    max_sample_degree = int(np.flatnonzero(d > 0).max())
    j_top = estimate_J(max_sample_degree, p)

    def factor(j: int) -> float:
        try:
            return cs_factor(scheme, j, alpha, N, n)
        except ValueError:
            return cs_limit(p, alpha)

    k1 = (float(d[tau_s]) / factor(tau_s)) ** (1.0 / (alpha + 1.0))
    tau_hat = min(int(round(k1 * tau_s)), j_top)

    values = np.full(j_top + 1, np.nan)
    for j in range(onset, tau_hat + 1):
        values[j] = (amplitude / factor(j)) * alpha * j ** (-alpha - 1.0)
    for j in range(max(tau_hat + 1, onset), j_top + 1):
        values[j] = 1.0
    return TailEstimate(values=values, start=onset,
                        flat_start=(tau_hat + 1 if tau_hat < j_top else None),
                        max_degree=j_top, alpha=alpha)


@dataclass
class StitchedEstimate:
    counts: DegreeCounts
    crossover: int
    gap_filled: int
    normalized: bool


def default_crossover(bulk, tail: TailEstimate) -> int:
    """First degree where the bulk estimate hits zero while the tail has a
    positive estimate; falls back to the end of the bulk support."""
    b = as_counts(bulk).values
    t = tail.values
    limit = min(len(b), len(t))
    for j in range(limit):
        if b[j] <= 1e-9 and np.isfinite(t[j]) and t[j] > 0:
            return j
    return len(b)


def stitch(bulk, tail: TailEstimate, crossover: int,
           normalize: bool = False, n_vertices: float | None = None) -> StitchedEstimate:
    """Combine bulk (below crossover) and tail (at and above) estimates.

    Tail entries that are NaN above the crossover count as a gap and are
    zero-filled (reported via ``gap_filled``). With ``normalize`` the
    combined vector is rescaled to sum to ``n_vertices``.
    """
    b = as_counts(bulk).values
    t = tail.values
    length = max(len(b), len(t))
    if not 0 <= crossover <= length:
        raise ValueError(f"crossover {crossover} outside the combined support")
    out = np.zeros(length)
    upto = min(crossover, len(b))
    out[:upto] = b[:upto]
    gap = 0
    for j in range(crossover, length):
        v = t[j] if j < len(t) else np.nan
        if np.isfinite(v):
            out[j] = v
        else:
            out[j] = 0.0
            gap += 1
    normalized = False
    if normalize:
        if n_vertices is None:
            raise ValueError("normalization needs n_vertices")
        total = out.sum()
        if total > 0:
            out *= n_vertices / total
            normalized = True
    return StitchedEstimate(counts=DegreeCounts(out), crossover=crossover,
                            gap_filled=gap, normalized=normalized)
