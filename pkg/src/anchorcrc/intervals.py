"""Wald, adapted Bayesian credible, and transformed-logit intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

from .estimators import estimate_5cell
from .model import CellCounts5, Interval, RsSummary, ValidationError
from .randomness import RngStream, as_stream
from .variance import var5, var_rs

_Z = {
    0.90: 1.6448536269514722,
    0.95: 1.959963984540054,
    0.99: 2.5758293035489004,
}

ADJUSTMENTS = ("none", "fpc1", "fpc2")


def z_quantile(level: float) -> float:
    """Two-sided standard normal critical value for a coverage ``level``."""
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level must lie in (0, 1), got {level}")
    z = _Z.get(round(level, 12))
    if z is None:
        z = float(norm.ppf(0.5 + level / 2.0))
    return z


def _clip(lo: float, hi: float, bounds) -> tuple[float, float, bool, bool]:
    if bounds is None:
        return lo, hi, False, False
    b_lo, b_hi = bounds
    new_lo = min(max(lo, b_lo), b_hi)
    new_hi = max(min(hi, b_hi), b_lo)
    return new_lo, new_hi, new_lo != lo, new_hi != hi


def wald(
    point: float,
    se: float,
    level: float = 0.95,
    bounds: Optional[tuple[float, float]] = None,
    method: str = "wald",
) -> Interval:
    """``point -/+ z * se``, clipped to ``bounds`` when given."""
    if se < 0:
        raise ValidationError("standard error must be non-negative")
    z = z_quantile(level)
    lo, hi, t_lo, t_hi = _clip(point - z * se, point + z * se, bounds)
    return Interval(lo, hi, level, method, t_lo, t_hi)


def scale_factor(var_adjusted: float, var_unadjusted: float) -> float:
    """Shrink factor ``min(sqrt(var_adjusted / var_unadjusted), 1)``."""
    if var_unadjusted <= 0.0:
        return 1.0
    return min(math.sqrt(var_adjusted / var_unadjusted), 1.0)


def percentile_interval(
    draws: np.ndarray,
    level: float,
    bounds: Optional[tuple[float, float]],
    method: str,
) -> Interval:
    """Equal-tailed percentile interval of (optionally truncated) draws.

    Percentiles use order statistics with linear interpolation between the
    closest ranks.
    """
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level must lie in (0, 1), got {level}")
    draws = np.asarray(draws, dtype=float)
    t_lo = t_hi = False
    if bounds is not None:
        t_lo = bool(np.any(draws < bounds[0]))
        t_hi = bool(np.any(draws > bounds[1]))
        draws = np.clip(draws, bounds[0], bounds[1])
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(draws, [tail, 1.0 - tail])
    return Interval(float(lo), float(hi), level, method, t_lo, t_hi)


@dataclass(frozen=True)
class CredibleDraws:
    """Shift-and-scaled posterior draws ``a * x + b`` (before truncation)."""

    draws: np.ndarray
    a: float
    b: float
    seed: Optional[int]


def posterior_draws_5cell(counts: CellCounts5, M: int, stream: RngStream) -> np.ndarray:
    """Posterior draws of N under a Dirichlet(n + 1/2) posterior on the cells."""
    if M < 1:
        raise ValidationError("number of posterior draws must be positive")
    p = stream.dirichlet(counts.as_array() + 0.5, size=M)
    p15, p2, p4, p6, p37 = p.T
    return counts.n_tot * (p2 + p4 + p6 * ((p15 + p6 + p37) / (p15 + p6)))


def credible_5cell(
    counts: CellCounts5,
    M: int = 10_000,
    adjustment: str = "fpc1",
    level: float = 0.95,
    seed: int | RngStream = 0,
    raw_draws: Optional[np.ndarray] = None,
) -> tuple[Interval, CredibleDraws]:
    """Adapted Bayesian credible interval for the 5-cell estimator.

    Posterior draws are shrunk toward the MLE by ``a = min(sqrt(V_adj /
    V_unadj), 1)`` with shift ``b = N_hat (1 - a)``, truncated to
    ``[n_c, n_tot - n15]``, and summarized by percentiles. Pass
    ``raw_draws`` to reuse one set of posterior draws across adjustments.
    """
    if adjustment not in ADJUSTMENTS:
        raise ValidationError(f"unknown adjustment {adjustment!r}")
    stream = as_stream(seed)
    if raw_draws is None:
        raw_draws = posterior_draws_5cell(counts, M, stream)
    point = estimate_5cell(counts).N_hat
    if adjustment == "none":
        a = 1.0
    else:
        a = scale_factor(var5(counts, adjustment).var_N, var5(counts, "unadjusted").var_N)
    b = point * (1.0 - a)
    shifted = a * raw_draws + b
    interval = percentile_interval(shifted, level, counts.bounds, f"credible/{adjustment}")
    seed_id = None if isinstance(seed, RngStream) else int(seed)
    return interval, CredibleDraws(shifted, a, b, seed_id)


def credible_rs(
    rs: RsSummary,
    M: int = 10_000,
    level: float = 0.95,
    seed: int | RngStream = 0,
    adjusted: bool = True,
) -> Interval:
    """Jeffreys-prior credible interval for the anchor-only estimator.

    Draws ``N_tot * Beta(n_rs_pos + 1/2, n_rs - n_rs_pos + 1/2)``; the
    adjusted version shrinks them toward ``N_hat_RS`` by the square root of
    the finite population correction, then truncates to the logical range.
    """
    if M < 1:
        raise ValidationError("number of posterior draws must be positive")
    stream = as_stream(seed)
    draws = rs.n_tot * stream.beta(rs.n_rs_pos + 0.5, rs.n_rs - rs.n_rs_pos + 0.5, M)
    if adjusted:
        point = rs.n_tot * rs.n_rs_pos / rs.n_rs
        a = scale_factor(var_rs(rs, True).var_N, var_rs(rs, False).var_N)
        draws = a * draws + point * (1.0 - a)
    method = "credible/cochran" if adjusted else "credible/unadjusted"
    return percentile_interval(draws, level, rs.bounds, method)


def logit_chapman(
    counts: CellCounts5,
    level: float = 0.95,
    bounds: Optional[tuple[float, float]] = None,
) -> Interval:
    """Transformed-logit interval accompanying Chapman's estimator.

    With ``m = n2`` captured by both streams and ``n = n2 + n4 + n6``
    distinct cases observed, the unobserved count is estimated as
    ``f0 = (n4 + .5)(n6 + .5) / (n2 + .5)`` and its log is treated as
    normal with variance ``1/(n2+.5) + 1/(n4+.5) + 1/(n6+.5) + 1/f0``. The
    interval is ``n - 0.5 + f0 * exp(-/+ z * sigma)``. The half-cell
    corrections keep it defined when ``n4`` or ``n6`` is zero.
    """
    z = z_quantile(level)
    n2, n4, n6 = counts.n2 + 0.5, counts.n4 + 0.5, counts.n6 + 0.5
    f0 = n4 * n6 / n2
    sigma = math.sqrt(1.0 / n2 + 1.0 / n4 + 1.0 / n6 + 1.0 / f0)
    base = counts.n_c - 0.5
    lo = base + f0 * math.exp(-z * sigma)
    hi = base + f0 * math.exp(z * sigma)
    lo, hi, t_lo, t_hi = _clip(lo, hi, bounds)
    return Interval(lo, hi, level, "logit", t_lo, t_hi)
