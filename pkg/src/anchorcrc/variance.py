"""Variance estimators for the case-count estimators.

The 5-cell MLE has three variants:

* ``unadjusted`` -- multinomial delta method, conservative when the target is
  the finite population itself;
* ``fpc1`` -- treats the Stream-1 weight ``w`` as fixed and applies a
  finite population correction to ``p* = n6 / (n15 + n6)``;
* ``fpc2`` -- ``fpc1`` plus a term for the sampling variability of ``w``.

Small-cell fallbacks for the FPC variants:

* rule A: ``n6 = 0`` -> ``p*`` is replaced by ``(n6 + 0.5) / (n15 + n6 + 1)``;
* rule B: ``n6 = n15 = 0`` or ``n15 + n6 = 1`` -> the unadjusted variance is
  returned instead.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .model import CellCounts4, CellCounts5, RsSummary, ValidationError

SMOOTHING = "jeffreys_smoothing"
FALLBACK_A = "fpc_fallback_a"
FALLBACK_B = "fpc_fallback_b"

VARIANTS_5CELL = ("unadjusted", "fpc1", "fpc2")


@dataclass(frozen=True)
class VarianceResult:
    var_N: float
    var_pi: Optional[float]
    variant: str
    fallbacks: tuple[str, ...] = ()

    @property
    def se(self) -> float:
        return float(np.sqrt(self.var_N))


def cell_probabilities(counts: CellCounts5) -> tuple[np.ndarray, bool]:
    """Estimated cell probabilities in (15, 2, 4, 6, 37) order.

    If any cell is empty, all five are replaced by the Jeffreys posterior
    means ``(n_k + 0.5) / (n_tot + 2.5)``. The flag reports whether that
    happened.
    """
    n = counts.as_array().astype(float)
    if counts.has_zero_cell():
        return (n + 0.5) / (counts.n_tot + 2.5), True
    return n / counts.n_tot, False


def delta_gradient(p: np.ndarray) -> np.ndarray:
    """Gradient of the prevalence MLE with respect to (p15, p2, p4, p6, p37)."""
    p15, _, _, p6, p37 = p
    s = p15 + p6
    return np.array(
        [
            -p6 * p37 / s**2,
            1.0,
            1.0,
            1.0 + p37 * p15 / s**2,
            p6 / s,
        ]
    )


def multinomial_covariance(p: np.ndarray, n: int) -> np.ndarray:
    return (np.diag(p) - np.outer(p, p)) / n


def var5_unadjusted(counts: CellCounts5) -> VarianceResult:
    p, smoothed = cell_probabilities(counts)
    d = delta_gradient(p)
    var_pi = float(d @ multinomial_covariance(p, counts.n_tot) @ d)
    var_pi = max(var_pi, 0.0)
    return VarianceResult(
        var_N=counts.n_tot**2 * var_pi,
        var_pi=var_pi,
        variant="unadjusted",
        fallbacks=(SMOOTHING,) if smoothed else (),
    )


def _needs_fallback_b(counts: CellCounts5) -> bool:
    return (counts.n6 == 0 and counts.n15 == 0) or counts.n15 + counts.n6 == 1


def _fpc_p_star(counts: CellCounts5) -> tuple[Fraction, tuple[str, ...]]:
    if counts.n6 == 0:
        return Fraction(1, 2 * (counts.n15 + 1)), (FALLBACK_A,)
    return Fraction(counts.n6, counts.n_rs_star), ()


def _fpc1_var_pi(counts: CellCounts5, p_star: Fraction) -> Fraction:
    # exact rational arithmetic keeps golden values platform-stable
    n_rs, n_pop = counts.n_rs_star, counts.n_tot_star
    fpc = Fraction(n_rs * (n_pop - n_rs), n_pop * (n_rs - 1))
    w = Fraction(counts.n2 + counts.n4, counts.n_tot)
    return (1 - w) ** 2 * fpc * p_star * (1 - p_star) / n_rs


def var5_fpc1(counts: CellCounts5) -> VarianceResult:
    if _needs_fallback_b(counts):
        unadj = var5_unadjusted(counts)
        return VarianceResult(unadj.var_N, unadj.var_pi, "fpc1", unadj.fallbacks + (FALLBACK_B,))
    p_star, flags = _fpc_p_star(counts)
    var_pi = _fpc1_var_pi(counts, p_star)
    return VarianceResult(float(counts.n_tot**2 * var_pi), float(var_pi), "fpc1", flags)


def var5_fpc2(counts: CellCounts5) -> VarianceResult:
    if _needs_fallback_b(counts):
        # rule B replaces the whole FPC2 value, not only its FPC1 summand
        unadj = var5_unadjusted(counts)
        return VarianceResult(unadj.var_N, unadj.var_pi, "fpc2", unadj.fallbacks + (FALLBACK_B,))
    p_star, flags = _fpc_p_star(counts)
    w = Fraction(counts.n2 + counts.n4, counts.n_tot)
    var_pi = _fpc1_var_pi(counts, p_star) + (1 - p_star) ** 2 * w * (1 - w) / counts.n_tot
    return VarianceResult(float(counts.n_tot**2 * var_pi), float(var_pi), "fpc2", flags)


_VAR5 = {"unadjusted": var5_unadjusted, "fpc1": var5_fpc1, "fpc2": var5_fpc2}


def var5(counts: CellCounts5, variant: str) -> VarianceResult:
    try:
        return _VAR5[variant](counts)
    except KeyError:
        raise ValidationError(f"unknown 5-cell variance variant {variant!r}") from None


def var_rs(rs: RsSummary, adjusted: bool) -> VarianceResult:
    """Binomial variance of the anchor-only estimator, optionally with the
    finite population correction ``n_rs (N_tot - n_rs) / (N_tot (n_rs - 1))``."""
    if rs.n_rs == 0:
        raise ValidationError("anchor sample is empty (n_rs = 0)")
    pi = Fraction(rs.n_rs_pos, rs.n_rs)
    var_pi = pi * (1 - pi) / rs.n_rs
    if adjusted:
        if rs.n_rs < 2:
            raise ValidationError("the finite population correction needs n_rs >= 2")
        var_pi *= Fraction(rs.n_rs * (rs.n_tot - rs.n_rs), rs.n_tot * (rs.n_rs - 1))
    return VarianceResult(
        float(rs.n_tot**2 * var_pi),
        float(var_pi),
        "rs_cochran" if adjusted else "rs_unadjusted",
    )


def chapman_variance(n2: int, n4: int, n6: int) -> Fraction:
    return Fraction((n2 + n4 + 1) * (n2 + n6 + 1) * n4 * n6, (n2 + 1) ** 2 * (n2 + 2))


def var_chapman(counts: CellCounts5) -> VarianceResult:
    v = chapman_variance(counts.n2, counts.n4, counts.n6)
    return VarianceResult(float(v), float(v / counts.n_tot**2), "chapman")


def var_4cell(counts: CellCounts4) -> VarianceResult:
    psi = counts.psi
    return VarianceResult(counts.n6 * (1.0 - psi) / psi**2, None, "four_cell")


def var_stratified(tables: Mapping[str, CellCounts5], variant: str) -> VarianceResult:
    """Sum of per-stratum variances of the 5-cell estimator."""
    if not tables:
        raise ValidationError("no strata supplied")
    parts = [var5(t, variant) for t in tables.values()]
    var_N = float(sum(p.var_N for p in parts))
    n_tot = sum(t.n_tot for t in tables.values())
    flags = tuple(sorted({f for p in parts for f in p.fallbacks}))
    return VarianceResult(var_N, var_N / n_tot**2, variant, flags)
