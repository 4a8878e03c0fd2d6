"""Point estimators of the number of cases."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import CellCounts4, CellCounts5, CellCounts7, RsSummary, ValidationError


@dataclass(frozen=True)
class PointEstimate:
    """Estimated case count ``N_hat`` and prevalence ``pi_hat``.

    For the 5-cell MLE, ``weight`` and ``p_star`` hold the decomposition
    ``pi_hat = weight + (1 - weight) * p_star``.
    """

    N_hat: float
    pi_hat: Optional[float]
    weight: Optional[float] = None
    p_star: Optional[float] = None
    diagnostics: tuple[str, ...] = ()


def _ratio_term(n6: int, n_rs_star: int, n_tot_star: int) -> float:
    # n6 * N_tot* / n_rs*, with the n6 = 0 limit taken as 0 (covers n_rs* = 0)
    if n6 == 0:
        return 0.0
    return n6 * (n_tot_star / n_rs_star)


def estimate_5cell(counts: CellCounts5) -> PointEstimate:
    """MLE of N from the 5-cell table.

    ``N_hat = n2 + n4 + n6 * (n15 + n6 + n37) / (n15 + n6)``. When ``n6 = 0``
    the last term is taken as zero and ``p_star`` is reported as 0.
    """
    c = counts
    n_hat = c.n2 + c.n4 + _ratio_term(c.n6, c.n_rs_star, c.n_tot_star)
    diagnostics = ()
    if c.n6 == 0:
        p_star = 0.0
        diagnostics = ("p_star_zero",)
    else:
        p_star = c.n6 / c.n_rs_star
    return PointEstimate(
        N_hat=n_hat,
        pi_hat=n_hat / c.n_tot,
        weight=(c.n2 + c.n4) / c.n_tot,
        p_star=p_star,
        diagnostics=diagnostics,
    )


def pi5_weighted(counts: CellCounts5) -> float:
    """Prevalence MLE evaluated as ``w + (1 - w) p*``."""
    w = (counts.n2 + counts.n4) / counts.n_tot
    p_star = counts.n6 / counts.n_rs_star if counts.n6 else 0.0
    return w + (1.0 - w) * p_star


def pi5_recorded(counts: CellCounts5) -> float:
    """Prevalence MLE evaluated on the recorded scale.

    Mixes the prevalence among those not recorded by Stream 1 with the
    prevalence (one) among those recorded.
    """
    phi_r = (counts.n2 + counts.n4) / counts.n_tot
    pi_rbar1 = counts.n6 / counts.n_rs_star if counts.n6 else 0.0
    pi_r1 = 1.0
    return pi_rbar1 * (1.0 - phi_r) + pi_r1 * phi_r


def estimate_rs(rs: RsSummary) -> PointEstimate:
    """Anchor-sample-only estimator ``N_tot * n_rs_pos / n_rs``."""
    if rs.n_rs == 0:
        raise ValidationError("anchor sample is empty (n_rs = 0)")
    pi_hat = rs.n_rs_pos / rs.n_rs
    return PointEstimate(N_hat=rs.n_tot * pi_hat, pi_hat=pi_hat)


def chapman(n2: int, n4: int, n6: int) -> Fraction:
    return Fraction((n2 + n4 + 1) * (n2 + n6 + 1), n2 + 1) - 1


def estimate_chapman(counts: CellCounts5) -> PointEstimate:
    """Chapman's bias-corrected Lincoln-Petersen estimator.

    Stream 1 captures ``n2 + n4`` cases, the anchor captures ``n2 + n6`` and
    ``n2`` are captured by both.
    """
    n_hat = float(chapman(counts.n2, counts.n4, counts.n6))
    return PointEstimate(N_hat=n_hat, pi_hat=n_hat / counts.n_tot)


def estimate_4cell(counts: CellCounts4) -> PointEstimate:
    """Inverse-probability MLE ``n2 + n4 + n6 / psi`` with known ``psi``."""
    return PointEstimate(N_hat=counts.n2 + counts.n4 + counts.n6 / counts.psi, pi_hat=None)


def estimate_7cell(counts: CellCounts7) -> PointEstimate:
    c = counts
    n_hat = c.n2 + c.n4 + _ratio_term(c.n6, c.n5 + c.n6, c.n5 + c.n6 + c.n7)
    n_tot = c.n_tot
    return PointEstimate(N_hat=n_hat, pi_hat=n_hat / n_tot if n_tot else None)


def stratified_estimate(tables: Mapping[str, CellCounts5]) -> PointEstimate:
    """Sum of per-stratum 5-cell estimates.

    Strata are treated as self-contained; nothing is pooled across them.
    """
    if not tables:
        raise ValidationError("no strata supplied")
    parts = [estimate_5cell(t) for t in tables.values()]
    n_hat = sum(p.N_hat for p in parts)
    n_tot = sum(t.n_tot for t in tables.values())
    diagnostics = tuple(sorted({d for p in parts for d in p.diagnostics}))
    return PointEstimate(N_hat=n_hat, pi_hat=n_hat / n_tot, diagnostics=diagnostics)
