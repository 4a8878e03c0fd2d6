"""Full estimation workflow: every estimator with its SEs and intervals.

Stratified input is handled by estimating within strata and summing, both
for point estimates and for variances. Posterior draws are summed across
strata, so a single stratum reproduces the unstratified analysis exactly.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .estimators import estimate_4cell, estimate_5cell, estimate_chapman, estimate_rs
from .intervals import (
    ADJUSTMENTS,
    logit_chapman,
    percentile_interval,
    posterior_draws_5cell,
    scale_factor,
    wald,
)
from .model import CellCounts4, CellCounts5, EstimateReport, RsSummary, ValidationError
from .randomness import RngStream, as_stream
from .variance import VARIANTS_5CELL, var5, var_4cell, var_chapman, var_rs

METHODS = ("n5", "rs", "chapman", "four_cell")
DEFAULT_METHODS = ("n5", "rs", "chapman")

RS_RECONSTRUCTED = "credible_rs_reconstructed"
LOGIT_UNAVAILABLE = "logit_interval_unstratified_only"
NO_COCHRAN = "cochran_fpc_needs_n_rs_ge_2"


def _as_tables(tables) -> dict[str, CellCounts5]:
    if isinstance(tables, CellCounts5):
        return {"all": tables}
    tables = dict(tables)
    if not tables:
        raise ValidationError("no strata supplied")
    return tables


def _summed_bounds(bounds: Sequence[tuple[int, int]]) -> tuple[int, int]:
    return sum(b[0] for b in bounds), sum(b[1] for b in bounds)


def _report_n5(tables, level, draws, adjustments, stream) -> EstimateReport:
    parts = list(tables.values())
    points = [estimate_5cell(t) for t in parts]
    point = sum(p.N_hat for p in points)
    n_tot = sum(t.n_tot for t in parts)
    bounds = _summed_bounds([t.bounds for t in parts])

    diagnostics = {d for p in points for d in p.diagnostics}
    var_N = {}
    for variant in VARIANTS_5CELL:
        results = [var5(t, variant) for t in parts]
        var_N[variant] = sum(r.var_N for r in results)
        diagnostics.update(f for r in results for f in r.fallbacks)

    report = EstimateReport("N5", point, point / n_tot, level=level)
    for variant in VARIANTS_5CELL:
        se = float(np.sqrt(var_N[variant]))
        report.se[variant] = se
        report.intervals[f"wald/{variant}"] = wald(point, se, level, bounds, f"wald/{variant}")

    if draws > 0 and adjustments:
        raw = sum(posterior_draws_5cell(t, draws, stream) for t in parts)
        for adj in adjustments:
            if adj == "none":
                a = 1.0
            else:
                a = scale_factor(var_N[adj], var_N["unadjusted"])
            name = "credible/unadjusted" if adj == "none" else f"credible/{adj}"
            shifted = a * raw + point * (1.0 - a)
            report.intervals[name] = percentile_interval(shifted, level, bounds, name)
    report.diagnostics = sorted(diagnostics)
    return report


def _report_rs(tables, level, draws, stream) -> EstimateReport:
    summaries = [RsSummary.from_counts(t) for t in tables.values()]
    point = sum(estimate_rs(s).N_hat for s in summaries)
    n_tot = sum(s.n_tot for s in summaries)
    bounds = _summed_bounds([s.bounds for s in summaries])
    report = EstimateReport("RS", point, point / n_tot, level=level)

    var_unadj = sum(var_rs(s, False).var_N for s in summaries)
    report.se["unadjusted"] = float(np.sqrt(var_unadj))
    report.intervals["wald/unadjusted"] = wald(
        point, report.se["unadjusted"], level, bounds, "wald/unadjusted"
    )
    if any(s.n_rs < 2 for s in summaries):
        report.diagnostics.append(NO_COCHRAN)
        return report

    var_adj = sum(var_rs(s, True).var_N for s in summaries)
    report.se["cochran_fpc"] = float(np.sqrt(var_adj))
    report.intervals["wald/cochran"] = wald(
        point, report.se["cochran_fpc"], level, bounds, "wald/cochran"
    )
    if draws > 0:
        raw = sum(
            s.n_tot * stream.beta(s.n_rs_pos + 0.5, s.n_rs - s.n_rs_pos + 0.5, draws)
            for s in summaries
        )
        a = scale_factor(var_adj, var_unadj)
        report.intervals["credible/cochran"] = percentile_interval(
            a * raw + point * (1.0 - a), level, bounds, "credible/cochran"
        )
        report.diagnostics.append(RS_RECONSTRUCTED)
    return report


def _report_chapman(tables, level) -> EstimateReport:
    parts = list(tables.values())
    point = sum(estimate_chapman(t).N_hat for t in parts)
    n_tot = sum(t.n_tot for t in parts)
    report = EstimateReport("Chapman", point, point / n_tot, level=level)
    report.se["chapman"] = float(np.sqrt(sum(var_chapman(t).var_N for t in parts)))
    if len(parts) == 1:
        report.intervals["logit"] = logit_chapman(parts[0], level, parts[0].bounds)
    else:
        report.diagnostics.append(LOGIT_UNAVAILABLE)
    return report


def _report_4cell(tables, level, psi) -> EstimateReport:
    point = var_N = 0.0
    n_tot = 0
    for t in tables.values():
        p = psi if psi is not None else RsSummary.from_counts(t).n_rs / t.n_tot
        c4 = CellCounts4(t.n2, t.n4, t.n6, p)
        point += estimate_4cell(c4).N_hat
        var_N += var_4cell(c4).var_N
        n_tot += t.n_tot
    report = EstimateReport("N4", point, point / n_tot, level=level)
    report.se["four_cell"] = float(np.sqrt(var_N))
    report.intervals["wald/four_cell"] = wald(
        point, report.se["four_cell"], level, None, "wald/four_cell"
    )
    return report


def analyze(
    tables: CellCounts5 | Mapping[str, CellCounts5],
    draws: int = 10_000,
    level: float = 0.95,
    seed: int | RngStream = 0,
    adjustments: Sequence[str] = ADJUSTMENTS,
    methods: Sequence[str] = DEFAULT_METHODS,
    psi: Optional[float] = None,
) -> list[EstimateReport]:
    """Run the requested estimators on one table or a stratified set.

    ``draws`` is the number of posterior draws per credible interval (0
    skips them). ``psi`` fixes the anchor sampling probability for the
    4-cell estimator; by default it is ``n_rs / n_tot``.
    """
    tables = _as_tables(tables)
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValidationError(f"unknown methods {sorted(unknown)}")
    bad = set(adjustments) - set(ADJUSTMENTS)
    if bad:
        raise ValidationError(f"unknown adjustments {sorted(bad)}")
    if draws < 0:
        raise ValidationError("draws must be non-negative")
    stream = as_stream(seed)

    reports = []
    if "n5" in methods:
        reports.append(_report_n5(tables, level, draws, adjustments, stream))
    if "rs" in methods:
        reports.append(_report_rs(tables, level, draws, stream))
    if "chapman" in methods:
        reports.append(_report_chapman(tables, level))
    if "four_cell" in methods:
        reports.append(_report_4cell(tables, level, psi))
    return reports


@dataclass
class AnalysisConfig:
    """Settings for :func:`run_analysis`."""

    input: Path | str
    mode: str = "counts"
    methods: tuple[str, ...] = DEFAULT_METHODS
    level: float = 0.95
    draws: int = 10_000
    seed: int = 0
    adjustments: tuple[str, ...] = ADJUSTMENTS
    stratify_by: Optional[str] = None
    population: Optional[int | dict[str, int]] = None
    psi: Optional[float] = None
    output_format: str = "json"
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in ("counts", "records"):
            raise ValidationError(f"unknown input mode {self.mode!r}")
        if self.draws < 1:
            raise ValidationError("draws must be at least 1")
        if not 0.0 < self.level < 1.0:
            raise ValidationError("level must lie in (0, 1)")
        if self.output_format not in ("json", "csv", "markdown"):
            raise ValidationError(f"unknown output format {self.output_format!r}")


def load_tables(config: AnalysisConfig) -> dict[str, CellCounts5]:
    from .formats import parse_counts, parse_records
    from .model import tabulate

    if config.mode == "counts":
        counts = parse_counts(config.input)
        if counts.n6 == 0:
            config.notes.append("n6 is zero; FPC fallback rules will engage")
        return {"all": counts}

    records, excluded = parse_records(
        config.input, stratum_column=config.stratify_by or "stratum", with_exclusions=True
    )
    if excluded:
        config.notes.append(f"{excluded} unvalidated Stream-1 flags were excluded")
    if config.population is None:
        raise ValidationError("records input needs the population size")
    if config.stratify_by:
        if not isinstance(config.population, Mapping):
            raise ValidationError("stratified records input needs a population size per stratum")
        return tabulate(records, config.population, by_stratum=True)
    return {"all": tabulate(records, config.population)}


def run_analysis(config: AnalysisConfig) -> str:
    """Load input, run the analysis, and render it in the configured format."""
    from .formats import render_reports

    tables = load_tables(config)
    reports = analyze(
        tables,
        draws=config.draws,
        level=config.level,
        seed=config.seed,
        adjustments=config.adjustments,
        methods=config.methods,
        psi=config.psi,
    )
    for r in reports:
        r.diagnostics.extend(config.notes)
    return render_reports(reports, config.output_format)
