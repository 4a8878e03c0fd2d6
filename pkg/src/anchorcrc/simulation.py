"""Monte Carlo engine for coverage and precision studies.

Each replication builds a closed population with exactly ``n_true`` cases,
assigns symptom status and non-representative Stream-1 sampling that depends
on symptoms, draws a fixed-size anchor sample without replacement, and runs
every estimator. Replication ``i`` uses ``RngStream(master_seed, i)`` so the
summary does not depend on the number of workers.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .analysis import RS_RECONSTRUCTED, analyze
from .model import CellCounts5, ValidationError
from .randomness import RngStream


# notes attached to every replication; not counted as fallbacks
INFORMATIONAL = frozenset({RS_RECONSTRUCTED})


@dataclass(frozen=True)
class SimScenario:
    """Generative settings for one simulation cell."""

    n_tot: int
    n_true: int
    anchor_size: int
    p_symp_case: float = 0.6
    p_symp_noncase: float = 0.1
    p_s1_symp: float = 0.5
    p_s1_asymp: float = 0.2
    replications: int = 10_000
    credible_draws: int = 10_000
    master_seed: int = 1
    level: float = 0.95
    name: str = ""

    def __post_init__(self):
        if self.n_tot < 1:
            raise ValidationError("n_tot must be positive")
        if not 0 <= self.n_true <= self.n_tot:
            raise ValidationError("n_true must lie in [0, n_tot]")
        if not 1 <= self.anchor_size <= self.n_tot:
            raise ValidationError("anchor_size must lie in [1, n_tot]")
        for p in ("p_symp_case", "p_symp_noncase", "p_s1_symp", "p_s1_asymp"):
            if not 0.0 <= getattr(self, p) <= 1.0:
                raise ValidationError(f"{p} must lie in [0, 1]")
        if self.replications < 1:
            raise ValidationError("replications must be positive")
        if self.credible_draws < 0:
            raise ValidationError("credible_draws must be non-negative")
        if not 0.0 < self.level < 1.0:
            raise ValidationError("level must lie in (0, 1)")

    @property
    def psi(self) -> float:
        return self.anchor_size / self.n_tot

    @property
    def p_recorded_case(self) -> float:
        """Probability that a case is recorded by Stream 1."""
        return self.p_symp_case * self.p_s1_symp + (1 - self.p_symp_case) * self.p_s1_asymp

    def with_(self, **changes) -> SimScenario:
        return replace(self, **changes)


def generate_population(scenario: SimScenario, stream: RngStream) -> dict[str, np.ndarray]:
    """Individual-level flags for one replication.

    Individuals ``0 .. n_true - 1`` are the cases; the anchor sample is
    exchangeable so labelling is immaterial.
    """
    s = scenario
    case = np.zeros(s.n_tot, dtype=bool)
    case[: s.n_true] = True
    symptomatic = stream.bernoulli(np.where(case, s.p_symp_case, s.p_symp_noncase))
    sampled = stream.bernoulli(np.where(symptomatic, s.p_s1_symp, s.p_s1_asymp))
    anchor = np.zeros(s.n_tot, dtype=bool)
    anchor[stream.srswor(s.n_tot, s.anchor_size)] = True
    return {
        "case": case,
        "symptomatic": symptomatic,
        "stream1_sampled": sampled,
        # sampled non-cases test negative and leave no Stream-1 record
        "stream1_recorded": sampled & case,
        "anchor": anchor,
    }


def cells_from_population(pop: dict[str, np.ndarray]) -> CellCounts5:
    case, rec, anchor = pop["case"], pop["stream1_recorded"], pop["anchor"]
    n15 = int(np.count_nonzero(anchor & ~case))
    n2 = int(np.count_nonzero(anchor & rec))
    n4 = int(np.count_nonzero(~anchor & rec))
    n6 = int(np.count_nonzero(anchor & case & ~rec))
    n_tot = case.size
    return CellCounts5(n15, n2, n4, n6, n_tot - n15 - n2 - n4 - n6, n_tot)


def generate_replication(scenario: SimScenario, stream: RngStream) -> CellCounts5:
    return cells_from_population(generate_population(scenario, stream))


def replicate(scenario: SimScenario, index: int) -> dict:
    """Run one replication and flatten its reports into a row."""
    stream = RngStream(scenario.master_seed, index)
    counts = generate_replication(scenario, stream)
    reports = analyze(
        counts, draws=scenario.credible_draws, level=scenario.level, seed=stream
    )
    row = {"counts": counts, "values": {}, "diagnostics": set()}
    for r in reports:
        row["values"][(r.method, "point")] = r.point_N
        for k, v in r.se.items():
            row["values"][(r.method, "se", k)] = v
        for k, iv in r.intervals.items():
            row["values"][(r.method, "interval", k)] = (iv.lower, iv.upper)
        row["diagnostics"].update(
            f"{r.method}:{d}" for d in r.diagnostics if d not in INFORMATIONAL
        )
    return row


@dataclass
class EstimatorSummary:
    """One estimator's row group: Mean (SD) [avg. SE] and CI coverage [avg. width]."""

    mean: float
    sd: float
    avg_se: dict[str, float] = field(default_factory=dict)
    coverage: dict[str, float] = field(default_factory=dict)
    avg_width: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "sd": self.sd,
            "avg_se": dict(self.avg_se),
            "coverage": dict(self.coverage),
            "avg_width": dict(self.avg_width),
        }


@dataclass
class SimSummary:
    scenario: SimScenario
    replications: int
    estimators: dict[str, EstimatorSummary]
    fallback_counts: dict[str, int]

    def to_dict(self) -> dict:
        s = self.scenario
        return {
            "scenario": {
                "name": s.name,
                "n_tot": s.n_tot,
                "n_true": s.n_true,
                "anchor_size": s.anchor_size,
                "p_symp_case": s.p_symp_case,
                "p_symp_noncase": s.p_symp_noncase,
                "p_s1_symp": s.p_s1_symp,
                "p_s1_asymp": s.p_s1_asymp,
                "credible_draws": s.credible_draws,
                "master_seed": s.master_seed,
                "level": s.level,
            },
            "replications": self.replications,
            "estimators": {k: v.to_dict() for k, v in self.estimators.items()},
            "fallback_counts": dict(self.fallback_counts),
        }


def _nan_mean(x: np.ndarray) -> float:
    x = x[~np.isnan(x)]
    return float(x.mean()) if x.size else math.nan


def summarize(scenario: SimScenario, rows: list[dict]) -> SimSummary:
    """Reduce per-replication rows (in replication order) to a summary."""
    truth = scenario.n_true
    keys = []
    for row in rows:
        for k in row["values"]:
            if k not in keys:
                keys.append(k)
    methods = []
    for k in keys:
        if k[0] not in methods:
            methods.append(k[0])

    estimators = {}
    for m in methods:
        points = np.array([row["values"].get((m, "point"), math.nan) for row in rows])
        sd = float(np.std(points, ddof=1)) if len(rows) > 1 else math.nan
        summary = EstimatorSummary(mean=_nan_mean(points), sd=sd)
        for k in keys:
            if k[0] != m or k[1] == "point":
                continue
            if k[1] == "se":
                se = np.array([row["values"].get(k, math.nan) for row in rows])
                summary.avg_se[k[2]] = _nan_mean(se)
            else:
                bounds = np.array([row["values"].get(k, (math.nan, math.nan)) for row in rows])
                lo, hi = bounds[:, 0], bounds[:, 1]
                ok = ~np.isnan(lo)
                covered = (lo[ok] <= truth) & (truth <= hi[ok])
                summary.coverage[k[2]] = float(covered.mean()) if ok.any() else math.nan
                summary.avg_width[k[2]] = float((hi[ok] - lo[ok]).mean()) if ok.any() else math.nan
        estimators[m] = summary

    fallback_counts: dict[str, int] = defaultdict(int)
    for row in rows:
        for d in row["diagnostics"]:
            fallback_counts[d] += 1
    return SimSummary(scenario, len(rows), estimators, dict(sorted(fallback_counts.items())))


def run_scenario(
    scenario: SimScenario,
    workers: int = 1,
    replications: Optional[int] = None,
) -> SimSummary:
    """Replicate a scenario and summarize bias, SD, SEs, coverage and width.

    ``workers`` threads share the replications; results are identical for
    any worker count.
    """
    if replications is not None:
        scenario = scenario.with_(replications=replications)
    indices = range(scenario.replications)
    if workers <= 1:
        rows = [replicate(scenario, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda i: replicate(scenario, i), indices))
    return summarize(scenario, rows)


@dataclass
class ConditionalCheck:
    """Result of exhaustively enumerating a tiny scenario.

    ``table`` maps each margin ``(n_rs*, N_tot*)`` to the enumerated
    conditional distribution of ``n6``.
    """

    max_pmf_discrepancy: float
    max_variance_bias: float
    table: dict[tuple[int, int], dict[int, float]]
    hypergeometric: dict[tuple[int, int], dict[int, float]]


def _hypergeom_pmf(k: int, pop: int, successes: int, draws: int) -> Fraction:
    if k < 0 or k > successes or draws - k > pop - successes or draws - k < 0:
        return Fraction(0)
    return Fraction(
        math.comb(successes, k) * math.comb(pop - successes, draws - k), math.comb(pop, draws)
    )


MAX_ENUMERATION = 1_000_000


def exact_conditional_check(
    n_tot: int,
    n_true: int,
    anchor_size: int,
    p_symp_case: float = 0.6,
    p_symp_noncase: float = 0.1,
    p_s1_symp: float = 0.5,
    p_s1_asymp: float = 0.2,
) -> ConditionalCheck:
    """Enumerate every Stream-1 outcome and anchor subset of a tiny population.

    Checks that, given ``n_rs* = n15 + n6`` and ``N_tot* = n15 + n6 + n37``,
    ``n6`` is hypergeometric with ``N_tot* - (n_tot - n_true)`` successes,
    and that the finite-population variance estimate of ``p* = n6 / n_rs*``
    is conditionally unbiased. Non-cases never enter a Stream-1 cell, so only
    the cases' symptom/sampling outcomes are enumerated. Arithmetic is exact
    (rational), so the reported discrepancies are exactly zero when the
    identities hold.
    """
    if n_tot > 25:
        raise ValidationError("enumeration scale exceeded (n_tot > 25)")
    if not 0 <= n_true <= n_tot or not 0 <= anchor_size <= n_tot:
        raise ValidationError("need 0 <= n_true, anchor_size <= n_tot")
    work = 4**n_true + 2**n_true * math.comb(n_tot, anchor_size)
    if work > MAX_ENUMERATION:
        raise ValidationError(f"enumeration scale exceeded ({work} configurations)")

    p_symp, p_s1, p_s0 = Fraction(p_symp_case), Fraction(p_s1_symp), Fraction(p_s1_asymp)
    # probability of each subset of cases being the Stream-1 recorded set
    outcome = {
        (True, True): p_symp * p_s1,
        (True, False): p_symp * (1 - p_s1),
        (False, True): (1 - p_symp) * p_s0,
        (False, False): (1 - p_symp) * (1 - p_s0),
    }
    recorded_prob: dict[int, Fraction] = defaultdict(Fraction)
    for config in itertools.product(outcome, repeat=n_true):
        prob, mask = Fraction(1), 0
        for i, (symp, sampled) in enumerate(config):
            prob *= outcome[(symp, sampled)]
            if sampled:
                mask |= 1 << i
        recorded_prob[mask] += prob
    recorded_prob = {m: p for m, p in recorded_prob.items() if p}

    cases = (1 << n_true) - 1
    # anchor subsets enter only through (n15, cases in the anchor)
    anchor_counts: dict[tuple[int, int], int] = defaultdict(int)
    for members in itertools.combinations(range(n_tot), anchor_size):
        a = 0
        for j in members:
            a |= 1 << j
        anchor_counts[(a & ~cases).bit_count(), a & cases] += 1
    n_subsets = math.comb(n_tot, anchor_size)

    joint: dict[tuple[int, int], dict[int, Fraction]] = defaultdict(lambda: defaultdict(Fraction))
    for (n15, in_anchor), count in anchor_counts.items():
        for rec, prob in recorded_prob.items():
            n6 = (in_anchor & ~rec).bit_count()
            margin = (n15 + n6, n_tot - rec.bit_count())
            joint[margin][n6] += prob * Fraction(count, n_subsets)

    max_pmf, max_bias = Fraction(0), Fraction(0)
    table, hyper = {}, {}
    for (n_rs, pop), dist in sorted(joint.items()):
        total = sum(dist.values())
        if total == 0:
            continue
        cond = {k: v / total for k, v in sorted(dist.items())}
        successes = n_true - (n_tot - pop)
        ref = {k: _hypergeom_pmf(k, pop, successes, n_rs) for k in range(n_rs + 1)}
        for k in set(cond) | set(ref):
            max_pmf = max(max_pmf, abs(cond.get(k, 0) - ref.get(k, 0)))
        table[(n_rs, pop)] = {k: float(v) for k, v in cond.items()}
        hyper[(n_rs, pop)] = {k: float(v) for k, v in ref.items() if v > 0}
        if n_rs >= 2:
            mean = sum(p * Fraction(k, n_rs) for k, p in cond.items())
            var = sum(p * (Fraction(k, n_rs) - mean) ** 2 for k, p in cond.items())
            factor = Fraction(pop - n_rs, pop * (n_rs - 1))
            expected_vhat = sum(
                p * factor * Fraction(k, n_rs) * (1 - Fraction(k, n_rs)) for k, p in cond.items()
            )
            max_bias = max(max_bias, abs(expected_vhat - var))
    return ConditionalCheck(float(max_pmf), float(max_bias), table, hyper)
