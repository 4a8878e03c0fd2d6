"""Estimating the number of cases in the CRISP cohort.

Run:  python notebooks/01_crisp_analysis.py
"""

from pathlib import Path

from anchorcrc import CellCounts4, RsSummary, analyze, estimate_4cell, stratified_estimate
from anchorcrc.formats import parse_counts, render_reports

counts = parse_counts(Path(__file__).with_name("data") / "crisp_counts.txt")
print(counts)

# 83 cases are observed directly (n2 + n4 + n6); the anchor sample adds an
# estimate of the cases Stream 1 never recorded.
print(f"observed cases n_c = {counts.n_c}, logical range {counts.bounds}")

# Full workflow: point estimates, three variance flavours, Wald and credible
# intervals, plus the anchor-only and Chapman comparators.
reports = analyze(counts, draws=100_000, seed=2024)
print(render_reports(reports, "markdown"))

# Treating the anchor as a Bernoulli(psi) sample instead of a fixed-size
# draw gives the 4-cell inverse-probability estimate, which ignores n15/n37.
psi = RsSummary.from_counts(counts).n_rs / counts.n_tot
four = estimate_4cell(CellCounts4(counts.n2, counts.n4, counts.n6, psi))
print(f"4-cell estimate with psi={psi:.4f}: {four.N_hat:.2f}")

# Splitting the cohort into strata and summing does not reproduce the pooled
# answer: the ratio term is not collapsible.
a = counts.__class__(100, 4, 30, 15, 400, 549)
b = counts.__class__(69, 8, 22, 4, 377, 480)
split = stratified_estimate({"wing A": a, "wing B": b})
print(f"two-stratum estimate {split.N_hat:.2f} vs pooled {reports[0].point_N:.2f}")
