"""Where the finite-population corrections come from, term by term.

The anchor is a simple random sample drawn without replacement from a known
population, so the binomial-style delta-method variance overstates the
uncertainty. This script decomposes the corrected variances for CRISP and
then shows the zero-cell fallbacks on sparse tables.
"""

from fractions import Fraction

from anchorcrc import CellCounts5, var5_fpc1, var5_fpc2, var5_unadjusted

crisp = CellCounts5(169, 12, 52, 19, 777, 1029)

w = Fraction(crisp.n2 + crisp.n4, crisp.n_tot)  # share recorded by Stream 1
n_star, pop_star = crisp.n_rs_star, crisp.n_tot_star  # anchor / pool outside Stream 1
p_star = Fraction(crisp.n6, n_star)
fpc = Fraction(n_star * (pop_star - n_star), pop_star * (n_star - 1))
print(f"w = {w} = {float(w):.4f}")
print(f"p* = {p_star} = {float(p_star):.4f}")
print(f"FPC factor = {fpc} = {float(fpc):.4f}")

fpc1 = crisp.n_tot**2 * (1 - w) ** 2 * fpc * p_star * (1 - p_star) / n_star
extra = crisp.n_tot**2 * (1 - p_star) ** 2 * w * (1 - w) / crisp.n_tot
print(f"FPC1 variance {float(fpc1):.2f}  (library: {var5_fpc1(crisp).var_N:.2f})")
print(f"FPC2 adds {float(extra):.2f} for the randomness in w")
print(f"SEs: unadjusted {var5_unadjusted(crisp).se:.2f}, "
      f"FPC1 {var5_fpc1(crisp).se:.2f}, FPC2 {var5_fpc2(crisp).se:.2f}")

# Sparse tables trip the fallback rules; the flags say which one fired.
for t in [
    CellCounts5(9, 2, 3, 0, 86, 100),   # n6 = 0: p* is smoothed
    CellCounts5(1, 2, 3, 0, 94, 100),   # one anchor member outside Stream 1
    CellCounts5(0, 0, 0, 0, 20, 20),    # nothing observed at all
]:
    print(t.to_dict())
    for fn in (var5_unadjusted, var5_fpc1, var5_fpc2):
        v = fn(t)
        print(f"  {v.variant:<10} SE {v.se:7.3f}  {', '.join(v.fallbacks) or '-'}")
