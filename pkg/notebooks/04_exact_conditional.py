"""Brute-force check of the conditional sampling argument.

Given how many anchor members fall outside Stream 1 (n15 + n6) and how big
that pool is (n15 + n6 + n37), the number of cases among them should be
hypergeometric whatever Stream 1 did. Enumerating a 10-person population
confirms this exactly, along with the unbiasedness of the
finite-population variance estimate of p* = n6 / (n15 + n6).
"""

from anchorcrc.simulation import exact_conditional_check

chk = exact_conditional_check(n_tot=10, n_true=5, anchor_size=4)
print(f"max |conditional pmf - hypergeometric| = {chk.max_pmf_discrepancy}")
print(f"max |E[var estimate] - var|            = {chk.max_variance_bias}")

for (n_rs, pool), dist in chk.table.items():
    cells = "  ".join(f"{k}:{p:.4f}" for k, p in dist.items())
    print(f"anchor outside S1 = {n_rs}, pool = {pool:2d} -> n6 ~ {cells}")
