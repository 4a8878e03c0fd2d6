import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anchorcrc import CellCounts5, RsSummary, credible_5cell, credible_rs, logit_chapman, wald
from anchorcrc.intervals import percentile_interval, posterior_draws_5cell, scale_factor, z_quantile
from anchorcrc.randomness import RngStream
from anchorcrc.variance import var5

from .conftest import CRISP, tables


def test_wald_examples():
    iv = wald(161.53, 19.086)
    assert (iv.lower, iv.upper) == pytest.approx((124.1, 198.9), abs=0.05)
    # the published endpoints come from the unrounded SE
    iv = wald(161.53, var5(CRISP, "unadjusted").se)
    assert (iv.lower, iv.upper) == pytest.approx((117.8, 205.3), abs=0.05)
    assert wald(10.0, 0.0).to_list() == [10.0, 10.0]


def test_wald_truncation_flags():
    iv = wald(5.0, 10.0, bounds=(3, 20))
    assert iv.lower == 3 and iv.truncated_low and iv.upper == 20 and iv.truncated_high


def test_z_quantile():
    assert z_quantile(0.95) == pytest.approx(1.959963984540054, abs=1e-15)
    assert z_quantile(0.8) == pytest.approx(1.2815515655446004, abs=1e-12)


def test_scale_factor():
    assert scale_factor(1.0, 4.0) == 0.5
    assert scale_factor(9.0, 4.0) == 1.0
    assert scale_factor(1.0, 0.0) == 1.0


def test_cap_gives_unadjusted_percentiles():
    # FPC2 > unadjusted here, so the shrink factor caps at one
    t = CellCounts5(0, 2, 3, 1, 94, 100)
    assert var5(t, "fpc2").var_N >= var5(t, "unadjusted").var_N
    raw = posterior_draws_5cell(t, 4000, RngStream(3))
    adj, d = credible_5cell(t, adjustment="fpc2", raw_draws=raw)
    unadj, _ = credible_5cell(t, adjustment="none", raw_draws=raw)
    assert d.a == 1.0 and d.b == 0.0
    assert adj.to_list() == unadj.to_list()


def test_fpc_shrinks_interval():
    raw = posterior_draws_5cell(CRISP, 20_000, RngStream(11))
    fpc1, d1 = credible_5cell(CRISP, adjustment="fpc1", raw_draws=raw)
    fpc2, _ = credible_5cell(CRISP, adjustment="fpc2", raw_draws=raw)
    unadj, _ = credible_5cell(CRISP, adjustment="none", raw_draws=raw)
    assert fpc1.width < fpc2.width < unadj.width
    assert d1.a == pytest.approx(19.086 / 22.327, abs=1e-3)


def test_credible_reproducible():
    a, _ = credible_5cell(CRISP, M=5000, seed=42)
    b, _ = credible_5cell(CRISP, M=5000, seed=42)
    c, _ = credible_5cell(CRISP, M=5000, seed=43)
    assert a.to_list() == b.to_list()
    assert a.to_list() != c.to_list()


def test_percentile_linear_interpolation():
    draws = np.arange(101, dtype=float)
    iv = percentile_interval(draws, 0.95, None, "x")
    assert iv.to_list() == pytest.approx([2.5, 97.5], rel=1e-14)


def test_logit_crisp():
    iv = logit_chapman(CRISP)
    assert iv.lower == pytest.approx(119.66, abs=0.01)
    assert iv.upper == pytest.approx(262.99, abs=0.01)


def test_logit_symmetric_golden():
    # frozen output of the implemented formula
    iv = logit_chapman(CellCounts5(10, 10, 10, 10, 60, 100))
    f0 = 10.5 * 10.5 / 10.5
    sigma = math.sqrt(3 / 10.5 + 1 / f0)
    assert iv.lower == pytest.approx(29.5 + f0 * math.exp(-1.959963984540054 * sigma))
    assert iv.to_list() == pytest.approx([32.63196, 64.70159], abs=1e-5)


def test_logit_defined_without_n6():
    iv = logit_chapman(CellCounts5(10, 4, 6, 0, 80, 100), bounds=(10, 90))
    assert 10 <= iv.lower <= iv.upper <= 90


def test_credible_rs_zero_positives():
    # Beta draws are positive, so the endpoint is 0 at report precision
    iv = credible_rs(RsSummary(50, 0, 100), M=2000, seed=1)
    assert 0.0 <= iv.lower < 0.05


@settings(max_examples=60, deadline=None)
@given(tables(max_cell=200), st.sampled_from(["none", "fpc1", "fpc2"]), st.integers(0, 2**32))
def test_credible_respects_bounds(t, adjustment, seed):
    iv, d = credible_5cell(t, M=300, adjustment=adjustment, seed=seed)
    lo, hi = t.bounds
    assert lo <= iv.lower <= iv.upper <= hi
    assert 0.0 <= d.a <= 1.0  # a = 0 on census tables where FPC1 vanishes


@settings(max_examples=60, deadline=None)
@given(tables(max_cell=200), st.integers(0, 2**32))
def test_untruncated_draws_above_stream_total(t, seed):
    stream = RngStream(seed)
    p = stream.dirichlet(t.as_array() + 0.5, size=300)
    assert np.all(p > 0)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    p15, p2, p4, p6, p37 = p.T
    draws = t.n_tot * (p2 + p4 + p6 * (p15 + p6 + p37) / (p15 + p6))
    floor = t.n_tot * (p2 + p4 + p6)
    assert np.all(draws >= floor * (1 - 1e-12))
    replayed = posterior_draws_5cell(t, 300, RngStream(seed))
    np.testing.assert_allclose(replayed, draws, rtol=1e-14)


@settings(max_examples=100, deadline=None)
@given(
    tables(max_cell=300),
    st.floats(0, 1e4, allow_nan=False),
    st.floats(0, 1e3, allow_nan=False),
    st.sampled_from([0.8, 0.9, 0.95, 0.99]),
)
def test_wald_and_logit_respect_bounds(t, point, se, level):
    iv = wald(point, se, level, bounds=t.bounds)
    assert t.bounds[0] <= iv.lower <= iv.upper <= t.bounds[1]
    iv = logit_chapman(t, level, bounds=t.bounds)
    assert t.bounds[0] <= iv.lower <= iv.upper <= t.bounds[1]


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 300), st.data())
def test_credible_rs_respects_bounds(n_rs, data):
    pos = data.draw(st.integers(0, n_rs))
    n_tot = data.draw(st.integers(n_rs, 2000))
    rs = RsSummary(n_rs, pos, n_tot)
    iv = credible_rs(rs, M=300, seed=data.draw(st.integers(0, 1000)))
    assert rs.bounds[0] <= iv.lower <= iv.upper <= rs.bounds[1]


def test_credible_coverage(t6_summary):
    cov = t6_summary.estimators["N5"].coverage
    assert 0.93 <= cov["credible/fpc1"] <= 0.965
    assert cov["credible/unadjusted"] >= 0.97


def test_crisp_rs_credible():
    iv = credible_rs(RsSummary(200, 31, 1029), M=100_000, seed=2024)
    assert iv.lower == pytest.approx(117.8, abs=1.5)
    assert iv.upper == pytest.approx(210.4, abs=1.5)
