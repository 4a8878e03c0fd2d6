import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anchorcrc import (
    CaptureRecord,
    CellCounts4,
    CellCounts5,
    CellCounts7,
    Interval,
    ModelParams,
    RsSummary,
    ValidationError,
    tabulate,
)


def _records(spec):
    """spec: list of (count, stream1_positive, in_anchor, anchor_result)."""
    out = []
    for count, s1, anchor, result in spec:
        for _ in range(count):
            out.append(CaptureRecord(str(len(out)), s1, anchor, result))
    return out


def test_crisp_reconstruction():
    records = _records(
        [
            (12, True, True, True),
            (52, True, False, None),
            (19, False, True, True),
            (166, False, True, False),
            (3, True, True, False),
        ]
    )
    counts = tabulate(records, 1029)
    assert counts == CellCounts5(169, 12, 52, 19, 777, 1029)


def test_empty_records_all_unobserved():
    assert tabulate([], 10) == CellCounts5(0, 0, 0, 0, 10, 10)


# every legal flag combination, with its cell worked out by hand
TRUTH = {
    (False, False, None): "n37",
    (True, False, None): "n4",
    (False, True, False): "n15",
    (False, True, True): "n6",
    (True, True, False): "n15",
    (True, True, True): "n2",
}


@pytest.mark.parametrize("combo", list(itertools.combinations_with_replacement(TRUTH, 4)))
def test_four_record_truth_table(combo):
    records = [CaptureRecord(str(i), *flags) for i, flags in enumerate(combo)]
    expected = {"n15": 0, "n2": 0, "n4": 0, "n6": 0, "n37": 2}  # 2 record-less members
    for flags in combo:
        expected[TRUTH[flags]] += 1
    assert tabulate(records, 6).to_dict() == {**expected, "n_tot": 6}


flag_combos = st.sampled_from(list(TRUTH))


@given(st.lists(flag_combos, max_size=30), st.integers(1, 20), st.randoms())
def test_tabulate_sum_and_permutation_invariance(flags, extra, rnd):
    records = [CaptureRecord(str(i), *f) for i, f in enumerate(flags)]
    counts = tabulate(records, len(records) + extra)
    assert sum(counts.as_array()) == counts.n_tot
    shuffled = list(records)
    rnd.shuffle(shuffled)
    assert tabulate(shuffled, len(records) + extra) == counts


def test_tabulate_errors():
    recs = _records([(3, True, False, None)])
    with pytest.raises(ValidationError):
        tabulate(recs, 2)
    with pytest.raises(ValidationError):
        tabulate(recs + [CaptureRecord("0", False, False)], 10)


def test_tabulate_by_stratum():
    recs = [
        CaptureRecord("a", True, True, True, stratum="A"),
        CaptureRecord("b", False, True, True, stratum="B"),
    ]
    tables = tabulate(recs, {"A": 5, "B": 7}, by_stratum=True)
    assert tables["A"] == CellCounts5(0, 1, 0, 0, 4, 5)
    assert tables["B"] == CellCounts5(0, 0, 0, 1, 6, 7)


def test_record_requires_consistent_anchor_result():
    with pytest.raises(ValidationError):
        CaptureRecord("x", True, True, None)
    with pytest.raises(ValidationError):
        CaptureRecord("x", True, False, True)


def test_cellcounts_validation():
    with pytest.raises(ValidationError, match="sum"):
        CellCounts5(1, 1, 1, 1, 1, 6)
    with pytest.raises(ValidationError):
        CellCounts5(-1, 1, 1, 1, 3, 5)
    with pytest.raises(ValidationError):
        CellCounts4(1, 1, 1, 1.0)
    with pytest.raises(ValidationError):
        RsSummary(10, 11, 20)


def test_crisp_derived_quantities(crisp):
    assert crisp.n_c == 83
    assert crisp.n_rs_star == 188
    assert crisp.n_tot_star == 965
    assert crisp.bounds == (83, 860)
    assert RsSummary.from_counts(crisp) == RsSummary(200, 31, 1029)


def test_seven_cell_consolidation():
    t = CellCounts7(n1=2, n2=12, n3=5, n4=52, n5=167, n6=19, n7=772)
    assert t.consolidate() == CellCounts5(169, 12, 52, 19, 777, 1029)


unit = st.floats(0.0, 1.0, allow_nan=False)


@given(unit, unit, unit, unit)
def test_cell_probability_parameterizations_agree(psi, phi, pi_s1, pi_sbar1):
    m = ModelParams(psi, phi, pi_s1, pi_sbar1)
    p = m.cell_probabilities()
    assert np.all(p >= -1e-15) and np.all(p <= 1 + 1e-15)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert m.theta <= m.pi + 1e-15
    np.testing.assert_allclose(m.recorded_cell_probabilities(), p, rtol=0, atol=1e-12)


def test_cell_probability_grid():
    grid = np.linspace(0, 1, 6)
    for psi, phi, a, b in itertools.product(grid, repeat=4):
        m = ModelParams(psi, phi, a, b)
        np.testing.assert_allclose(
            m.recorded_cell_probabilities(), m.cell_probabilities(), atol=1e-12
        )


def test_interval_ordering():
    with pytest.raises(ValidationError):
        Interval(2.0, 1.0, 0.95, "wald")
    iv = Interval(1.0, 3.0, 0.95, "wald")
    assert iv.contains(3.0) and iv.width == 2.0
