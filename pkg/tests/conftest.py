import pytest
from hypothesis import strategies as st

from anchorcrc import CellCounts5
from anchorcrc.presets import get_preset
from anchorcrc.simulation import run_scenario

CRISP = CellCounts5(n15=169, n2=12, n4=52, n6=19, n37=777, n_tot=1029)
SMALL = CellCounts5(n15=8, n2=1, n4=1, n6=2, n37=8, n_tot=20)

# desk-scale simulation settings shared by calibration tests
SIM_REPS = 2000
SIM_DRAWS = 2000
SIM_SEED = 1


@st.composite
def tables(draw, max_cell=400, min_cell=0, min_n6=0):
    cells = [draw(st.integers(min_cell, max_cell)) for _ in range(5)]
    cells[3] = max(cells[3], min_n6)
    if sum(cells) == 0:
        cells[4] = 1
    return CellCounts5.from_cells(*cells)


@pytest.fixture
def crisp():
    return CRISP


@pytest.fixture
def small():
    return SMALL


_summaries = {}


def desk_summary(preset: str, workers: int = 1):
    """Cached 2000-replication summary of a named preset."""
    key = (preset, workers)
    if key not in _summaries:
        scenario = get_preset(preset).with_(
            replications=SIM_REPS, credible_draws=SIM_DRAWS, master_seed=SIM_SEED
        )
        _summaries[key] = run_scenario(scenario, workers=workers)
    return _summaries[key]


@pytest.fixture(scope="session")
def t6_summary():
    return desk_summary("t6/N250/psi0.25")


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance as acc

    if not any(acc.RESULTS.values()):
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title in acc.CRITERIA.items():
        checks = acc.RESULTS[number]
        if not checks:
            tr.write_line(f"criterion {number} ({title}): NOT RUN")
            continue
        failed = [(label, detail) for label, ok, detail in checks if not ok]
        verdict = "FAIL" if failed else "PASS"
        line = f"criterion {number} ({title}): {verdict}, {len(checks) - len(failed)}/{len(checks)} checks"
        if failed:
            line += "; failing: " + "; ".join(f"{label} = {detail}" for label, detail in failed)
        tr.write_line(line)
