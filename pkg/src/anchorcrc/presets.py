"""Named simulation scenarios.

Names look like ``t5/N500/psi0.25`` (table, true case count, anchor
fraction) or, for the CRISP-like grid, ``b3/psymp0.25/p1symp0.5``.
"""

from __future__ import annotations

import math

from .model import ValidationError
from .simulation import SimScenario

PSIS = (0.1, 0.25, 0.5)

# table tag -> (population size, true case counts)
GRIDS = {
    "t5": (10_000, (500, 1000, 2500, 5000)),
    "t6": (1000, (50, 100, 250, 500)),
    "b1": (250, (13, 25, 63, 125)),
    "b2": (500, (25, 50, 125, 250)),
}

CRISP_LIKE = {"n_tot": 1029, "n_true": 156, "anchor_size": 200}
B3_P_SYMP = (0.25, 0.5, 0.75, 0.9)
B3_P_S1_SYMP = (0.5, 0.75, 0.9)


def anchor_size_for(n_tot: int, psi: float) -> int:
    # round half up: 250 * 0.25 -> 63
    return int(math.floor(n_tot * psi + 0.5))


def _build() -> dict[str, SimScenario]:
    presets = {}
    for tag, (n_tot, truths) in GRIDS.items():
        for n_true in truths:
            for psi in PSIS:
                name = f"{tag}/N{n_true}/psi{psi:g}"
                presets[name] = SimScenario(
                    n_tot=n_tot,
                    n_true=n_true,
                    anchor_size=anchor_size_for(n_tot, psi),
                    name=name,
                )
    for p_symp in B3_P_SYMP:
        for p_s1 in B3_P_S1_SYMP:
            name = f"b3/psymp{p_symp:g}/p1symp{p_s1:g}"
            presets[name] = SimScenario(
                **CRISP_LIKE, p_symp_case=p_symp, p_s1_symp=p_s1, name=name
            )
    return presets


PRESETS: dict[str, SimScenario] = _build()


def get_preset(name: str) -> SimScenario:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; see list_presets()") from None


def list_presets() -> list[str]:
    return list(PRESETS)
