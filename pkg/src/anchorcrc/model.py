"""Domain types for anchor-stream capture-recapture data.

Cell naming follows the usual two-stream layout. With a non-anchor stream
(Stream 1) that records only positives and an anchor stream (Stream 2) that
is a simple random sample recording both results, every member of a closed
population falls in one of five cells:

========  ==============================================================
``n15``   in the anchor sample, tested negative
``n2``    recorded by Stream 1 and in the anchor sample, positive
``n4``    recorded by Stream 1, not in the anchor sample
``n6``    in the anchor sample only, positive
``n37``   everyone else (never sampled, or a Stream-1 negative)
========  ==============================================================
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class ValidationError(ValueError):
    """Input data violates a documented invariant."""


def _check_count(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise ValidationError(f"{name} must be non-negative, got {value}")
    return int(value)


@dataclass(frozen=True)
class CellCounts5:
    """Observed 5-cell table plus the known population size."""

    n15: int
    n2: int
    n4: int
    n6: int
    n37: int
    n_tot: int

    def __post_init__(self):
        for name in ("n15", "n2", "n4", "n6", "n37", "n_tot"):
            object.__setattr__(self, name, _check_count(name, getattr(self, name)))
        if self.n_tot < 1:
            raise ValidationError("n_tot must be positive")
        total = self.n15 + self.n2 + self.n4 + self.n6 + self.n37
        if total != self.n_tot:
            raise ValidationError(
                f"cell counts sum to {total} but n_tot={self.n_tot} "
                f"(n15={self.n15}, n2={self.n2}, n4={self.n4}, "
                f"n6={self.n6}, n37={self.n37})"
            )

    @classmethod
    def from_cells(cls, n15: int, n2: int, n4: int, n6: int, n37: int) -> CellCounts5:
        return cls(n15, n2, n4, n6, n37, n15 + n2 + n4 + n6 + n37)

    @property
    def n_c(self) -> int:
        """Number of individuals known to be cases."""
        return self.n2 + self.n4 + self.n6

    @property
    def known_negatives(self) -> int:
        return self.n15

    @property
    def n_rs_star(self) -> int:
        """Anchor-sampled individuals not recorded by Stream 1."""
        return self.n15 + self.n6

    @property
    def n_tot_star(self) -> int:
        """Population members not recorded by Stream 1."""
        return self.n15 + self.n6 + self.n37

    @property
    def bounds(self) -> tuple[int, int]:
        """Logical range of the case count: ``[n_c, n_tot - n15]``."""
        return self.n_c, self.n_tot - self.n15

    def as_array(self) -> np.ndarray:
        """Counts in the order (n15, n2, n4, n6, n37)."""
        return np.array([self.n15, self.n2, self.n4, self.n6, self.n37], dtype=np.int64)

    def has_zero_cell(self) -> bool:
        return min(self.n15, self.n2, self.n4, self.n6, self.n37) == 0

    def to_dict(self) -> dict[str, int]:
        return {
            "n15": self.n15,
            "n2": self.n2,
            "n4": self.n4,
            "n6": self.n6,
            "n37": self.n37,
            "n_tot": self.n_tot,
        }


@dataclass(frozen=True)
class CellCounts4:
    """Known-cases-only table with a design-known anchor sampling probability."""

    n2: int
    n4: int
    n6: int
    psi: float

    def __post_init__(self):
        for name in ("n2", "n4", "n6"):
            object.__setattr__(self, name, _check_count(name, getattr(self, name)))
        if not 0.0 < self.psi < 1.0:
            raise ValidationError(f"psi must lie in (0, 1), got {self.psi}")


@dataclass(frozen=True)
class CellCounts7:
    """Full table for the case where both streams record negatives."""

    n1: int
    n2: int
    n3: int
    n4: int
    n5: int
    n6: int
    n7: int

    def __post_init__(self):
        for name in ("n1", "n2", "n3", "n4", "n5", "n6", "n7"):
            object.__setattr__(self, name, _check_count(name, getattr(self, name)))

    @property
    def n_tot(self) -> int:
        return self.n1 + self.n2 + self.n3 + self.n4 + self.n5 + self.n6 + self.n7

    def consolidate(self) -> CellCounts5:
        """Collapse to five cells when Stream-1 negatives are not recorded."""
        return CellCounts5(
            self.n1 + self.n5, self.n2, self.n4, self.n6, self.n3 + self.n7, self.n_tot
        )


@dataclass(frozen=True)
class RsSummary:
    """Anchor-sample-only summary: sample size and positives."""

    n_rs: int
    n_rs_pos: int
    n_tot: int

    def __post_init__(self):
        for name in ("n_rs", "n_rs_pos", "n_tot"):
            object.__setattr__(self, name, _check_count(name, getattr(self, name)))
        if self.n_tot < 1:
            raise ValidationError("n_tot must be positive")
        if not self.n_rs_pos <= self.n_rs <= self.n_tot:
            raise ValidationError(
                f"need 0 <= n_rs_pos <= n_rs <= n_tot, got "
                f"n_rs_pos={self.n_rs_pos}, n_rs={self.n_rs}, n_tot={self.n_tot}"
            )

    @classmethod
    def from_counts(cls, counts: CellCounts5) -> RsSummary:
        return cls(counts.n15 + counts.n2 + counts.n6, counts.n2 + counts.n6, counts.n_tot)

    @property
    def bounds(self) -> tuple[int, int]:
        return self.n_rs_pos, self.n_tot - (self.n_rs - self.n_rs_pos)


@dataclass(frozen=True)
class ModelParams:
    """Sampling-scale parameters of the population multinomial model.

    ``psi`` is the anchor sampling probability, ``phi`` the Stream-1 sampling
    probability, and ``pi_s1``/``pi_sbar1`` the prevalence among those
    sampled/not sampled by Stream 1.
    """

    psi: float
    phi: float
    pi_s1: float
    pi_sbar1: float

    def __post_init__(self):
        for name in ("psi", "phi", "pi_s1", "pi_sbar1"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {value}")

    @property
    def theta(self) -> float:
        return self.pi_s1 * self.phi

    @property
    def pi(self) -> float:
        return self.pi_s1 * self.phi + self.pi_sbar1 * (1.0 - self.phi)

    # recorded-scale parameters
    @property
    def phi_r(self) -> float:
        return self.pi_s1 * self.phi

    @property
    def psi_r(self) -> float:
        return self.psi

    @property
    def pi_rbar1(self) -> float:
        denom = 1.0 - self.pi_s1 * self.phi
        if denom == 0.0:
            return 0.0
        return self.pi_sbar1 * (1.0 - self.phi) / denom

    @property
    def pi_r1(self) -> float:
        # everyone recorded by Stream 1 is a case
        return 1.0

    def cell_probabilities(self) -> np.ndarray:
        """(p15, p2, p4, p6, p37) in the (theta, pi) parameterization."""
        psi, theta, pi = self.psi, self.theta, self.pi
        return np.array(
            [
                psi * (1.0 - pi),
                psi * theta,
                (1.0 - psi) * theta,
                psi * (pi - theta),
                (1.0 - psi) * (1.0 - theta),
            ]
        )

    def recorded_cell_probabilities(self) -> np.ndarray:
        """Same five probabilities from the recorded-scale parameters."""
        phi_r, psi_r, pr = self.phi_r, self.psi_r, self.pi_rbar1
        return np.array(
            [
                (1.0 - phi_r) * (1.0 - pr) * psi_r,
                psi_r * phi_r,
                (1.0 - psi_r) * phi_r,
                (1.0 - phi_r) * pr * psi_r,
                (1.0 - phi_r) * (1.0 - psi_r),
            ]
        )


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float
    level: float
    method: str
    truncated_low: bool = False
    truncated_high: bool = False

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValidationError(f"interval lower {self.lower} exceeds upper {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_list(self) -> list[float]:
        return [self.lower, self.upper]


@dataclass
class EstimateReport:
    """Point estimate of the case count with per-variant SEs and intervals."""

    method: str
    point_N: float
    point_pi: Optional[float]
    se: dict[str, float] = field(default_factory=dict)
    intervals: dict[str, Interval] = field(default_factory=dict)
    level: float = 0.95
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "point": self.point_N,
            "point_pi": self.point_pi,
            "se": dict(self.se),
            "intervals": {k: v.to_list() for k, v in self.intervals.items()},
            "level": self.level,
            "diagnostics": list(self.diagnostics),
        }


@dataclass(frozen=True)
class CaptureRecord:
    """One individual's capture history.

    ``anchor_result`` is present exactly when ``in_anchor`` is true.
    """

    id: str
    stream1_positive: bool
    in_anchor: bool
    anchor_result: Optional[bool] = None
    stratum: Optional[str] = None

    def __post_init__(self):
        if self.in_anchor and self.anchor_result is None:
            raise ValidationError(f"record {self.id!r}: in_anchor without anchor_result")
        if not self.in_anchor and self.anchor_result is not None:
            raise ValidationError(f"record {self.id!r}: anchor_result given but not in_anchor")

    @property
    def cell(self) -> str:
        """Cell label; the anchor result wins over a Stream-1 positive."""
        if self.in_anchor:
            if not self.anchor_result:
                return "n15"
            return "n2" if self.stream1_positive else "n6"
        return "n4" if self.stream1_positive else "n37"


def _tabulate_one(records: list[CaptureRecord], population_size: int) -> CellCounts5:
    if population_size < len(records):
        raise ValidationError(
            f"population_size={population_size} is smaller than the "
            f"{len(records)} records supplied"
        )
    cells = {"n15": 0, "n2": 0, "n4": 0, "n6": 0}
    for rec in records:
        c = rec.cell
        if c != "n37":
            cells[c] += 1
    n37 = population_size - sum(cells.values())
    return CellCounts5(cells["n15"], cells["n2"], cells["n4"], cells["n6"], n37, population_size)


def tabulate(
    records: Iterable[CaptureRecord],
    population_size: int | Mapping[str, int],
    by_stratum: bool = False,
) -> CellCounts5 | dict[str, CellCounts5]:
    """Cross-classify capture records into the 5-cell table.

    Population members without a record are counted in ``n37``. With
    ``by_stratum=True`` a table is returned per stratum and
    ``population_size`` must map every stratum label to its size.
    """
    records = list(records)
    seen = set()
    for rec in records:
        if rec.id in seen:
            raise ValidationError(f"duplicate record id {rec.id!r}")
        seen.add(rec.id)

    if not by_stratum:
        if isinstance(population_size, Mapping):
            population_size = sum(population_size.values())
        return _tabulate_one(records, int(population_size))

    if not isinstance(population_size, Mapping):
        raise ValidationError("stratified tabulation needs a population size per stratum")
    groups: dict[str, list[CaptureRecord]] = {str(s): [] for s in population_size}
    for rec in records:
        if rec.stratum is None:
            raise ValidationError(f"record {rec.id!r} has no stratum")
        if rec.stratum not in groups:
            raise ValidationError(f"record {rec.id!r} has unknown stratum {rec.stratum!r}")
        groups[rec.stratum].append(rec)
    return {s: _tabulate_one(groups[s], int(population_size[s])) for s in groups}
