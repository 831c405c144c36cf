"""Per-site battery dynamics and the energy ledger.

Every site (base station or server) owns one battery. Each slot it gains
harvested and purchased energy, loses consumption and a fixed leakage, and
is clipped to its capacity. The ledger entry records every flow so that a
whole run can be audited: level_after - level_before always equals
harvested + purchased - consumed - leakage - spill + shortfall.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from ._validation import check_non_negative, require

log = logging.getLogger(__name__)


class EnergyDeficit(RuntimeError):
    """Consumption exceeded every source available in the slot."""


def project_level(
    level: float,
    capacity: float,
    leakage: float,
    harvested: float,
    consumed: float,
    purchased: float,
) -> tuple[float, float, float]:
    """One slot of battery arithmetic: (new level, spill, shortfall).

    This is the single formula behind both the real step() below and the
    controller's what-if projections, so planned and charged levels can
    never drift apart.
    """
    uncapped = level + harvested + purchased - consumed - leakage
    spill = max(0.0, uncapped - capacity)
    shortfall = max(0.0, -uncapped)
    return min(max(uncapped, 0.0), capacity), spill, shortfall


@dataclass(frozen=True)
class Battery:
    level: float  # J currently stored
    capacity: float = 490e3  # b_max
    low_threshold: float = 147e3  # below this the site counts as deficient
    up_threshold: float = 343e3  # purchases top the battery up to this level
    leakage: float = 2e-6  # J lost every slot regardless of activity

    def __post_init__(self) -> None:
        require(self.capacity > 0, "capacity must be positive")
        require(
            0.0 < self.low_threshold < self.up_threshold < self.capacity
            or (self.low_threshold == 0.0 and self.up_threshold <= self.capacity),
            "need 0 < low_threshold < up_threshold < capacity",
        )
        check_non_negative(self.leakage, "leakage")
        require(
            -1e-9 <= self.level <= self.capacity * (1.0 + 1e-12),
            f"level {self.level} outside [0, capacity]",
        )


@dataclass(frozen=True)
class EnergyLedgerEntry:
    slot: int
    site: str
    harvested: float
    consumed: float
    purchased: float
    level_before: float
    level_after: float
    spill: float = 0.0  # harvest lost to the capacity clip
    shortfall: float = 0.0  # energy conjured by the floor at zero (leakage only)

    def closure_error(self, leakage: float) -> float:
        """Residual of the conservation identity; zero for a sound entry."""
        expected = (
            self.level_before
            + self.harvested
            + self.purchased
            - self.consumed
            - leakage
            - self.spill
            + self.shortfall
        )
        return self.level_after - expected


def step(
    battery: Battery,
    harvested: float,
    consumed: float,
    purchased: float,
    *,
    slot: int = 0,
    site: str = "site",
) -> tuple[Battery, EnergyLedgerEntry]:
    """Advance one slot and return the new battery plus its ledger entry.

    Raises EnergyDeficit when consumption exceeds stored plus incoming
    energy; that situation means the caller scheduled an infeasible action
    and silently flooring it would hide a real power outage.
    """
    check_non_negative(harvested, "harvested")
    check_non_negative(consumed, "consumed")
    check_non_negative(purchased, "purchased")
    available = battery.level + harvested + purchased
    if consumed > available * (1.0 + 1e-12) + 1e-9:
        raise EnergyDeficit(
            f"site {site} slot {slot}: consumption {consumed:.3f} J exceeds "
            f"available {available:.3f} J"
        )
    new_level, spill, shortfall = project_level(
        battery.level, battery.capacity, battery.leakage, harvested, consumed, purchased
    )
    if shortfall > 0.0:
        log.warning(
            "site %s slot %d: battery floored at zero (leakage exceeded residual charge)",
            site,
            slot,
        )
    entry = EnergyLedgerEntry(
        slot=slot,
        site=site,
        harvested=harvested,
        consumed=consumed,
        purchased=purchased,
        level_before=battery.level,
        level_after=new_level,
        spill=spill,
        shortfall=shortfall,
    )
    return replace(battery, level=new_level), entry


def plan_purchase(battery: Battery, expected_harvest: float) -> float:
    """Grid energy to buy for the coming slot.

    Nothing is bought while the expected level clears the upper threshold;
    otherwise the battery is topped up to that threshold in one purchase.
    """
    check_non_negative(expected_harvest, "expected_harvest")
    if battery.level + expected_harvest >= battery.up_threshold:
        return 0.0
    return battery.up_threshold - battery.level


def is_deficient(battery: Battery) -> bool:
    """True when the stored energy sits below the lower threshold."""
    return battery.level < battery.low_threshold


LEDGER_COLUMNS = ("slot", "site", "H", "theta", "E", "b_before", "b_after")


def write_ledger_csv(entries: Iterable[EnergyLedgerEntry], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEDGER_COLUMNS)
        for e in entries:
            writer.writerow(
                [
                    e.slot,
                    e.site,
                    f"{e.harvested:.12g}",
                    f"{e.consumed:.12g}",
                    f"{e.purchased:.12g}",
                    f"{e.level_before:.12g}",
                    f"{e.level_after:.12g}",
                ]
            )


def total_closure_error(entries: Sequence[EnergyLedgerEntry], leakage: float) -> float:
    """Largest absolute conservation residual across *entries*."""
    if not entries:
        return 0.0
    return max(abs(e.closure_error(leakage)) for e in entries)
