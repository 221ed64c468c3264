"""Radio reception models.

Rural reception is the deterministic disk of radius r_TX derived from a
log-distance link budget; urban reception multiplies the mean power by a
Nakagami-m fading gain drawn per frame.  The same r_TX feeds the link-expiry
metric, keeping the rural channel and the LET model mutually consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from random import Random

from .errors import ConfigError

_LIGHT_SPEED = 299_792_458.0

RURAL = "rural"
URBAN = "urban"
CHANNEL_MODELS = (RURAL, URBAN)


@dataclass(frozen=True, slots=True)
class LinkBudget:
    tx_power_dbm: float
    frequency_hz: float
    path_loss_exponent: float
    d0: float
    sensitivity_dbm: float
    nakagami_m: float = 2.0

    def validate(self) -> None:
        if self.path_loss_exponent <= 0:
            raise ConfigError("path loss exponent must be > 0")
        if self.d0 <= 0:
            raise ConfigError("reference distance d0 must be > 0")
        if self.frequency_hz <= 0:
            raise ConfigError("carrier frequency must be > 0")
        if self.nakagami_m < 0.5:
            raise ConfigError("nakagami_m must be >= 0.5")


@lru_cache(maxsize=64)
def reference_loss_db(budget: LinkBudget) -> float:
    """Free-space loss at the reference distance d0."""
    return 20.0 * math.log10(4.0 * math.pi * budget.d0 * budget.frequency_hz / _LIGHT_SPEED)


def mean_rx_power(budget: LinkBudget, distance: float) -> float:
    """Mean received power in dBm under the log-distance law; distances
    below d0 are clamped to d0."""
    d = max(distance, budget.d0)
    return (
        budget.tx_power_dbm
        - reference_loss_db(budget)
        - 10.0 * budget.path_loss_exponent * math.log10(d / budget.d0)
    )


@lru_cache(maxsize=64)
def compute_r_tx(budget: LinkBudget) -> float:
    """Deterministic communication radius: where mean power meets the
    receiver sensitivity.  Closed-form inverse of the log-distance law."""
    budget.validate()
    margin = budget.tx_power_dbm - reference_loss_db(budget) - budget.sensitivity_dbm
    if margin <= 0:
        raise ConfigError(
            f"sensitivity {budget.sensitivity_dbm} dBm unreachable at d0 "
            f"(margin {margin:.2f} dB)"
        )
    return budget.d0 * 10.0 ** (margin / (10.0 * budget.path_loss_exponent))


def budget_for_radius(
    r_tx: float,
    tx_power_dbm: float = 20.0,
    frequency_hz: float = 2.4e9,
    path_loss_exponent: float = 2.75,
    d0: float = 1.0,
    nakagami_m: float = 2.0,
) -> LinkBudget:
    """Build a budget whose sensitivity yields exactly the requested radius."""
    if r_tx <= d0:
        raise ConfigError(f"r_tx {r_tx} must exceed d0 {d0}")
    probe = LinkBudget(tx_power_dbm, frequency_hz, path_loss_exponent, d0, 0.0, nakagami_m)
    probe.validate()
    sensitivity = (
        tx_power_dbm
        - reference_loss_db(probe)
        - 10.0 * path_loss_exponent * math.log10(r_tx / d0)
    )
    return LinkBudget(tx_power_dbm, frequency_hz, path_loss_exponent, d0, sensitivity, nakagami_m)


def default_budget() -> LinkBudget:
    """Default link budget: 150 m radius in the 500 m reference scenario."""
    return budget_for_radius(150.0)


def nakagami_gain(m: float, rng: Random) -> float:
    """Nakagami-m power gain: Gamma with shape m and mean 1."""
    return rng.gammavariate(m, 1.0 / m)


def receive(budget: LinkBudget, model: str, distance: float, rng: Random) -> bool:
    """Frame reception verdict at the given distance.

    Rural is the exact indicator of the r_TX disk and draws nothing from the
    generator.  Urban draws one fading gain per call (block fading at frame
    granularity).
    """
    if model == RURAL:
        return distance <= compute_r_tx(budget)
    if model == URBAN:
        gain = nakagami_gain(budget.nakagami_m, rng)
        return mean_rx_power(budget, distance) + 10.0 * math.log10(gain) >= budget.sensitivity_dbm
    raise ConfigError(f"unknown channel model '{model}'")
