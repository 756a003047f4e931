"""Shared test helpers: deterministic instances and a low-peak efficiency curve."""

from __future__ import annotations

import numpy as np

from specgame import (
    ChannelMatrix,
    EfficiencyModel,
    ExponentialEfficiency,
    GameInstance,
)


class ScaledExponentialEfficiency(EfficiencyModel):
    """(1 - exp(-2x))^2: same shape as the block-success curve, but its
    throughput-per-watt peak sits below SINR 1, so shared-carrier
    equilibria stay finite.  Used to exercise branches the stock curves
    cannot reach."""

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.square(-np.expm1(-2.0 * x))
        return out.item() if out.ndim == 0 else out

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        out = 4.0 * np.exp(-2.0 * x) * (-np.expm1(-2.0 * x))
        return out.item() if out.ndim == 0 else out


def make_instance(gains, sigma2=1.0, rates=(1.0, 1.0), efficiency=None):
    """GameInstance from a plain 2-row gains list; defaults to the M=100 curve."""
    if efficiency is None:
        efficiency = ExponentialEfficiency(M=100)
    return GameInstance(
        channel=ChannelMatrix(np.array(gains, dtype=float)),
        sigma2=sigma2,
        rates=rates,
        efficiency=efficiency,
    )


def random_instance(rng, K, efficiency=None, sigma2=1.0, rates=(1.0, 1.0)):
    """Instance with iid unit-mean exponential gains drawn from ``rng``."""
    gains = rng.exponential(1.0, size=(2, K))
    return make_instance(gains, sigma2=sigma2, rates=rates, efficiency=efficiency)
