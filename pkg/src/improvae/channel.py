"""Bit-rate-limited Gaussian channel between encoder and decoder.

Scalar rate-distortion functions for a Gaussian source, greedy one-bit-at-a-
time allocation over independent components (each bit quarters the chosen
component's residual distortion), a continuous water-filling oracle, and the
optimal forward test channel realizing a rate-R link without quantization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Rates at or above this many bits are treated as the infinite-rate limit:
# the channel passes the encoder value through unaltered.
INFINITE_RATE_BITS = 64


def rate_of_distortion(variance: float, d: float) -> float:
    """Bits needed to represent a Gaussian of the given variance at distortion d."""
    if d <= 0:
        raise ValueError("distortion must be positive")
    if variance <= d:
        return 0.0
    return 0.5 * np.log2(variance / d)


def distortion_of_rate(variance: float, rate: float) -> float:
    """Distortion of a rate-limited Gaussian: variance * 2**(-2 * rate)."""
    if rate < 0:
        raise ValueError("rate must be non-negative")
    return variance * 2.0 ** (-2.0 * rate)


@dataclass
class BitAllocation:
    rates: np.ndarray  # integer bits per component
    budget: int
    variances: np.ndarray
    residual: np.ndarray  # variances * 4**(-rates)

    @property
    def total_residual(self) -> float:
        return float(self.residual.sum())


def allocate_bits(variances, budget: int) -> BitAllocation:
    """Greedy reverse water-filling with integer bits.

    Repeatedly gives one bit to the component with the largest residual
    distortion (ties break to the lowest index), dividing that residual by
    four. Components never selected keep zero bits.
    """
    variances = np.asarray(variances, dtype=np.float64)
    if np.any(variances < 0):
        raise ValueError("variances must be non-negative")
    if budget < 0:
        raise ValueError("budget must be non-negative")
    rates = np.zeros(variances.shape, dtype=np.int64)
    residual = variances.copy()
    for _ in range(budget):
        i = int(np.argmax(residual))  # argmax takes the lowest index on ties
        rates[i] += 1
        residual[i] /= 4.0
    return BitAllocation(rates=rates, budget=budget, variances=variances,
                         residual=residual)


def waterfill_continuous(variances, total_rate: float, tol: float = 1e-12) -> np.ndarray:
    """Classical reverse water-filling with real-valued rates.

    Finds the water level by bisection so that the per-component rates
    max(0, 1/2 log2(variance / level)) sum to total_rate within tol.
    """
    variances = np.asarray(variances, dtype=np.float64)
    if total_rate < 0:
        raise ValueError("total_rate must be non-negative")
    if total_rate == 0 or variances.size == 0:
        return np.zeros(variances.shape)
    if not np.any(variances > 0):
        raise ValueError("cannot allocate positive rate over all-zero variances")

    def rates_at(level: float) -> np.ndarray:
        return np.where(variances > level,
                        0.5 * np.log2(np.where(variances > level, variances, 1.0) / level),
                        0.0)

    hi = float(variances.max())
    lo = hi
    while rates_at(lo).sum() < total_rate:
        lo /= 4.0
    mid = lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gap = float(rates_at(mid).sum()) - total_rate
        if abs(gap) <= tol:
            break
        if gap > 0:
            lo = mid
        else:
            hi = mid
    return rates_at(mid)


@dataclass
class ChannelParams:
    """Per-component reference statistics and rates of the forward channel."""

    mean: np.ndarray  # reference mean per component
    variance: np.ndarray  # reference variance per component
    rates: np.ndarray  # bits per component

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.variance = np.asarray(self.variance, dtype=np.float64)
        self.rates = np.asarray(self.rates, dtype=np.float64)
        if not self.mean.shape == self.variance.shape == self.rates.shape:
            raise ValueError("mean, variance and rates must have equal shapes")
        if np.any(self.variance < 0) or np.any(self.rates < 0):
            raise ValueError("variance and rates must be non-negative")


def transmit(z_e, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Pass an encoder vector through the optimal forward test channel.

    Per component the decoder value is drawn from
    Normal(z_e + 2**(-2R) (mean - z_e), 2**(-4R) (2**(2R) - 1) variance).
    Zero-rate components return the reference mean deterministically; rates at
    or above INFINITE_RATE_BITS return the encoder value unaltered.
    """
    z_e = np.asarray(z_e, dtype=np.float64)
    if z_e.shape != params.mean.shape:
        raise ValueError("encoder vector length does not match channel params")
    rates = params.rates
    shrink = 2.0 ** (-2.0 * rates)
    mu_d = z_e + shrink * (params.mean - z_e)
    var_d = 2.0 ** (-4.0 * rates) * (2.0 ** (2.0 * rates) - 1.0) * params.variance
    z_d = mu_d + np.sqrt(var_d) * rng.standard_normal(z_e.shape)
    z_d = np.where(rates == 0, params.mean, z_d)
    return np.where(rates >= INFINITE_RATE_BITS, z_e, z_d)
