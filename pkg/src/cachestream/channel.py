"""Rayleigh link model and the distribution of deliverable bits per slot.

The fading power ``|u|^2`` is unit-mean exponential, so for a link at
distance ``d`` with ``S = Psi / (d^2 (Upsilon + 1))``::

    P{t_c R >= x} = exp(-(2^(x / (t_c W)) - 1) / S)

The DP works on a grid of ``cfg.b_unit`` bits; grid value ``n`` stands for
``floor(B / b_unit) == n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import SimConfig


@dataclass(frozen=True)
class LinkState:
    distance: float
    path_gain: float
    fading_power: float
    rate: float  # bits/s
    bits: int  # floor(t_c * rate)


def _snr_scale(distance: float, cfg: SimConfig) -> float:
    return cfg.psi / (distance * distance * (cfg.upsilon + 1.0))


def deliverable_bits(distance, fading_power, cfg: SimConfig):
    """``floor(t_c * W * log2(1 + S |u|^2))``; vectorized over ``fading_power``."""
    rate = cfg.W * np.log2(1.0 + _snr_scale(distance, cfg) * np.asarray(fading_power))
    return np.floor(cfg.t_c * rate).astype(np.int64)


def link_state(distance: float, fading_power: float, cfg: SimConfig) -> LinkState:
    if not distance > 0:
        raise ValueError(f"distance must be positive, got {distance}")
    gain = distance ** -2
    rate = cfg.W * math.log2(1.0 + cfg.psi * gain * fading_power / (cfg.upsilon + 1.0))
    return LinkState(distance, gain, fading_power, rate, math.floor(cfg.t_c * rate))


def draw_link(distance: float, cfg: SimConfig, rng: np.random.Generator) -> LinkState:
    if not distance > 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return link_state(distance, float(rng.standard_exponential()), cfg)


def ccdf_B(b, distance: float, cfg: SimConfig):
    """P{t_c R >= b} for ``b`` in bits (scalar or array)."""
    x = np.asarray(b, dtype=float) / (cfg.t_c * cfg.W)
    out = np.exp(-np.expm1(x * math.log(2.0)) / _snr_scale(distance, cfg))
    return float(out) if out.ndim == 0 else out


def grid_max(cfg: SimConfig, distance: float | None = None) -> int:
    """Top of the b-grid, in grid units."""
    if cfg.auto_bmax:
        if distance is None:
            raise ValueError("auto B_max needs a distance")
        return auto_bmax(distance, cfg, cfg.bmax_eps) // cfg.b_unit
    return cfg.B_max // cfg.b_unit


@dataclass(frozen=True)
class BDistribution:
    pmf: np.ndarray  # over grid values 0..grid_max
    tail_mass: float  # P{B > grid_max}, in grid units
    distance: float
    unit: int  # bits per grid step

    @property
    def grid_max(self) -> int:
        return len(self.pmf) - 1


def pmf_B(distance: float, cfg: SimConfig, top: int | None = None) -> BDistribution:
    """PMF of ``floor(B / b_unit)`` on ``0..top`` plus the mass above ``top``."""
    if not distance > 0:
        raise ValueError(f"distance must be positive, got {distance}")
    if top is None:
        top = grid_max(cfg, distance)
    edges = ccdf_B(np.arange(top + 2) * cfg.b_unit, distance, cfg)
    edges[0] = 1.0
    pmf = edges[:-1] - edges[1:]
    return BDistribution(pmf, float(edges[-1]), float(distance), cfg.b_unit)


@lru_cache(maxsize=4096)
def _pmf_cached(distance: float, cfg: SimConfig) -> BDistribution:
    return pmf_B(distance, cfg)


def cached_pmf_B(distance: float, cfg: SimConfig) -> BDistribution:
    """Same as :func:`pmf_B` with the configured top, memoized per distance."""
    return _pmf_cached(float(distance), cfg)


def auto_bmax(distance: float, cfg: SimConfig, epsilon: float) -> int:
    """Smallest positive grid value (in bits) whose ccdf falls below ``epsilon``.

    Solved in closed form, then nudged to the grid.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    s = _snr_scale(distance, cfg)
    # ccdf(x) < eps  <=>  x > t_c W log2(1 + s ln(1/eps))
    x = cfg.t_c * cfg.W * math.log2(1.0 + s * math.log(1.0 / epsilon))
    n = max(1, math.floor(x / cfg.b_unit))
    while n > 1 and ccdf_B((n - 1) * cfg.b_unit, distance, cfg) < epsilon:
        n -= 1
    while ccdf_B(n * cfg.b_unit, distance, cfg) >= epsilon:
        n += 1
    return n * cfg.b_unit
