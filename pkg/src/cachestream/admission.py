"""Distance-based interference management for admitting a new streaming link.

All ratios here are linear. ``GAMMA_2`` is the gamma function at 2 (= 1),
kept as a named constant so the formulas read the same as their derivation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .config import SimConfig

GAMMA_2 = math.gamma(2.0)


@dataclass(frozen=True)
class AdmissionParams:
    rho: float = 0.0  # INR threshold
    gamma_min: float = 1.0  # minimum SINR
    eta_min: float = 0.99
    lambda_n: float = 0.0  # intensity of nodes caching the desired content, per m^2
    psi0: float = 0.0  # transmit SNR of the interfering node
    upsilon0: float = 0.0  # INR observed at the new user

    def __post_init__(self):
        for name in ("rho", "gamma_min", "lambda_n", "psi0", "upsilon0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0.0 < self.eta_min < 1.0:
            raise ValueError("eta_min must lie in (0, 1)")


def gamma_min(cfg: SimConfig) -> float:
    """SINR at which one lowest-quality chunk fits in ``t0``: t0 W log2(1+g) = N[0]."""
    return 2.0 ** (cfg.N[0] / (cfg.t0 * cfg.W)) - 1.0


def params_from_config(cfg: SimConfig, lambda_n: float | None = None, **kw) -> AdmissionParams:
    """Admission inputs implied by a run config. ``lambda_n`` defaults to ``cfg.lam``."""
    return AdmissionParams(gamma_min=gamma_min(cfg), eta_min=cfg.eta_min,
                           lambda_n=cfg.lam if lambda_n is None else lambda_n, **kw)


def eta(params: AdmissionParams, psi: float, upsilon: float) -> float:
    """Probability that the strongest content-holding node clears ``gamma_min``."""
    x = math.pi * GAMMA_2 * params.lambda_n * psi / (params.gamma_min * (upsilon + 1.0))
    return -math.expm1(-x)


def rho_threshold(params: AdmissionParams, psi: float) -> float:
    """Largest INR for which ``eta >= eta_min`` still holds."""
    if params.gamma_min <= 0 or params.lambda_n <= 0:
        raise ValueError("gamma_min and lambda_n must be positive")
    rho = (math.pi * GAMMA_2 * params.lambda_n * psi
           / (params.gamma_min * math.log(1.0 / (1.0 - params.eta_min)))) - 1.0
    if rho < 0:
        raise ValueError(f"criterion (gamma_min, eta_min) infeasible: rho = {rho:.4g}")
    return rho


def min_intensity(cfg: SimConfig) -> float:
    """Least intensity of content-holding nodes meeting (gamma_min, eta_min)."""
    return (gamma_min(cfg) * math.log(1.0 / (1.0 - cfg.eta_min)) * (1.0 + cfg.upsilon)
            / (math.pi * GAMMA_2 * cfg.psi))


def safety_radii(psi0: float, rho: float, delta: float) -> tuple[float, float]:
    """``(R_N, R_U)`` keeping a single dominant interferer below ``rho`` / ``delta``."""
    if rho <= 0 or delta <= 0:
        raise ValueError("rho and delta must be positive")
    return math.sqrt(psi0 / rho), math.sqrt(psi0 / delta)


@dataclass(frozen=True)
class AdmissionDecision:
    admitted: bool
    reason: str | None = None


def admit_new_link(upsilon0: float, rho: float, node_distance_to_existing_users: Sequence[float],
                   R_U: float) -> AdmissionDecision:
    """Two gates: INR at the new user, then distance from the new node to existing users."""
    if upsilon0 > rho:
        return AdmissionDecision(False, "user INR")
    if any(d < R_U for d in node_distance_to_existing_users):
        return AdmissionDecision(False, "node too close")
    return AdmissionDecision(True)
