"""Parameter sweeps and the admission feasibility report."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import admission
from .config import CACHING_CASES, ConfigError, SimConfig, db_to_linear, with_caching_case
from .policy import ALL_KINDS, PolicyKind
from .sim import ExperimentResult, mean_stderr, run_experiment

AXES = ("lambda", "caching_case", "V", "upsilon_db")

SWEEP_FIELDS = ("axis", "value", "policy", "delay_mean", "delay_stderr",
                "quality_mean", "quality_stderr", "trials")


@dataclass
class SweepSpec:
    axis: str
    values: Sequence[float]
    fixed: SimConfig = field(default_factory=SimConfig)
    policies: Sequence[PolicyKind] = ALL_KINDS
    trials: int = 200
    output_path: str | Path | None = None
    base_seed: int | None = None

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; expected one of {AXES}")
        if not len(self.values):
            raise ConfigError("sweep needs at least one value")
        if self.axis == "caching_case":
            bad = [v for v in self.values if v not in CACHING_CASES]
            if bad:
                raise ConfigError(f"caching_case values must be in {sorted(CACHING_CASES)}")
        if len(set(self.values)) != len(self.values):
            raise ConfigError("sweep values must be distinct")
        self.policies = tuple(PolicyKind(p) for p in self.policies)

    def config_at(self, value) -> SimConfig:
        cfg = self.fixed
        if self.axis == "lambda":
            return cfg.replace(lam=float(value))
        if self.axis == "caching_case":
            return with_caching_case(cfg, int(value))
        if self.axis == "V":
            return cfg.replace(V=float(value))
        return cfg.replace(upsilon_db=float(value))


@dataclass
class SweepPoint:
    value: float
    result: ExperimentResult


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepPoint]:
    """Run every sweep point with the same trial seeds; write CSV if a path is set."""
    points = []
    for value in spec.values:
        cfg = spec.config_at(value)
        res = run_experiment(cfg, spec.policies, spec.trials, spec.base_seed
                             if spec.base_seed is not None else spec.fixed.seed, workers)
        points.append(SweepPoint(value, res))
    if spec.output_path is not None:
        Path(spec.output_path).write_text(sweep_csv(spec, points))
    return points


def sweep_csv(spec: SweepSpec, points: Sequence[SweepPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_FIELDS)
    for pt in points:
        res = pt.result
        qm = res.quality_metric()
        for kind in res.kinds:
            d_mean, d_err = mean_stderr(res.values(kind, "delay_rate"))
            q_mean, q_err = mean_stderr(res.values(kind, qm))
            w.writerow((spec.axis, pt.value, kind.value, f"{d_mean:.10g}", f"{d_err:.10g}",
                        f"{q_mean:.10g}", f"{q_err:.10g}", len(res.seeds)))
    return buf.getvalue()


@dataclass(frozen=True)
class Feasibility:
    gamma_min: float
    lambda_min: float
    rho: float | None
    R_N: float | None
    R_U: float | None
    type_intensity: tuple[float, ...]  # lambda * p_l

    @property
    def below_min(self) -> tuple[bool, ...]:
        return tuple(x < self.lambda_min for x in self.type_intensity)


def feasibility(cfg: SimConfig, psi0_db: float | None = None,
                delta_db: float | None = None) -> Feasibility:
    """Admission quantities for ``cfg``.

    The whole PPP holds the desired video (at some quality), so ``rho`` uses
    ``lambda_n = lam``. The interferer SNR defaults to the link SNR and the
    existing user's INR margin to ``rho - upsilon``.
    """
    lam_min = admission.min_intensity(cfg)
    g_min = admission.gamma_min(cfg)
    rho = r_n = r_u = None
    if cfg.lam > 0:
        try:
            rho = admission.rho_threshold(admission.params_from_config(cfg), cfg.psi)
        except ValueError:
            rho = None
    if rho is not None and rho > 0:
        psi0 = cfg.psi if psi0_db is None else db_to_linear(psi0_db)
        delta = rho - cfg.upsilon if delta_db is None else db_to_linear(delta_db)
        r_n = math.sqrt(psi0 / rho)
        if delta > 0:
            r_n, r_u = admission.safety_radii(psi0, rho, delta)
    return Feasibility(g_min, lam_min, rho, r_n, r_u, tuple(cfg.lam * p for p in cfg.p))


def feasibility_report(cfg: SimConfig, psi0_db: float | None = None,
                       delta_db: float | None = None) -> str:
    f = feasibility(cfg, psi0_db, delta_db)

    def fmt(x, unit=""):
        return "n/a" if x is None else f"{x:.4f}{unit}"

    lines = [
        f"gamma_min        {f.gamma_min:.4f}",
        f"lambda_min       {f.lambda_min:.4f} per m^2",
        f"rho              {fmt(f.rho)}",
        f"R_N              {fmt(f.R_N, ' m')}",
        f"R_U              {fmt(f.R_U, ' m')}",
    ]
    for l, (x, low) in enumerate(zip(f.type_intensity, f.below_min), start=1):
        flag = "  BELOW lambda_min" if low else ""
        lines.append(f"type {l}: lambda*p = {x:.4f}{flag}")
    return "\n".join(lines) + "\n"
