"""Frame/slot simulation loop and Monte Carlo replication.

Random streams are derived from ``(seed, frame, stream)``, so every policy
in a trial sees the same node field and the same per-slot fading draws
(common random numbers). Slot fading is drawn per node type; a policy uses
the column of the node it associated with. At the decision slot the fading
used to build the candidate set is reused for the first slot of the frame.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import queue as playback
from .channel import deliverable_bits
from .config import SimConfig
from .geometry import candidate_set, sample_field
from .mdp import NO_ACTION
from .policy import ALL_KINDS, EmptyCandidateSet, PolicyKind, TableCache, choose_action, choose_node

log = logging.getLogger(__name__)

GEOMETRY, FADING = 0, 1

TRACE_FIELDS = ("t", "frame", "node_type", "distance_m", "b_bits", "M", "q", "Q", "Z", "stalled")


def stream(seed: int, frame: int, which: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(frame, which)))


@dataclass
class RunMetrics:
    slots: int = 0
    stalls: int = 0
    total_chunks: int = 0
    quality_sum: float = 0.0  # sum of P[q] M
    clean_quality_sum: float = 0.0  # same, only frames without a stall
    loss_sum: float = 0.0  # sum of (P_bar - P[q]) M
    empty_frames: int = 0
    trace: list[tuple] | None = None
    frames: list[dict] = field(default_factory=list)

    @property
    def delay_rate(self) -> float:
        return self.stalls / self.slots if self.slots else 0.0

    @property
    def avg_quality_per_chunk(self) -> float:
        return self.quality_sum / self.total_chunks if self.total_chunks else math.nan

    @property
    def avg_quality_stall_zeroed(self) -> float:
        """Chunks of a frame that saw a stall count with quality zero."""
        return self.clean_quality_sum / self.total_chunks if self.total_chunks else math.nan

    @property
    def objective_estimate(self) -> float:
        return self.loss_sum / self.slots if self.slots else 0.0

    def quality(self, cfg: SimConfig) -> float:
        """Headline quality metric selected by ``cfg.stall_quality_accounting``."""
        if cfg.stall_quality_accounting:
            return self.avg_quality_stall_zeroed
        return self.avg_quality_per_chunk

    def summary(self) -> dict[str, float]:
        return {"delay_rate": self.delay_rate,
                "avg_quality_per_chunk": self.avg_quality_per_chunk,
                "avg_quality_stall_zeroed": self.avg_quality_stall_zeroed,
                "total_chunks": self.total_chunks,
                "objective_estimate": self.objective_estimate}


class _Runner:
    """Mutable per-policy state inside one trial."""

    def __init__(self, kind: PolicyKind, cfg: SimConfig, trace: bool):
        self.kind = kind
        self.state = playback.QueueState.initial(cfg.Q_tilde, cfg.c)
        self.metrics = RunMetrics(trace=[] if trace else None)


def run_trials(cfg: SimConfig, kinds: Iterable[PolicyKind | str], seed: int,
               trace: bool = False) -> dict[PolicyKind, RunMetrics]:
    """Run several policies over the same random realization."""
    kinds = [PolicyKind(k) for k in kinds]
    runners = [_Runner(k, cfg, trace) for k in kinds]
    T, P = cfg.T, cfg.P
    for k in range(cfg.K):
        field_ = sample_field(cfg, stream(seed, k, GEOMETRY), k)
        rng = stream(seed, k, FADING)
        cands = candidate_set(field_, rng.standard_exponential(len(field_)))
        slot_fading = rng.standard_exponential((T, cfg.L))
        budgets = {}
        for node, u0 in zip(cands.candidates, cands.fading_power):
            column = slot_fading[:, node.node_type - 1].copy()
            column[0] = u0
            budgets[node.index] = deliverable_bits(node.distance, column, cfg).tolist()
        tables = TableCache(cfg)

        for run in runners:
            m = run.metrics
            try:
                decision = choose_node(run.kind, cands, run.state.Z, cfg, tables)
            except EmptyCandidateSet:
                decision = None
                m.empty_frames += 1
                log.debug("frame %d: no candidates, forcing M=0", k)
            if decision is not None:
                node = decision.chosen
                bits = budgets[node.index]
                m.frames.append({"frame": k, "node_type": node.node_type,
                                 "distance": node.distance, "values": decision.frame_values})
            frame_quality, frame_stalled = 0.0, False
            for s in range(T):
                z = run.state.Z
                if decision is None:
                    b, action = 0, NO_ACTION
                else:
                    b = bits[s]
                    action = choose_action(run.kind, decision, s, z, b, cfg)
                if m.trace is not None:
                    m.trace.append((k * T + s, k, node.node_type if decision else 0,
                                    node.distance if decision else math.nan, b, action.M,
                                    action.q or 0, run.state.Q, z,
                                    int(run.state.Q < cfg.c)))
                run.state, out = playback.step(run.state, action.M, action.q)
                m.slots += 1
                m.stalls += out.stalled
                frame_stalled |= out.stalled
                if action.M:
                    m.total_chunks += action.M
                    m.quality_sum += P[action.q - 1] * action.M
                    frame_quality += P[action.q - 1] * action.M
                    m.loss_sum += (cfg.P_bar - P[action.q - 1]) * action.M
            if not frame_stalled:
                m.clean_quality_sum += frame_quality
    return {run.kind: run.metrics for run in runners}


def run_trial(cfg: SimConfig, kind: PolicyKind | str, seed: int, trace: bool = False) -> RunMetrics:
    return run_trials(cfg, [kind], seed, trace)[PolicyKind(kind)]


def trial_seeds(base_seed: int, trials: int) -> list[int]:
    """Per-trial 64-bit seeds; a prefix does not change when ``trials`` grows."""
    return [int(np.random.SeedSequence(base_seed, spawn_key=(i,)).generate_state(1, np.uint64)[0])
            for i in range(trials)]


@dataclass
class ExperimentResult:
    cfg: SimConfig
    kinds: tuple[PolicyKind, ...]
    seeds: list[int]
    # kind -> metric name -> per-trial values
    samples: dict[PolicyKind, dict[str, np.ndarray]]

    METRICS = ("delay_rate", "avg_quality_per_chunk", "avg_quality_stall_zeroed")

    def values(self, kind: PolicyKind | str, metric: str) -> np.ndarray:
        return self.samples[PolicyKind(kind)][metric]

    def quality_metric(self) -> str:
        return ("avg_quality_stall_zeroed" if self.cfg.stall_quality_accounting
                else "avg_quality_per_chunk")

    def mean(self, kind, metric: str) -> float:
        return mean_stderr(self.values(kind, metric))[0]

    def rows(self) -> list[tuple[str, str, float, float, int]]:
        out = []
        for kind in self.kinds:
            for metric in self.METRICS:
                mean, err = mean_stderr(self.values(kind, metric))
                out.append((kind.value, metric, mean, err, len(self.seeds)))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("policy", "metric", "mean", "stderr", "trials"))
        for policy, metric, mean, err, n in self.rows():
            w.writerow((policy, metric, f"{mean:.10g}", f"{err:.10g}", n))
        return buf.getvalue()


def mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error, ignoring NaN trials; stderr is 0 for one sample."""
    x = np.asarray(values, dtype=float)
    x = x[~np.isnan(x)]
    if len(x) == 0:
        return math.nan, math.nan
    if len(x) == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(len(x)))


def _trial_summary(args):
    cfg, kinds, seed = args
    return {k: r.summary() for k, r in run_trials(cfg, kinds, seed).items()}


def run_experiment(cfg: SimConfig, kinds: Iterable[PolicyKind | str] = ALL_KINDS,
                   trials: int = 1, base_seed: int | None = None,
                   workers: int = 1) -> ExperimentResult:
    """Replicate paired trials; results do not depend on ``workers``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    kinds = tuple(PolicyKind(k) for k in kinds)
    seeds = trial_seeds(cfg.seed if base_seed is None else base_seed, trials)
    jobs = [(cfg, kinds, s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_trial_summary, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        results = [_trial_summary(j) for j in jobs]
    samples = {k: {m: np.array([r[k][m] for r in results]) for m in ExperimentResult.METRICS}
               for k in kinds}
    return ExperimentResult(cfg, kinds, seeds, samples)


def trace_csv(metrics: RunMetrics) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_FIELDS)
    for row in metrics.trace or ():
        w.writerow(f"{v:.6f}" if isinstance(v, float) else v for v in row)
    return buf.getvalue()
