"""Per-frame stochastic shortest path over (slot, headroom, deliverable bits).

State is the headroom ``z`` in ``0..Q_tilde``; the per-slot random event is
the deliverable-bit budget ``b``. The b-grid is split into contiguous
classes that share one feasible-action set, so the backward recursion and the
stored policy are indexed by class instead of by raw ``b``.

Ties in every argmin are broken in a fixed order: larger M first, then larger
q, with ``M = 0`` last. Action rows are laid out in that order so a plain
``argmin`` (first minimum) implements it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .channel import BDistribution, cached_pmf_B, grid_max
from .config import SimConfig


@dataclass(frozen=True, order=True)
class Action:
    M: int
    q: int | None = None  # 1-based quality; None iff M == 0

    def __post_init__(self):
        if (self.M == 0) != (self.q is None):
            raise ValueError("q is set exactly when M > 0")


NO_ACTION = Action(0)


def stage_cost(z: int, action: Action, cfg: SimConfig) -> float:
    """Drift bound plus weighted quality loss for one slot."""
    slack = cfg.c - action.M
    cost = z * slack + 0.5 * slack * slack
    if action.M:
        cost += cfg.V * (cfg.P_bar - cfg.P[action.q - 1]) * action.M
    return cost


def feasible_actions(z: int, b: int, l: int, cfg: SimConfig) -> list[Action]:
    """All (M, q) with ``M N[q] <= b``, ``q <= l`` and ``M <= min(z + c, Q_tilde)``.

    ``b`` is in bits. Returned in tie-break order, ``M = 0`` last.
    """
    cap = min(z + cfg.c, cfg.Q_tilde)
    out = []
    for M in range(cap, 0, -1):
        for q in range(l, 0, -1):
            if M * cfg.N[q - 1] <= b:
                out.append(Action(M, q))
    out.append(NO_ACTION)
    return out


def end_costs(cfg: SimConfig) -> np.ndarray:
    """Terminal cost by headroom: ``A`` in the stall band, truncated exponential below."""
    z = np.arange(cfg.Q_tilde + 1)
    out = 1e-3 * cfg.A_end * cfg.mu * np.exp(-cfg.mu * (cfg.Q_tilde - z))
    out[cfg.Q_tilde - cfg.c + 1:] = cfg.A_end
    return out


@dataclass(frozen=True, eq=False)
class ActionSpace:
    """Actions, b-classes and stage-cost tables for one node type."""

    node_type: int
    top: int  # grid_max, grid units
    unit: int
    sizes: tuple[int, ...]  # chunk sizes in grid units (rounded up)
    actions: tuple[Action, ...]
    thresholds: np.ndarray  # least grid b admitting each action
    lows: np.ndarray  # first grid value of each class
    class_mask: np.ndarray  # (n_classes, n_actions)
    cap_mask: np.ndarray  # (n_actions, n_z): M <= min(z + c, Q_tilde)
    stage: np.ndarray  # (n_actions, n_z), inf where cap_mask is False
    next_z: np.ndarray  # (n_actions, n_z)

    @property
    def n_classes(self) -> int:
        return len(self.lows)

    def class_bounds(self) -> list[tuple[int, int]]:
        highs = list(self.lows[1:] - 1) + [self.top]
        return [(int(a), int(b)) for a, b in zip(self.lows, highs)]

    def class_index(self, b_bits: int) -> int:
        g = min(int(b_bits) // self.unit, self.top)
        return int(np.searchsorted(self.lows, g, side="right")) - 1

    def class_probabilities(self, bdist: BDistribution) -> np.ndarray:
        """Class masses; the tail above the grid folds into the top class."""
        if bdist.grid_max != self.top or bdist.unit != self.unit:
            raise ValueError("distribution grid does not match the action space")
        csum = np.concatenate(([0.0], np.cumsum(bdist.pmf)))
        edges = np.append(self.lows, self.top + 1)
        probs = csum[edges[1:]] - csum[edges[:-1]]
        probs[-1] += bdist.tail_mass
        return probs

    def evaluations_per_slot(self) -> int:
        """(z, class, action) triples the recursion evaluates in one slot."""
        return int((self.class_mask.astype(np.int64) @ self.cap_mask).sum())


def build_action_space(cfg: SimConfig, node_type: int, top: int) -> ActionSpace:
    return _action_space(cfg, node_type, top)


@lru_cache(maxsize=256)
def _action_space(cfg: SimConfig, l: int, top: int) -> ActionSpace:
    if not 1 <= l <= cfg.L:
        raise ValueError(f"node type must lie in 1..{cfg.L}")
    unit = cfg.b_unit
    sizes = tuple(-(-n // unit) for n in cfg.N[:l])
    m_max = min(top // sizes[0], cfg.Q_tilde)
    actions = [Action(M, q) for M in range(m_max, 0, -1) for q in range(l, 0, -1)
               if M * sizes[q - 1] <= top]
    actions.append(NO_ACTION)
    thresholds = np.array([a.M * sizes[a.q - 1] if a.M else 0 for a in actions])
    lows = np.unique(thresholds)
    class_mask = thresholds[None, :] <= lows[:, None]

    z = np.arange(cfg.Q_tilde + 1)
    M = np.array([a.M for a in actions])[:, None]
    loss = np.array([cfg.P_bar - cfg.P[a.q - 1] if a.M else 0.0 for a in actions])[:, None]
    room = np.minimum(z + cfg.c, cfg.Q_tilde)[None, :]
    cap_mask = M <= room
    slack = cfg.c - M
    stage = z[None, :] * slack + 0.5 * slack * slack + cfg.V * loss * M
    stage = np.where(cap_mask, stage, np.inf)
    next_z = np.clip(room - M, 0, None)
    for arr in (thresholds, lows, class_mask, cap_mask, stage, next_z):
        arr.setflags(write=False)
    return ActionSpace(l, top, unit, sizes, tuple(actions), thresholds, lows,
                       class_mask, cap_mask, stage, next_z)


@dataclass(frozen=True, eq=False)
class PolicyTable:
    """Value tables and optimal actions for one candidate over one frame.

    ``J[t, z]`` for ``t`` in ``0..T`` (row ``T`` is the end cost);
    ``G[t, n, z]`` and ``theta[t, n, z]`` for class ``n``.
    """

    space: ActionSpace
    J: np.ndarray
    G: np.ndarray
    theta: np.ndarray  # indices into space.actions
    class_prob: np.ndarray
    bdist: BDistribution | None
    evaluations: int  # total over all slots

    @property
    def node_type(self) -> int:
        return self.space.node_type

    @property
    def horizon(self) -> int:
        return self.G.shape[0]

    @property
    def evaluations_per_slot(self) -> int:
        return self.evaluations // self.horizon

    def rows(self) -> Iterator[tuple[int, int, int, int, int | None, float]]:
        """``(t, z, class, M, q, G)`` for every table entry."""
        T, nB, nZ = self.G.shape
        for t in range(T):
            for n in range(nB):
                for z in range(nZ):
                    a = self.space.actions[self.theta[t, n, z]]
                    yield t, z, n, a.M, a.q, float(self.G[t, n, z])


TIE_RTOL = 1e-12  # relative to the largest |cost| among a state's actions


def solve(space: ActionSpace, class_prob: np.ndarray, end: np.ndarray, horizon: int,
          stage: np.ndarray | None = None):
    """Backward recursion. Returns ``(J, G, theta)``.

    ``stage`` overrides the space's stage-cost matrix (same shape).
    """
    stage = space.stage if stage is None else stage
    nB, nZ = space.n_classes, stage.shape[1]
    J = np.empty((horizon + 1, nZ))
    G = np.empty((horizon, nB, nZ))
    theta = np.empty((horizon, nB, nZ), dtype=np.int16)
    J[horizon] = end
    blocked = ~space.class_mask[:, :, None]
    for t in range(horizon - 1, -1, -1):
        q_values = stage + J[t + 1][space.next_z]
        per_class = np.where(blocked, np.inf, q_values[None, :, :])
        low = per_class.min(axis=1)
        # near-equal costs count as ties so the priority order decides, not rounding
        scale = np.abs(np.where(np.isfinite(q_values), q_values, 0.0)).max(axis=0)
        near = per_class <= low[:, None, :] + TIE_RTOL * scale
        theta[t] = near.argmax(axis=1)
        G[t] = low
        J[t] = class_prob @ G[t]
    return J, G, theta


def backward_dp(node_type: int, bdist: BDistribution, cfg: SimConfig,
                horizon: int | None = None, end: np.ndarray | None = None) -> PolicyTable:
    """Solve one frame for a node of ``node_type`` whose bit budget follows ``bdist``."""
    horizon = cfg.T if horizon is None else horizon
    space = build_action_space(cfg, node_type, bdist.grid_max)
    class_prob = space.class_probabilities(bdist)
    end = end_costs(cfg) if end is None else np.asarray(end, dtype=float)
    J, G, theta = solve(space, class_prob, end, horizon)
    return PolicyTable(space, J, G, theta, class_prob, bdist,
                       horizon * space.evaluations_per_slot())


def solve_for_node(node_type: int, distance: float, cfg: SimConfig) -> PolicyTable:
    return backward_dp(node_type, cached_pmf_B(distance, cfg), cfg)


def frame_value(table: PolicyTable, z0: int) -> float:
    """Minimum expected frame cost from headroom ``z0``."""
    return float(table.J[0, z0])


def lookup_action(table: PolicyTable, t: int, z: int, b: int) -> Action:
    """Stored optimal action at slot ``t`` of the frame; ``b`` in bits."""
    n = table.space.class_index(b)
    return table.space.actions[table.theta[t, n, z]]


def complexity(space: ActionSpace, cfg: SimConfig) -> dict[str, float]:
    """Class count and mean feasible-action count, from :func:`feasible_actions`.

    Independent of the masks used inside :func:`solve`; the product
    ``n_states * N_B * N_theta`` should equal ``space.evaluations_per_slot()``.
    """
    n_states = cfg.Q_tilde + 1
    total = 0
    for lo, _ in space.class_bounds():
        for z in range(n_states):
            total += len(feasible_actions(z, lo * space.unit, space.node_type, cfg))
    n_b = space.n_classes
    return {"n_states": n_states, "N_B": n_b, "N_theta": total / (n_states * n_b),
            "predicted": total}
