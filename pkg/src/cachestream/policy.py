"""Frame-level node association and per-slot (M, q) decisions.

Four policies share one interface:

* ``proposed``: node minimizing the optimal expected frame cost, slot
  decisions from that node's DP table.
* ``strongest``: node with the largest channel power at the decision slot,
  DP slot decisions.
* ``highest-quality``: node of the highest type, DP slot decisions.
* ``one-step``: node chosen like ``proposed``; slot decisions minimize the
  current stage cost only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import SimConfig
from .geometry import CachingNode, CandidateSet
from .mdp import Action, PolicyTable, build_action_space, frame_value, lookup_action, solve_for_node
from .channel import grid_max


class PolicyKind(str, enum.Enum):
    PROPOSED = "proposed"
    STRONGEST = "strongest"
    HIGHEST_QUALITY = "highest-quality"
    ONE_STEP = "one-step"

    @classmethod
    def parse(cls, text: str) -> "PolicyKind":
        key = text.strip().lower().replace("_", "-")
        aliases = {"highestquality": "highest-quality", "onestep": "one-step"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown policy {text!r}; expected one of "
                             f"{[k.value for k in cls]}") from None


ALL_KINDS = tuple(PolicyKind)


class EmptyCandidateSet(LookupError):
    """No caching node of any type around the user."""


class TableCache:
    """Per-frame memo of DP tables keyed by candidate, shared across policies."""

    def __init__(self, cfg: SimConfig, solver: Callable[[CachingNode], PolicyTable] | None = None):
        self.cfg = cfg
        self._solver = solver or (lambda node: solve_for_node(node.node_type, node.distance, cfg))
        self._tables: dict[tuple[int, float], PolicyTable] = {}
        self.solved = 0

    def __call__(self, node: CachingNode) -> PolicyTable:
        key = (node.node_type, node.distance)
        table = self._tables.get(key)
        if table is None:
            table = self._tables[key] = self._solver(node)
            self.solved += 1
        return table


@dataclass(frozen=True)
class FrameDecision:
    kind: PolicyKind
    chosen: CachingNode
    table: PolicyTable | None
    frame_values: dict[int, float] = field(default_factory=dict)  # candidate slot -> value


def _rank_key(value: float, node: CachingNode):
    # lower cost, then higher type, then shorter distance
    return (value, -node.node_type, node.distance)


def choose_node(kind: PolicyKind, candidates: CandidateSet, z0: int, cfg: SimConfig,
                tables: Callable[[CachingNode], PolicyTable] | None = None) -> FrameDecision:
    if candidates.empty:
        raise EmptyCandidateSet("no caching node around the user")
    tables = tables or TableCache(cfg)
    nodes = candidates.candidates
    kind = PolicyKind(kind)

    if kind in (PolicyKind.PROPOSED, PolicyKind.ONE_STEP):
        values = {i: frame_value(tables(n), z0) for i, n in enumerate(nodes)}
        best = min(values, key=lambda i: _rank_key(values[i], nodes[i]))
        table = tables(nodes[best]) if kind is PolicyKind.PROPOSED else None
        return FrameDecision(kind, nodes[best], table, values)

    if kind is PolicyKind.STRONGEST:
        power = candidates.channel_power
        best = max(range(len(nodes)), key=lambda i: (power[i], -nodes[i].distance))
    else:
        # one node per type by construction; channel power breaks any tie
        power = candidates.channel_power
        best = max(range(len(nodes)), key=lambda i: (nodes[i].node_type, power[i]))
    return FrameDecision(kind, nodes[best], tables(nodes[best]))


def one_step_action(z: int, b: int, node_type: int, cfg: SimConfig,
                    top: int | None = None) -> Action:
    """Feasible action with the smallest immediate stage cost."""
    if top is None:
        top = grid_max(cfg)
    space = build_action_space(cfg, node_type, top)
    n = space.class_index(b)
    costs = np.where(space.class_mask[n], space.stage[:, z], np.inf)
    return space.actions[int(costs.argmin())]


def choose_action(kind: PolicyKind, decision: FrameDecision, t: int, z: int, b: int,
                  cfg: SimConfig) -> Action:
    """Action for slot ``t`` of the frame (0-based) at headroom ``z`` and budget ``b`` bits."""
    if PolicyKind(kind) is PolicyKind.ONE_STEP:
        top = grid_max(cfg, decision.chosen.distance if cfg.auto_bmax else None)
        return one_step_action(z, b, decision.chosen.node_type, cfg, top)
    return lookup_action(decision.table, t, z, b)
