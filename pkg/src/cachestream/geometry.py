"""Poisson field of typed caching nodes and the per-frame candidate set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig


@dataclass(frozen=True)
class CachingNode:
    position: tuple[float, float]
    node_type: int  # 1..L; serves qualities 1..node_type
    distance: float
    index: int = -1  # row in the originating field

    @property
    def path_gain(self) -> float:
        return self.distance ** -2


@dataclass(frozen=True)
class NodeField:
    """Nodes around the user, stored as arrays grouped by type.

    ``offsets[l-1]:offsets[l]`` is the slice of type-``l`` nodes.
    """

    positions: np.ndarray  # (n, 2), meters relative to the user
    types: np.ndarray  # (n,), ints in 1..L
    offsets: np.ndarray  # (L + 1,)
    frame_index: int = 0

    @property
    def distances(self) -> np.ndarray:
        return np.hypot(self.positions[:, 0], self.positions[:, 1])

    def __len__(self) -> int:
        return len(self.types)

    def node(self, i: int) -> CachingNode:
        x, y = self.positions[i]
        return CachingNode((float(x), float(y)), int(self.types[i]),
                           float(np.hypot(x, y)), int(i))

    def type_counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def dump(self) -> str:
        """One node per line: ``x, y, type, distance``."""
        d = self.distances
        return "\n".join(f"{x:.6f}, {y:.6f}, {t}, {r:.6f}"
                         for (x, y), t, r in zip(self.positions, self.types, d))


def sample_field(cfg: SimConfig, rng: np.random.Generator, frame_index: int = 0) -> NodeField:
    """Draw independent PPPs of intensity ``lam * p_l`` in the disk of radius R_user."""
    area = np.pi * cfg.R_user ** 2
    counts = rng.poisson([cfg.lam * pl * area for pl in cfg.p])
    n = int(counts.sum())
    # 1 - U lies in (0, 1], so no node sits exactly on the user
    r = cfg.R_user * np.sqrt(1.0 - rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    positions = np.column_stack((r * np.cos(theta), r * np.sin(theta)))
    types = np.repeat(np.arange(1, cfg.L + 1), counts)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    return NodeField(positions, types, offsets, frame_index)


@dataclass(frozen=True)
class CandidateSet:
    """At most one node per type: the one with the strongest channel."""

    candidates: tuple[CachingNode, ...]
    channel_power: tuple[float, ...]  # |h|^2 = D |u|^2 at the decision slot
    fading_power: tuple[float, ...]  # |u|^2 at the decision slot

    @property
    def empty(self) -> bool:
        return not self.candidates

    @property
    def types(self) -> tuple[int, ...]:
        return tuple(n.node_type for n in self.candidates)

    def __len__(self) -> int:
        return len(self.candidates)


def candidate_set(field: NodeField, fading: np.ndarray) -> CandidateSet:
    """Pick, for each type present, the node maximizing ``D * |u|^2``.

    ``fading`` holds one unit-mean exponential draw per node. Ties go to the
    closer node, then to the lower index.
    """
    fading = np.asarray(fading, dtype=float)
    if fading.shape != (len(field),):
        raise ValueError("need exactly one fading draw per node")
    dist = field.distances
    power = fading / dist ** 2
    chosen, powers, fades = [], [], []
    for lo, hi in zip(field.offsets[:-1], field.offsets[1:]):
        if hi == lo:
            continue
        seg = power[lo:hi]
        best = seg.max()
        ties = np.flatnonzero(seg == best)
        if len(ties) > 1:
            # lexsort: last key is primary
            ties = ties[np.lexsort((ties, dist[lo:hi][ties]))]
        i = int(lo + ties[0])
        chosen.append(field.node(i))
        powers.append(float(power[i]))
        fades.append(float(fading[i]))
    return CandidateSet(tuple(chosen), tuple(powers), tuple(fades))
