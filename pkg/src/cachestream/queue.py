"""Playback buffer in the (Q, Z) views.

``Z = Q_tilde - Q`` is the headroom; the Z update is taken as the source of
truth and Q is derived from it. Arrivals are limited to
``M <= min(Z + c, Q_tilde)`` so that Z never goes negative.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class QueueState:
    Q_tilde: int
    c: int
    Z: int

    @classmethod
    def initial(cls, Q_tilde: int, c: int) -> "QueueState":
        return cls(Q_tilde, c, Q_tilde)

    @property
    def Q(self) -> int:
        return self.Q_tilde - self.Z

    def max_arrivals(self) -> int:
        return min(self.Z + self.c, self.Q_tilde)


@dataclass(frozen=True)
class SlotOutcome:
    stalled: bool
    chunks_received: int
    quality_chosen: int | None = None


def is_feasible_M(state: QueueState, M: int) -> bool:
    return 0 <= M <= state.max_arrivals()


def step(state: QueueState, M: int, q: int | None = None) -> tuple[QueueState, SlotOutcome]:
    """Advance one slot with ``M`` arriving chunks of quality ``q``."""
    if not is_feasible_M(state, M):
        raise ValueError(f"M={M} exceeds capacity bound {state.max_arrivals()}")
    stalled = state.Q < state.c
    z_next = state.max_arrivals() - M
    return (QueueState(state.Q_tilde, state.c, z_next),
            SlotOutcome(stalled, M, q if M > 0 else None))


def q_update(Q: int, c: int, M: int) -> int:
    """The Q-view update, ``max(Q - c, 0) + M``."""
    return max(Q - c, 0) + M
