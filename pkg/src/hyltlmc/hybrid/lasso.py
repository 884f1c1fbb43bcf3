"""Lasso presentations of infinite sampled hybrid traces.

An infinite trace alternates trajectories and actions. The lasso form stores
a finite prefix of (trajectory, action) segments and a nonempty cycle of the
same shape; the cycle repeats forever. Segment i carries the action taken
right AFTER its trajectory.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import TraceError
from .trajectory import SampledTrajectory

Segment = tuple[SampledTrajectory, str]


class HybridLassoTrace:
    __slots__ = ("prefix", "cycle")

    def __init__(self, prefix: Sequence[Segment], cycle: Sequence[Segment]):
        if not cycle:
            raise TraceError("lasso trace needs a nonempty cycle")
        self.prefix = tuple(prefix)
        self.cycle = tuple(cycle)
        names = self.cycle[0][0].names
        for traj, action in (*self.prefix, *self.cycle):
            if traj.names != names:
                raise TraceError("all segments must range over the same variables")
            if not isinstance(action, str) or not action:
                raise TraceError("every segment needs a following action")

    @property
    def p(self) -> int:
        return len(self.prefix)

    @property
    def c(self) -> int:
        return len(self.cycle)

    @property
    def names(self) -> tuple[str, ...]:
        return self.cycle[0][0].names

    def segment(self, i: int) -> Segment:
        """Segment at 1-based position i of the infinite unfolding."""
        if i < 1:
            raise TraceError(f"positions are 1-based, got {i}")
        if i <= self.p:
            return self.prefix[i - 1]
        return self.cycle[(i - self.p - 1) % self.c]

    def trajectory(self, i: int) -> SampledTrajectory:
        return self.segment(i)[0]

    def action_after(self, i: int) -> str:
        return self.segment(i)[1]

    def action_before(self, i: int) -> str | None:
        """Action taken just before position i; None at position 1."""
        return None if i == 1 else self.action_after(i - 1)

    def rotate(self) -> "HybridLassoTrace":
        """Same infinite trace, presented with the cycle advanced one step."""
        return HybridLassoTrace(
            self.prefix + (self.cycle[0],), self.cycle[1:] + (self.cycle[0],)
        )

    def word(self) -> tuple[tuple[str, ...], tuple[str, ...]]:
        """The action lasso word (prefix actions, cycle actions)."""
        return (
            tuple(a for _, a in self.prefix),
            tuple(a for _, a in self.cycle),
        )

    def __repr__(self) -> str:
        u, v = self.word()
        return f"HybridLassoTrace(prefix={list(u)}, cycle={list(v)})"
