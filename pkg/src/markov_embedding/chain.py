from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InputError

FLOAT_TOL = 1e-10


@dataclass
class MarkovChain:
    """Finite homogeneous chain with a 0/1 reward on every state.

    ``edges[i]`` lists ``(j, probability, symbols)``; the count increment of
    an edge is the reward of its destination, and the first symbol's
    increment is the reward of the initial state.  Chains built to a finite
    horizon may contain terminal states (no outgoing edges) that are only
    reached at the last step; ``horizon`` then bounds usable lengths.
    """

    states: list
    initial: list
    edges: list
    reward: list
    horizon: int | None = None
    names: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.states)
        if not (len(self.initial) == len(self.edges) == len(self.reward) == n):
            raise InputError("chain arrays must have one entry per state")
        self.index = {s: i for i, s in enumerate(self.states)}
        if not self.names:
            self.names = [str(s) for s in self.states]
        self._check_sum(self.initial, "initial distribution")
        for i, out in enumerate(self.edges):
            for j, p, _ in out:
                if not 0 <= j < n:
                    raise InputError(f"edge from state {i} to undeclared state {j}")
                if p < 0:
                    raise InputError(f"negative transition probability out of state {i}")
            if out:
                self._check_sum([p for _, p, _ in out], f"outgoing law of state {self.names[i]}")
            elif self.horizon is None:
                raise InputError(f"state {self.names[i]} has no outgoing transitions")

    @staticmethod
    def _check_sum(values, what):
        total = sum(values)
        if isinstance(total, Fraction) and all(isinstance(v, Fraction) for v in values):
            ok = total == 1
        else:
            ok = abs(float(total) - 1.0) <= FLOAT_TOL
        if not ok:
            raise InputError(f"{what} sums to {total}, not 1")

    @property
    def exact(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.initial) and all(
            isinstance(p, Fraction) for out in self.edges for _, p, _ in out)

    @property
    def n_states(self) -> int:
        return len(self.states)

    def increment(self, j: int) -> int:
        return self.reward[j]

    def transition(self, i: int, j: int):
        return sum((p for k, p, _ in self.edges[i] if k == j), 0 * self.initial[0])

    def terminal(self) -> list[int]:
        return [i for i, out in enumerate(self.edges) if not out]
