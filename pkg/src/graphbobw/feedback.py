"""Types shared by every policy: the per-round action distribution and the
observation the harness hands back after sampling."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass
class ActionDistribution:
    """Probabilities over arms for one round.

    Vectors are positional: entry ``i - 1`` belongs to arm ``i``.
    ``probs = (1 - gamma_t) * exploit_part + gamma_t * explore_part`` up to
    the residual-mass correction a policy may apply.
    """

    probs: list
    exploit_part: list
    explore_part: list
    gamma_t: float


@dataclass(frozen=True)
class RoundObservation:
    chosen: int
    chosen_reward: float
    observed: tuple  # ((arm, reward), ...) for arms in out(chosen), ascending

    def __post_init__(self):
        for arm, r in self.observed:
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"reward {r} for arm {arm} outside [0, 1]")


def observation_probability(probs, in_list) -> float:
    """q(i): chance that arm i is revealed, i.e. the mass on its in-neighbours."""
    q = 0.0
    for j in in_list:
        q += probs[j - 1]
    return q
