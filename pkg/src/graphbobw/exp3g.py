"""Exp3.G for weakly observable feedback graphs (gain form).

Exponential weights over all arms mixed with uniform exploration on a
dominating set. Gains are importance weighted by the probability that the
arm is revealed, the same ``q_t(i)`` used by the elimination policy.

The exploration rate and learning rate target the
``(|D| log K)^(1/3) T^(2/3)`` rate; the constants are our own tuning:

    gamma = min(1/2, (K |D| ln K)^(1/3) T^(-1/3))
    eta   = min(sqrt(gamma ln K / (T K |D|)), gamma / |D|)

The ``gamma / |D|`` cap keeps every single update ``eta * g_hat <= 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .feedback import ActionDistribution, RoundObservation, observation_probability
from .graph import DominatingSet, FeedbackGraph, validate_dominating_set


@dataclass
class Exp3gState:
    graph: FeedbackGraph
    explore_set: DominatingSet
    log_weights: list
    gamma: float
    eta: float
    horizon: int
    round: int = 0


def exp3g_init(graph: FeedbackGraph, dom: DominatingSet, horizon: int,
               gamma: float | None = None, eta: float | None = None) -> Exp3gState:
    """Fresh Exp3.G state sized for ``horizon`` rounds.

    ``gamma``/``eta`` overrides exist for tests; ``gamma=0`` gives plain
    exponential weights.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    dom = validate_dominating_set(graph, dom)
    K, d = graph.K, len(dom)
    log_k = math.log(K)
    if gamma is None:
        gamma = min(0.5, (K * d * log_k / horizon) ** (1.0 / 3.0))
    if not 0.0 <= gamma <= 0.5:
        raise ValueError(f"gamma must lie in [0, 1/2], got {gamma}")
    if eta is None:
        eta = math.sqrt(gamma * log_k / (horizon * K * d))
        if gamma > 0:
            eta = min(eta, gamma / d)
    return Exp3gState(graph, dom, [0.0] * K, float(gamma), float(eta), int(horizon))


def exp3g_distribution(state: Exp3gState) -> ActionDistribution:
    lw = state.log_weights
    top = max(lw)
    w = [math.exp(x - top) for x in lw]
    z = sum(w)
    soft = [x / z for x in w]
    explore = [0.0] * len(lw)
    share = 1.0 / len(state.explore_set)
    for j in state.explore_set:
        explore[j - 1] = share
    g = state.gamma
    probs = [(1.0 - g) * s + g * e for s, e in zip(soft, explore)]
    return ActionDistribution(probs, soft, explore, g)


def exp3g_update(state: Exp3gState, obs: RoundObservation, dist: ActionDistribution) -> Exp3gState:
    in_lists = state.graph.in_lists
    for j, r in obs.observed:
        q = observation_probability(dist.probs, in_lists[j])
        if q <= 0.0:
            raise RuntimeError(f"arm {j} observed with zero observation probability")
        state.log_weights[j - 1] += state.eta * r / q
    state.round += 1
    return state


class Exp3gPolicy:
    name = "exp3g"

    def __init__(self, graph: FeedbackGraph, dom: DominatingSet, horizon: int):
        self.state = exp3g_init(graph, dom, horizon)

    def distribution(self) -> ActionDistribution:
        return exp3g_distribution(self.state)

    def update(self, obs: RoundObservation, dist: ActionDistribution):
        exp3g_update(self.state, obs, dist)
        return None
