"""Best-of-both-worlds elimination policy for general feedback graphs.

The policy assumes a stochastic world and eliminates arms whose
importance-weighted mean trails the leader by more than ``5r + 3r``.
Deleted dominating arms keep being re-sampled with a decaying probability
so that eliminated arms stay monitored; if any eliminated arm climbs back
to within ``3r + r`` of the leader the world is declared adversarial and
play hands over to Exp3.G for the rest of the horizon.

The functions below operate on a :class:`BobwState` in place and follow the
round order: distribution, observation update, elimination, dominating-set
maintenance, tau-prime assignment, adversary check.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .exp3g import Exp3gState, exp3g_distribution, exp3g_init, exp3g_update
from .feedback import ActionDistribution, RoundObservation, observation_probability
from .graph import DominatingSet, FeedbackGraph, validate_dominating_set

BOBW = "BOBW"
EXP3G = "EXP3G"


def gamma_schedule(t: int, K: int, dom_size: int) -> float:
    """``min(1, K^(2/3) |D|^(1/3) t^(-1/3))``."""
    return min(1.0, (K * K * dom_size / t) ** (1.0 / 3.0))


@dataclass(frozen=True)
class BobwParams:
    graph: FeedbackGraph
    dom: DominatingSet
    delta: float = 0.05
    gamma_override: float | None = None
    # dominators[i]: members of D whose out-neighbourhood contains arm i
    dominators: tuple = field(init=False, repr=False, compare=False)
    dom_size: int = field(init=False, repr=False, compare=False)
    _gamma_coef: float = field(init=False, repr=False, compare=False)
    _gamma_memo: list = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        dom = validate_dominating_set(self.graph, self.dom)
        object.__setattr__(self, "dom", dom)
        if self.gamma_override is not None:
            if self.gamma_override <= 0:
                raise ValueError(f"gamma_override must be positive, got {self.gamma_override}")
            coef = float(self.gamma_override) ** 3
        else:
            coef = float(self.graph.K * self.graph.K * len(dom))
        object.__setattr__(self, "_gamma_coef", coef)
        object.__setattr__(self, "dom_size", len(dom))
        object.__setattr__(self, "_gamma_memo", [(0, 1.0)])
        out = self.graph.out_lists
        doms = [()] + [tuple(j for j in dom if i in out[j]) for i in range(1, self.graph.K + 1)]
        object.__setattr__(self, "dominators", tuple(doms))

    @property
    def K(self) -> int:
        return self.graph.K

    def gamma(self, t: int) -> float:
        memo = self._gamma_memo[0]
        if memo[0] == t:
            return memo[1]
        if self.gamma_override is None:
            g = gamma_schedule(t, self.graph.K, self.dom_size)
        else:
            g = min(1.0, (self._gamma_coef / t) ** (1.0 / 3.0))
        self._gamma_memo[0] = (t, g)
        return g


@dataclass
class BobwState:
    K: int
    active: set
    active_dom: set
    tau: dict = field(default_factory=dict)
    tau_dom: dict = field(default_factory=dict)
    tau_prime: dict = field(default_factory=dict)
    frozen_u: dict = field(default_factory=dict)
    est_sum: list = None
    est_comp: list = None  # Neumaier compensation for est_sum
    inv_gamma_sum: list = None
    round: int = 1
    phase: str = BOBW
    detect_round: int | None = None

    @classmethod
    def initial(cls, params: BobwParams) -> "BobwState":
        K = params.K
        d = len(params.dom)
        return cls(
            K=K,
            active=set(range(1, K + 1)),
            active_dom=set(params.dom),
            frozen_u={j: 1.0 / d for j in params.dom},
            est_sum=[0.0] * K,
            est_comp=[0.0] * K,
            inv_gamma_sum=[0.0] * K,
        )

    def estimate(self, i: int, t: int | None = None) -> float:
        """Importance-weighted running mean of arm ``i`` after round ``t``."""
        t = self.round if t is None else t
        return (self.est_sum[i - 1] + self.est_comp[i - 1]) / t

    def to_snapshot(self) -> dict:
        return {
            "K": self.K,
            "round": self.round,
            "phase": self.phase,
            "detect_round": self.detect_round,
            "active": sorted(self.active),
            "active_dom": sorted(self.active_dom),
            "tau": {str(k): v for k, v in sorted(self.tau.items())},
            "tau_dom": {str(k): v for k, v in sorted(self.tau_dom.items())},
            "tau_prime": {str(k): v for k, v in sorted(self.tau_prime.items())},
            "frozen_u": {str(k): v for k, v in sorted(self.frozen_u.items())},
            "est_sum": list(self.est_sum),
            "est_comp": list(self.est_comp),
            "inv_gamma_sum": list(self.inv_gamma_sum),
        }

    @classmethod
    def from_snapshot(cls, data: dict) -> "BobwState":
        def keyed(d):
            return {int(k): v for k, v in d.items()}

        return cls(
            K=int(data["K"]),
            active=set(data["active"]),
            active_dom=set(data["active_dom"]),
            tau=keyed(data["tau"]),
            tau_dom=keyed(data["tau_dom"]),
            tau_prime=keyed(data["tau_prime"]),
            frozen_u={int(k): float(v) for k, v in data["frozen_u"].items()},
            est_sum=[float(x) for x in data["est_sum"]],
            est_comp=[float(x) for x in data["est_comp"]],
            inv_gamma_sum=[float(x) for x in data["inv_gamma_sum"]],
            round=int(data["round"]),
            phase=data["phase"],
            detect_round=data["detect_round"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_snapshot(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "BobwState":
        return cls.from_snapshot(json.loads(text))


@dataclass
class RoundEvents:
    round: int
    eliminated: list = field(default_factory=list)
    dom_deleted: list = field(default_factory=list)
    tau_prime_set: list = field(default_factory=list)
    detected: bool = False

    def __bool__(self):
        return bool(self.eliminated or self.dom_deleted or self.tau_prime_set or self.detected)


def action_distribution(state: BobwState, params: BobwParams) -> ActionDistribution:
    if state.phase != BOBW:
        raise RuntimeError("action_distribution called after the Exp3.G handoff")
    if not state.active:
        raise RuntimeError("inconsistent state: active arm set is empty")
    t = state.round
    K = state.K
    g = params.gamma(t)

    explore = [0.0] * K
    resample = 0.0
    for j in params.dom:
        if j not in state.active_dom:
            v = state.frozen_u[j] * state.tau_dom[j] / t
            explore[j - 1] = v
            resample += v
    if state.active_dom:
        share = max(0.0, 1.0 - resample) / len(state.active_dom)
        for j in state.active_dom:
            explore[j - 1] = share
    if resample > 1.0:
        explore = [x / resample for x in explore]

    exploit = [0.0] * K
    a = 1.0 / len(state.active)
    for i in state.active:
        exploit[i - 1] = a

    h = 1.0 - g
    probs = [h * x + g * y for x, y in zip(exploit, explore)]
    if not state.active_dom and resample < 1.0:
        # leftover exploration mass goes to the surviving candidates
        deficit = g * (1.0 - resample)
        probs = [p + deficit * x for p, x in zip(probs, exploit)]
    return ActionDistribution(probs, exploit, explore, g)


def observe_update(state: BobwState, obs: RoundObservation, dist: ActionDistribution,
                   params: BobwParams) -> BobwState:
    t = state.round
    probs = dist.probs
    in_lists = params.graph.in_lists
    est, comp = state.est_sum, state.est_comp
    for j, r in obs.observed:
        q = observation_probability(probs, in_lists[j])
        if q <= 0.0:
            raise RuntimeError(f"arm {j} observed with zero observation probability at round {t}")
        x = r / q
        k = j - 1
        s = est[k]
        tot = s + x
        if abs(s) >= abs(x):
            comp[k] += (s - tot) + x
        else:
            comp[k] += (x - tot) + s
        est[k] = tot
    inv = 1.0 / dist.gamma_t
    igs = state.inv_gamma_sum
    tp = state.tau_prime
    for k in range(state.K):
        stop = tp.get(k + 1)
        if stop is None or stop >= t:
            igs[k] += inv
    return state


def radius_value(inv_gamma_sum: float, t: int, tau_prime: int | None, gamma_t: float,
                 dom_size: int, delta: float) -> float:
    """Confidence radius given the truncated sum of ``1/gamma_s`` up to ``min(t, tau')``.

    ``tau_prime=None`` stands for tau' = infinity.
    """
    log_term = math.log(t / delta)
    var = dom_size * inv_gamma_sum / (t * t)
    if tau_prime is None or tau_prime >= t:
        tail = 5.0 * dom_size * dom_size / (gamma_t * gamma_t * t * t)
    else:
        var += dom_size * (t - tau_prime) / (gamma_t * tau_prime * t)
        tail = 5.0 * dom_size * dom_size / (gamma_t * gamma_t * tau_prime * tau_prime)
    return math.sqrt(4.0 * var * log_term + tail * log_term * log_term)


def radius(state: BobwState, i: int, t: int, params: BobwParams) -> float:
    return radius_value(state.inv_gamma_sum[i - 1], t, state.tau_prime.get(i), params.gamma(t),
                        params.dom_size, params.delta)


def _radius_fn(state, t, params):
    # arms sharing tau' (including "unset") share the truncated 1/gamma sum, hence the radius
    g = params.gamma(t)
    d = params.dom_size
    cache = {}
    tp = state.tau_prime
    igs = state.inv_gamma_sum

    def rad(i):
        key = tp.get(i)
        r = cache.get(key)
        if r is None:
            r = cache[key] = radius_value(igs[i - 1], t, key, g, d, params.delta)
        return r

    return rad


def _estimates(state, t):
    return [0.0] + [(s + c) / t for s, c in zip(state.est_sum, state.est_comp)]


def _leader(active, h):
    best, best_h = 0, -math.inf
    for i in sorted(active):
        if h[i] > best_h:
            best, best_h = i, h[i]
    return best


def leader(state: BobwState, t: int | None = None) -> int:
    """Active arm with the highest estimate; ties go to the smallest label."""
    return _leader(state.active, _estimates(state, state.round if t is None else t))


def elimination_scan(state: BobwState, t: int, params: BobwParams) -> list:
    h = _estimates(state, t)
    rad = _radius_fn(state, t, params)
    lead = _leader(state.active, h)
    threshold = h[lead] - 5.0 * rad(lead)
    removed = [i for i in sorted(state.active) if i != lead and threshold - h[i] > 3.0 * rad(i)]
    for i in removed:
        state.active.discard(i)
        state.tau[i] = t
    return removed


def dominating_scan(state: BobwState, t: int, dist: ActionDistribution, params: BobwParams) -> list:
    out = params.graph.out_lists
    active = state.active
    single = len(active) == 1
    removed = [j for j in sorted(state.active_dom) if single or active.isdisjoint(out[j])]
    for j in removed:
        state.active_dom.discard(j)
        state.tau_dom[j] = t
        state.frozen_u[j] = dist.explore_part[j - 1]
    return removed


def tau_prime_scan(state: BobwState, t: int, params: BobwParams) -> list:
    td = state.tau_dom
    if not td:
        return []
    assigned = []
    for i in range(1, state.K + 1):
        if i in state.tau_prime:
            continue
        if all(j in td and td[j] <= t for j in params.dominators[i]):
            state.tau_prime[i] = t
            assigned.append(i)
    return assigned


def adversary_check(state: BobwState, t: int, params: BobwParams) -> bool:
    if len(state.active) == state.K:
        return False
    h = _estimates(state, t)
    rad = _radius_fn(state, t, params)
    lead = _leader(state.active, h)
    h_lead, r_lead = h[lead], rad(lead)
    for i in range(1, state.K + 1):
        if i not in state.active and h_lead - h[i] <= 3.0 * r_lead + rad(i):
            state.phase = EXP3G
            state.detect_round = t
            return True
    return False


def step(state: BobwState, obs: RoundObservation, dist: ActionDistribution,
         params: BobwParams) -> RoundEvents:
    if state.phase != BOBW:
        raise RuntimeError("step called after the Exp3.G handoff")
    t = state.round
    events = RoundEvents(t)
    observe_update(state, obs, dist, params)
    events.eliminated = elimination_scan(state, t, params)
    events.dom_deleted = dominating_scan(state, t, dist, params)
    events.tau_prime_set = tau_prime_scan(state, t, params)
    events.detected = adversary_check(state, t, params)
    state.round = t + 1
    return events


class BobwPolicy:
    """Stateful wrapper: Algorithm state plus the Exp3.G phase after detection.

    ``horizon`` is only needed to size Exp3.G on the residual rounds.
    """

    name = "bobw"

    def __init__(self, params: BobwParams, horizon: int, state: BobwState | None = None):
        self.params = params
        self.horizon = horizon
        self.state = state or BobwState.initial(params)
        self.exp3g: Exp3gState | None = None

    @property
    def phase(self) -> str:
        return self.state.phase

    def distribution(self) -> ActionDistribution:
        if self.exp3g is not None:
            return exp3g_distribution(self.exp3g)
        return action_distribution(self.state, self.params)

    def update(self, obs: RoundObservation, dist: ActionDistribution) -> RoundEvents | None:
        if self.exp3g is not None:
            exp3g_update(self.exp3g, obs, dist)
            return None
        events = step(self.state, obs, dist, self.params)
        if events.detected:
            remaining = max(1, self.horizon - events.round)
            self.exp3g = exp3g_init(self.params.graph, self.params.dom, remaining)
        return events
