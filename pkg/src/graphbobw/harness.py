"""Learner/environment interaction, regret bookkeeping and replication.

The harness is the only place that sees full reward vectors. Policies get a
:class:`RoundObservation` holding the chosen arm's reward and the rewards of
its out-neighbours, nothing else.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bobw import BobwParams, BobwPolicy
from .environments import AdversarialEnv, StochasticEnv
from .exp3g import Exp3gPolicy
from .feedback import ActionDistribution, RoundObservation
from .graph import DominatingSet, FeedbackGraph, greedy_dominating_set, make_graph, validate_dominating_set

POLICIES = ("bobw", "exp3g", "uniform")
_BLOCK = 4096


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for the named purpose (``policy``, ``rewards``, ...)."""
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class GraphSpec:
    family: str
    K: int
    edge_prob: float | None = None
    seed: int | None = None  # random families fall back to the run seed

    def resolve(self, run_seed: int) -> FeedbackGraph:
        seed = self.seed
        if seed is None and self.family == "random_observable":
            seed = int(substream(run_seed, "graph").integers(2**63))
        return make_graph(self.family, self.K, self.edge_prob, seed)


class UniformPolicy:
    name = "uniform"

    def __init__(self, K: int):
        p = [1.0 / K] * K
        self._dist = ActionDistribution(p, p, [0.0] * K, 0.0)

    def distribution(self):
        return self._dist

    def update(self, obs, dist):
        return None


@dataclass(frozen=True)
class RunConfig:
    graph: FeedbackGraph | GraphSpec
    env: StochasticEnv | AdversarialEnv
    horizon: int
    policy: str = "bobw"
    dom: DominatingSet | tuple | str = "greedy"
    delta: float = 0.05
    seed: int = 0
    trace_stride: int = 100
    gamma_override: float | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be at least 1, got {self.horizon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}; expected one of {POLICIES}")
        if self.trace_stride < 1:
            raise ValueError("trace_stride must be at least 1")

    def with_seed(self, seed: int) -> "RunConfig":
        return dataclasses.replace(self, seed=seed)

    def resolve_graph(self) -> FeedbackGraph:
        if isinstance(self.graph, GraphSpec):
            return self.graph.resolve(self.seed)
        return self.graph

    def resolve_dom(self, graph: FeedbackGraph) -> DominatingSet:
        if isinstance(self.dom, str):
            if self.dom != "greedy":
                raise ValueError(f'dominating set must be "greedy" or a list of arms, got {self.dom!r}')
            return greedy_dominating_set(graph)
        return validate_dominating_set(graph, self.dom)

    def resolve_env(self):
        env = self.env
        if isinstance(env, AdversarialEnv) and env.seed is None and env.generator != "table":
            env = dataclasses.replace(env, seed=int(substream(self.seed, "environment").integers(2**63)))
        return env


def make_policy(config: RunConfig, graph: FeedbackGraph, dom: DominatingSet):
    if config.policy == "bobw":
        params = BobwParams(graph, dom, config.delta, config.gamma_override)
        return BobwPolicy(params, config.horizon)
    if config.policy == "exp3g":
        return Exp3gPolicy(graph, dom, config.horizon)
    return UniformPolicy(graph.K)


@dataclass
class RunRecord:
    seed: int
    policy: str
    horizon: int
    regret_trace: list  # [(round, regret)]
    pull_counts: list
    total_regret: float
    tau: dict = field(default_factory=dict)
    tau_dom: dict = field(default_factory=dict)
    tau_prime: dict = field(default_factory=dict)
    detect_round: int | None = None
    dom: tuple = ()
    wall_time: float = field(default=0.0, compare=False)

    def events_dict(self) -> dict:
        return {
            "tau": {str(k): v for k, v in sorted(self.tau.items())},
            "tau_dom": {str(k): v for k, v in sorted(self.tau_dom.items())},
            "tau_prime": {str(k): v for k, v in sorted(self.tau_prime.items())},
            "detect_round": self.detect_round,
            "pull_counts": list(self.pull_counts),
        }

    def to_json(self) -> str:
        """Canonical serialisation; timing is excluded so reruns are byte-identical."""
        d = self.events_dict()
        d.update(seed=self.seed, policy=self.policy, horizon=self.horizon, dom=list(self.dom),
                 total_regret=self.total_regret,
                 regret_trace=[[r, v] for r, v in self.regret_trace])
        return json.dumps(d, sort_keys=True)

    def regret_at(self, t: int) -> float:
        for r, v in self.regret_trace:
            if r == t:
                return v
        raise KeyError(f"round {t} not in the trace")


def _sample(probs, u):
    acc = 0.0
    last = 0
    for k, p in enumerate(probs):
        if p > 0.0:
            acc += p
            last = k
            if u < acc:
                return k + 1
    return last + 1


def run_once(config: RunConfig, observer: Callable | None = None, policy=None) -> RunRecord:
    """One seeded game of ``config.horizon`` rounds.

    ``observer(t, policy, dist, obs, events)`` is called after every update
    if given (used by the statistical tests). ``policy`` replaces the
    configured one, e.g. with a spy.
    """
    start = time.perf_counter()
    graph = config.resolve_graph()
    dom = config.resolve_dom(graph)
    env = config.resolve_env()
    if env.K != graph.K:
        raise ValueError(f"environment has {env.K} arms but the graph has {graph.K}")
    if policy is None:
        policy = make_policy(config, graph, dom)
    T, K = config.horizon, graph.K
    stride = config.trace_stride
    if isinstance(env, AdversarialEnv) and env.length is not None and env.length < T:
        raise ValueError(f"table has {env.length} rows, horizon is {T}")

    prng = substream(config.seed, "policy")
    rrng = substream(config.seed, "rewards")
    stochastic = isinstance(env, StochasticEnv)
    gaps = env.gaps if stochastic else None
    out_lists = graph.out_lists

    pulls = [0] * K
    regret, regret_c = 0.0, 0.0
    cum = [0.0] * K
    learner = 0.0
    trace = []
    tau, tau_dom, tau_prime = {}, {}, {}
    detect = None

    uniforms, rows = [], []
    pos = _BLOCK
    for t in range(1, T + 1):
        if pos == _BLOCK:
            n = min(_BLOCK, T - t + 1)
            uniforms = prng.random(n).tolist()
            rows = (env.draw(rrng, n) if stochastic else env.rows(t, t + n)).tolist()
            pos = 0
        dist = policy.distribution()
        arm = _sample(dist.probs, uniforms[pos])
        r = rows[pos]
        pos += 1
        obs = RoundObservation(arm, r[arm - 1], tuple((j, r[j - 1]) for j in out_lists[arm]))
        events = policy.update(obs, dist)
        pulls[arm - 1] += 1
        if stochastic:
            y = gaps[arm - 1] - regret_c
            s = regret + y
            regret_c = (s - regret) - y
            regret = s
        else:
            for k in range(K):
                cum[k] += r[k]
            learner += r[arm - 1]
        if observer is not None:
            observer(t, policy, dist, obs, events)
        forced = False
        if events:
            forced = True
            for i in events.eliminated:
                tau[i] = t
            for j in events.dom_deleted:
                tau_dom[j] = t
            for i in events.tau_prime_set:
                tau_prime[i] = t
            if events.detected:
                detect = t
        if forced or t % stride == 0 or t == T:
            trace.append((t, regret if stochastic else max(cum) - learner))

    total = trace[-1][1]
    return RunRecord(
        seed=config.seed, policy=config.policy, horizon=T, regret_trace=trace,
        pull_counts=pulls, total_regret=total, tau=tau, tau_dom=tau_dom, tau_prime=tau_prime,
        detect_round=detect, dom=tuple(dom.members), wall_time=time.perf_counter() - start,
    )


@dataclass
class AggregateRecord:
    rounds: list
    mean: list
    std: list
    q05: list
    q95: list
    runs: list

    @property
    def final_regrets(self) -> list:
        return [r.total_regret for r in self.runs]

    @property
    def mean_final(self) -> float:
        return self.mean[-1]

    def mean_at(self, t: int) -> float:
        return self.mean[self.rounds.index(t)]


def default_workers(n_tasks: int) -> int:
    cap = os.environ.get("GBL_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, min(n, n_tasks))


def _run_seed(args):
    config, seed = args
    try:
        return run_once(config.with_seed(seed))
    except Exception as exc:
        raise RuntimeError(f"replication with seed {seed} failed: {exc}") from exc


def run_replicated(config: RunConfig, n_seeds: int, workers: int | None = None) -> AggregateRecord:
    if n_seeds < 1:
        raise ValueError("n_seeds must be at least 1")
    seeds = [config.seed + k for k in range(n_seeds)]
    workers = default_workers(n_seeds) if workers is None else workers
    tasks = [(config, s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            runs = list(pool.map(_run_seed, tasks))
    else:
        runs = [_run_seed(a) for a in tasks]
    return aggregate(runs, config.trace_stride)


def aggregate(runs: list, stride: int) -> AggregateRecord:
    T = runs[0].horizon
    grid = list(range(stride, T + 1, stride))
    if not grid or grid[-1] != T:
        grid.append(T)
    mat = np.empty((len(runs), len(grid)))
    for n, run in enumerate(runs):
        lookup = dict(run.regret_trace)
        mat[n] = [lookup[t] for t in grid]
    std = mat.std(axis=0, ddof=1) if len(runs) > 1 else np.zeros(len(grid))
    q05, q95 = np.quantile(mat, [0.05, 0.95], axis=0)
    return AggregateRecord(grid, mat.mean(axis=0).tolist(), std.tolist(), q05.tolist(), q95.tolist(), runs)


def martingale_bound(variance_sum: float, b: float, n: int, delta: float) -> float:
    """Freedman-type deviation bound for a sum of ``n`` bounded martingale differences."""
    L = math.log(n / delta)
    return math.sqrt(4.0 * variance_sum * L + 5.0 * b * b * L * L)


def pull_count_bound(tau_i: int, tau_i_dom: int, gamma: Callable[[int], float], T: int, delta: float) -> float:
    """High-probability cap on the number of pulls of an arm.

    ``tau_i_dom = 0`` for arms outside the dominating set.
    """
    if tau_i_dom > 0:
        g = np.array([gamma(s) for s in range(1, T + 1)])
        s = np.arange(1, T + 1)
        head = float(g[:tau_i_dom].sum())
        tail = float(tau_i_dom * (g[tau_i_dom - 1:] / s[tau_i_dom - 1:]).sum())
    else:
        head = tail = 0.0
    base = tau_i + head + tail
    return base + martingale_bound(base, 1.0, T, delta)


def run_pull_bounds(record: RunRecord, params: BobwParams) -> list:
    """Per-arm pull caps for a completed run; unset deletion times count as ``T``."""
    T = record.horizon
    bounds = []
    for i in range(1, params.K + 1):
        tau_i = record.tau.get(i, T)
        tau_d = record.tau_dom.get(i, T) if i in params.dom else 0
        bounds.append(pull_count_bound(tau_i, tau_d, params.gamma, T, params.delta))
    return bounds


def trace_csv(record: RunRecord | AggregateRecord) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(record, RunRecord):
        w.writerow(["round", "regret"])
        for t, v in record.regret_trace:
            w.writerow([t, repr(float(v))])
    else:
        w.writerow(["round", "regret_mean", "regret_std", "regret_q05", "regret_q95"])
        for row in zip(record.rounds, record.mean, record.std, record.q05, record.q95):
            w.writerow([row[0]] + [repr(float(x)) for x in row[1:]])
    return buf.getvalue()


class TraceFormatError(ValueError):
    pass


def read_trace_csv(text: str) -> dict:
    """Parse a trace CSV into columns. Raises with the offending line number."""
    lines = list(csv.reader(io.StringIO(text)))
    if not lines:
        raise TraceFormatError("line 1: empty trace file")
    header = lines[0]
    if header not in (["round", "regret"], ["round", "regret_mean", "regret_std", "regret_q05", "regret_q95"]):
        raise TraceFormatError(f"line 1: unrecognised header {header}")
    cols = {h: [] for h in header}
    for n, row in enumerate(lines[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise TraceFormatError(f"line {n}: expected {len(header)} fields, got {len(row)}")
        try:
            cols["round"].append(int(row[0]))
            for h, v in zip(header[1:], row[1:]):
                x = float(v)
                if not math.isfinite(x):
                    raise ValueError
                cols[h].append(x)
        except ValueError:
            raise TraceFormatError(f"line {n}: non-numeric field") from None
    if not cols["round"]:
        raise TraceFormatError("line 2: trace has no data rows")
    return cols
