"""JSON experiment configs.

Unknown keys are rejected and relative paths resolve against the config
file's directory. Validation errors carry the offending field and, when it
can be located, the line it sits on.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .environments import GENERATORS, REWARD_LAWS, AdversarialEnv, EnvError, StochasticEnv, load_table_csv
from .graph import FAMILIES, FeedbackGraph, GraphError, graph_from_dict, load_graph
from .harness import POLICIES, GraphSpec, RunConfig

TOP_KEYS = {"graph", "dominating_set", "policy", "environment", "horizon", "delta", "seed", "n_seeds",
            "trace_stride", "gamma_override", "output_dir", "plot"}
GRAPH_KEYS = {"family", "K", "edge_prob", "seed", "file", "edges"}
STOCH_KEYS = {"type", "means", "reward_law", "width", "allow_ties"}
ADV_KEYS = {"type", "generator", "table", "base_means", "switch_period", "switch_fraction", "seed"}
PLOT_KEYS = {"enabled", "title"}


class ConfigError(ValueError):
    def __init__(self, field_name, message, line=None, path=None):
        self.field = field_name
        self.line = line
        self.path = path
        where = f"{path}:{line}: " if line else (f"{path}: " if path else "")
        super().__init__(f"{where}field '{field_name}': {message}")


@dataclass
class ExperimentConfig:
    graph: FeedbackGraph | GraphSpec
    environment: dict
    horizon: int
    policy: str = "bobw"
    dominating_set: object = "greedy"
    delta: float = 0.05
    seed: int = 0
    n_seeds: int = 1
    trace_stride: int = 100
    gamma_override: float | None = None
    output_dir: Path | None = None
    plot: dict = field(default_factory=lambda: {"enabled": False, "title": None})
    base_dir: Path = Path(".")
    table: object = None  # loaded CSV for table environments

    def build_env(self, horizon: int | None = None):
        e = self.environment
        T = self.horizon if horizon is None else horizon
        if e["type"] == "stochastic":
            return StochasticEnv(tuple(e["means"]), e.get("reward_law", "bernoulli"), e.get("width", 0.1),
                                 e.get("allow_ties", False))
        period = e.get("switch_period")
        if period is None and "switch_fraction" in e:
            period = max(1, round(T * e["switch_fraction"]))
        return AdversarialEnv(e["generator"], table=self.table, switch_period=period or 1,
                              base_means=tuple(e.get("base_means", ())), seed=e.get("seed"))

    def run_config(self, horizon: int | None = None) -> RunConfig:
        T = self.horizon if horizon is None else horizon
        dom = self.dominating_set if isinstance(self.dominating_set, str) else tuple(self.dominating_set)
        return RunConfig(graph=self.graph, env=self.build_env(T), horizon=T, policy=self.policy, dom=dom,
                         delta=self.delta, seed=self.seed, trace_stride=self.trace_stride,
                         gamma_override=self.gamma_override)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed)


def _line_of(text, key):
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def parse_config(text: str, base_dir: Path = Path("."), path=None) -> ExperimentConfig:
    def fail(name, msg, key=None):
        raise ConfigError(name, msg, _line_of(text, key or name.split(".")[-1]), path)

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", exc.msg, exc.lineno, path) from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object", 1, path)
    for k in data:
        if k not in TOP_KEYS:
            fail(k, "unknown key")
    for req in ("graph", "environment", "horizon"):
        if req not in data:
            raise ConfigError(req, "missing required key", None, path)

    T = data["horizon"]
    if not _is_int(T) or T < 1:
        fail("horizon", f"must be a positive integer, got {T!r}")
    delta = data.get("delta", 0.05)
    if not _is_num(delta) or not 0.0 < delta < 1.0:
        fail("delta", f"must lie in (0, 1), got {delta!r}")
    policy = data.get("policy", "bobw")
    if policy not in POLICIES:
        fail("policy", f"must be one of {list(POLICIES)}, got {policy!r}")
    for name, lo in (("seed", 0), ("n_seeds", 1), ("trace_stride", 1)):
        if name in data and (not _is_int(data[name]) or data[name] < lo):
            fail(name, f"must be an integer >= {lo}, got {data[name]!r}")
    gamma_override = data.get("gamma_override")
    if gamma_override is not None and (not _is_num(gamma_override) or gamma_override <= 0):
        fail("gamma_override", f"must be a positive number or null, got {gamma_override!r}")

    graph = _parse_graph(data["graph"], base_dir, fail)
    env = data["environment"]
    table = _check_env(env, base_dir, fail)

    dom = data.get("dominating_set", "greedy")
    if not (dom == "greedy" or (isinstance(dom, list) and dom and all(_is_int(x) for x in dom))):
        fail("dominating_set", 'must be "greedy" or a non-empty list of arms')

    plot = data.get("plot", {})
    if not isinstance(plot, dict):
        fail("plot", "must be an object")
    for k in plot:
        if k not in PLOT_KEYS:
            fail(f"plot.{k}", "unknown key")
    plot = {"enabled": bool(plot.get("enabled", False)), "title": plot.get("title")}

    out = data.get("output_dir")
    cfg = ExperimentConfig(
        graph=graph, environment=env, horizon=T, policy=policy, dominating_set=dom, delta=float(delta),
        seed=data.get("seed", 0), n_seeds=data.get("n_seeds", 1), trace_stride=data.get("trace_stride", 100),
        gamma_override=gamma_override, output_dir=(base_dir / out) if out else None, plot=plot,
        base_dir=base_dir, table=table,
    )
    # construct once so semantic errors (bad dominating set, arm-count mismatch) surface as config errors
    try:
        rc = cfg.run_config()
        g = rc.resolve_graph()
        rc.resolve_dom(g)
        if rc.env.K != g.K:
            fail("environment", f"has {rc.env.K} arms but the graph has {g.K}")
    except GraphError as exc:
        fail("dominating_set" if "dominating" in str(exc) else "graph", str(exc))
    except EnvError as exc:
        fail("environment", str(exc))
    except ValueError as exc:
        fail("<config>", str(exc), key="horizon")
    return cfg


def _parse_graph(g, base_dir, fail):
    if not isinstance(g, dict):
        fail("graph", "must be an object")
    for k in g:
        if k not in GRAPH_KEYS:
            fail(f"graph.{k}", "unknown key")
    try:
        if "file" in g:
            return load_graph(base_dir / g["file"])
        if "edges" in g:
            return graph_from_dict({"K": g.get("K"), "edges": g["edges"]})
        if g.get("family") not in FAMILIES:
            fail("graph.family", f"must be one of {list(FAMILIES)}, got {g.get('family')!r}", key="family")
        if not _is_int(g.get("K")):
            fail("graph.K", "must be an integer", key="K")
        spec = GraphSpec(g["family"], g["K"], g.get("edge_prob"), g.get("seed"))
        spec.resolve(0)  # parameter validation
        return spec
    except (GraphError, OSError) as exc:
        fail("graph", str(exc))


def _check_env(e, base_dir, fail):
    if not isinstance(e, dict):
        fail("environment", "must be an object")
    kind = e.get("type")
    if kind == "stochastic":
        allowed = STOCH_KEYS
        if not isinstance(e.get("means"), list) or not all(_is_num(m) for m in e["means"]):
            fail("environment.means", "must be a list of numbers", key="means")
        if e.get("reward_law", "bernoulli") not in REWARD_LAWS:
            fail("environment.reward_law", f"must be one of {list(REWARD_LAWS)}", key="reward_law")
    elif kind == "adversarial":
        allowed = ADV_KEYS
        if e.get("generator") not in GENERATORS:
            fail("environment.generator", f"must be one of {list(GENERATORS)}", key="generator")
        if "switch_fraction" in e and not (_is_num(e["switch_fraction"]) and 0 < e["switch_fraction"] <= 1):
            fail("environment.switch_fraction", "must lie in (0, 1]", key="switch_fraction")
    else:
        fail("environment.type", 'must be "stochastic" or "adversarial"', key="type")
    for k in e:
        if k not in allowed:
            fail(f"environment.{k}", "unknown key", key=k)
    if kind == "adversarial" and e["generator"] == "table":
        if not isinstance(e.get("table"), str):
            fail("environment.table", "must be a path to a CSV file", key="table")
        try:
            return load_table_csv(base_dir / e["table"])
        except (EnvError, OSError) as exc:
            fail("environment.table", str(exc), key="table")
    return None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", str(exc), None, path) from None
    return parse_config(text, path.parent, path)
