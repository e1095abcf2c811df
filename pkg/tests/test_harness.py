import math

import numpy as np
import pytest

from graphbobw.bobw import BobwParams
from graphbobw.environments import AdversarialEnv, StochasticEnv, materialize
from graphbobw.feedback import ActionDistribution
from graphbobw.graph import greedy_dominating_set, make_graph
from graphbobw.harness import (
    GraphSpec,
    RunConfig,
    TraceFormatError,
    aggregate,
    martingale_bound,
    pull_count_bound,
    read_trace_csv,
    run_once,
    run_pull_bounds,
    run_replicated,
    substream,
    trace_csv,
)


class FixedPolicy:
    """Plays one arm forever and records everything it is shown."""

    name = "fixed"

    def __init__(self, K, arm):
        p = [0.0] * K
        p[arm - 1] = 1.0
        self.dist = ActionDistribution(p, p, [0.0] * K, 0.0)
        self.seen = []

    def distribution(self):
        return self.dist

    def update(self, obs, dist):
        self.seen.append(obs)


class RandomSpy:
    name = "spy"

    def __init__(self, K):
        p = [1.0 / K] * K
        self.dist = ActionDistribution(p, p, [0.0] * K, 0.0)
        self.seen = []

    def distribution(self):
        return self.dist

    def update(self, obs, dist):
        self.seen.append(obs)


class TestRunOnce:
    def test_always_best_has_zero_regret(self):
        g = make_graph("bandit", 3)
        cfg = RunConfig(g, StochasticEnv((0.2, 0.8, 0.5)), 500)
        rec = run_once(cfg, policy=FixedPolicy(3, 2))
        assert rec.total_regret == 0.0
        assert rec.pull_counts == [0, 500, 0]

    def test_uniform_two_point(self):
        g = make_graph("clique_loops", 2)
        rec = run_once(RunConfig(g, StochasticEnv((1.0, 0.0)), 1000, policy="uniform", seed=11))
        assert abs(rec.total_regret - 500) <= 5 * math.sqrt(250)

    def test_rerun_is_byte_identical(self):
        g = GraphSpec("random_observable", 6, 0.3)
        cfg = RunConfig(g, StochasticEnv((0.9, 0.5, 0.5, 0.4, 0.3, 0.1)), 3000, seed=17)
        assert run_once(cfg).to_json() == run_once(cfg).to_json()

    def test_adversarial_rerun_is_byte_identical(self):
        g = make_graph("bar_augmented", 5)
        env = AdversarialEnv("mean_switch", base_means=(0.9, 0.7, 0.5, 0.3, 0.1), switch_period=300)
        cfg = RunConfig(g, env, 3000, seed=4)
        assert run_once(cfg).to_json() == run_once(cfg).to_json()

    def test_pull_counts_sum_to_horizon(self):
        g = make_graph("loopless_cycle", 4)
        rec = run_once(RunConfig(g, StochasticEnv((0.1, 0.2, 0.3, 0.9)), 1234, seed=1))
        assert sum(rec.pull_counts) == 1234
        assert rec.regret_trace[-1][0] == 1234

    def test_stochastic_trace_nondecreasing(self):
        g = make_graph("bar_augmented", 5)
        rec = run_once(RunConfig(g, StochasticEnv((0.8, 0.5, 0.5, 0.5, 0.5)), 5000, seed=3, trace_stride=50))
        vals = [v for _, v in rec.regret_trace]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        rounds = [t for t, _ in rec.regret_trace]
        assert rounds == sorted(set(rounds))

    def test_event_rounds_are_recorded(self):
        g = make_graph("clique_loops", 3)
        rec = run_once(RunConfig(g, StochasticEnv((0.9, 0.1, 0.2)), 6000, gamma_override=100.0, seed=2,
                                 trace_stride=1000))
        rounds = {t for t, _ in rec.regret_trace}
        assert set(rec.tau.values()) <= rounds

    @pytest.mark.parametrize("policy", ["bobw", "exp3g", "uniform"])
    def test_regret_identity(self, policy):
        g = make_graph("bar_augmented", 5)
        env = StochasticEnv((0.8, 0.45, 0.5, 0.6, 0.3))
        rec = run_once(RunConfig(g, env, 4000, policy=policy, seed=8))
        expect = sum(d * n for d, n in zip(env.gaps, rec.pull_counts))
        assert abs(rec.total_regret - expect) <= 1e-9

    def test_adversarial_regret_definition(self):
        g = make_graph("clique_loops", 2)
        tab = np.array([[1.0, 0.0]] * 30 + [[0.0, 1.0]] * 10)
        spy = FixedPolicy(2, 2)
        rec = run_once(RunConfig(g, AdversarialEnv("table", table=tab), 40), policy=spy)
        assert rec.total_regret == 20.0

    def test_short_table_rejected(self):
        g = make_graph("bandit", 2)
        with pytest.raises(ValueError):
            run_once(RunConfig(g, AdversarialEnv("table", table=np.zeros((5, 2))), 10))

    def test_arm_count_mismatch(self):
        with pytest.raises(ValueError):
            run_once(RunConfig(make_graph("bandit", 3), StochasticEnv((0.1, 0.9)), 10))


class TestInformationHygiene:
    @pytest.mark.parametrize("family", ["bar", "loopless_cycle", "clique_loops", "bandit"])
    def test_spy_sees_only_out_neighbours(self, family):
        g = make_graph(family, 4)
        env = AdversarialEnv("drift", base_means=(0.9, 0.1, 0.6, 0.3), switch_period=50, seed=5)
        spy = RandomSpy(4)
        run_once(RunConfig(g, env, 400, seed=1), policy=spy)
        rows = materialize(env, 400)
        for t, obs in enumerate(spy.seen, start=1):
            assert {j for j, _ in obs.observed} == g.out_neighbors(obs.chosen)
            assert obs.chosen_reward == rows[t - 1, obs.chosen - 1]
            assert all(r == rows[t - 1, j - 1] for j, r in obs.observed)


class TestSeedIsolation:
    def test_policy_choice_does_not_perturb_adversary(self):
        g = make_graph("bar_augmented", 5)
        env = AdversarialEnv("mean_switch", base_means=(0.9, 0.7, 0.5, 0.3, 0.1), switch_period=100)
        seen = {}
        for pol in ("bobw", "exp3g", "uniform"):
            cfg = RunConfig(g, env, 500, policy=pol, seed=21)
            rows = materialize(cfg.resolve_env(), 500)
            seen[pol] = rows
        assert np.array_equal(seen["bobw"], seen["exp3g"]) and np.array_equal(seen["bobw"], seen["uniform"])

    def test_stochastic_rewards_independent_of_policy(self):
        g = make_graph("clique_loops", 3)
        env = StochasticEnv((0.5, 0.4, 0.3))
        a, b = RandomSpy(3), FixedPolicy(3, 1)
        run_once(RunConfig(g, env, 300, seed=6), policy=a)
        run_once(RunConfig(g, env, 300, seed=6), policy=b)
        ra = [dict(o.observed) for o in a.seen]
        rb = [dict(o.observed) for o in b.seen]
        assert ra == rb

    def test_named_streams_differ(self):
        a = substream(3, "policy").random(8)
        b = substream(3, "rewards").random(8)
        assert not np.allclose(a, b)
        assert np.array_equal(a, substream(3, "policy").random(8))

    def test_random_graph_follows_run_seed(self):
        spec = GraphSpec("random_observable", 8, 0.3)
        assert spec.resolve(1) == spec.resolve(1)
        assert any(spec.resolve(1) != spec.resolve(s) for s in range(2, 6))


class TestReplicated:
    def cfg(self, **kw):
        g = make_graph("bar", 2)
        return RunConfig(g, StochasticEnv((0.6, 0.4)), 800, trace_stride=100, **kw)

    def test_single_seed_equals_run(self):
        cfg = self.cfg(seed=3)
        agg = run_replicated(cfg, 1, workers=1)
        rec = run_once(cfg)
        assert agg.runs[0].to_json() == rec.to_json()
        assert agg.mean == [v for _, v in rec.regret_trace]
        assert agg.std == [0.0] * len(agg.rounds)

    def test_mean_of_finals(self):
        agg = run_replicated(self.cfg(seed=10), 7, workers=1)
        assert agg.mean_final == pytest.approx(np.mean(agg.final_regrets), abs=1e-12)
        assert [r.seed for r in agg.runs] == list(range(10, 17))

    def test_parallel_matches_serial(self):
        cfg = self.cfg(seed=0)
        a = run_replicated(cfg, 4, workers=1)
        b = run_replicated(cfg, 4, workers=2)
        assert [r.to_json() for r in a.runs] == [r.to_json() for r in b.runs]
        assert a.mean == b.mean

    def test_bands_contain_mean_on_symmetric_instance(self):
        agg = run_replicated(RunConfig(make_graph("bandit", 2), StochasticEnv((0.6, 0.4)), 1000,
                                       policy="uniform", trace_stride=100), 100, workers=1)
        for lo, m, hi in zip(agg.q05, agg.mean, agg.q95):
            assert lo <= m <= hi

    def test_failing_seed_named(self):
        cfg = RunConfig(make_graph("bandit", 2), AdversarialEnv("table", table=np.zeros((3, 2))), 5, seed=42)
        with pytest.raises(RuntimeError, match="seed 42"):
            run_replicated(cfg, 2, workers=1)

    def test_aggregate_grid_includes_horizon(self):
        cfg = RunConfig(make_graph("bandit", 2), StochasticEnv((0.6, 0.4)), 250, trace_stride=100)
        agg = aggregate([run_once(cfg)], 100)
        assert agg.rounds == [100, 200, 250]


class TestBounds:
    def test_zero_variance(self):
        L = math.log(100 / 0.05)
        assert martingale_bound(0.0, 2.0, 100, 0.05) == pytest.approx(math.sqrt(5) * 2 * L)

    def test_three(self):
        assert martingale_bound(1.0, 1.0, 1, math.exp(-1)) == pytest.approx(3.0)

    def test_linear_in_b(self):
        assert martingale_bound(0, 4.0, 50, 0.1) == pytest.approx(2 * martingale_bound(0, 2.0, 50, 0.1))

    def test_non_dominating_arm(self):
        L = math.log(1000 / 0.05)
        got = pull_count_bound(37, 0, lambda s: 0.5, 1000, 0.05)
        assert got == pytest.approx(37 + math.sqrt(4 * 37 * L + 5 * L * L))

    def test_pure_slack(self):
        assert pull_count_bound(0, 0, lambda s: 1.0, 100, 0.05) == pytest.approx(math.sqrt(5) * math.log(2000))

    def test_harmonic_tail(self):
        harmonic = sum(1.0 / s for s in range(10, 101))
        middle = 10 + 10 * harmonic
        L = math.log(100 / 0.05)
        base = 7 + middle
        got = pull_count_bound(7, 10, lambda s: 1.0, 100, 0.05)
        assert middle == pytest.approx(33.58, abs=0.01)
        assert got == pytest.approx(base + math.sqrt(4 * base * L + 5 * L * L))

    def test_run_bounds_hold_on_a_run(self):
        g = make_graph("clique_loops", 3)
        cfg = RunConfig(g, StochasticEnv((0.9, 0.1, 0.2)), 6000, gamma_override=100.0, seed=9)
        rec = run_once(cfg)
        params = BobwParams(g, greedy_dominating_set(g), 0.05, 100.0)
        for n, b in zip(rec.pull_counts, run_pull_bounds(rec, params)):
            assert n <= b


class TestTraceCsv:
    def test_single_round_trip(self):
        rec = run_once(RunConfig(make_graph("bandit", 2), StochasticEnv((0.7, 0.2)), 330, seed=1))
        cols = read_trace_csv(trace_csv(rec))
        assert list(zip(cols["round"], cols["regret"])) == rec.regret_trace

    def test_aggregate_round_trip(self):
        agg = run_replicated(RunConfig(make_graph("bandit", 2), StochasticEnv((0.7, 0.2)), 300), 3, workers=1)
        cols = read_trace_csv(trace_csv(agg))
        assert cols["regret_mean"] == agg.mean and cols["regret_q95"] == agg.q95

    @pytest.mark.parametrize("text,line", [
        ("", 1),
        ("round,regret\n", 2),
        ("round,loss\n1,0\n", 1),
        ("round,regret\n1,0.5\n2,abc\n", 3),
        ("round,regret\n1,0.5,7\n", 2),
    ])
    def test_malformed(self, text, line):
        with pytest.raises(TraceFormatError, match=f"line {line}"):
            read_trace_csv(text)
