import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphbobw.exp3g import Exp3gPolicy, exp3g_distribution, exp3g_init, exp3g_update
from graphbobw.feedback import RoundObservation
from graphbobw.graph import DominatingSet, greedy_dominating_set, make_graph


def observe(g, arm, rewards):
    return RoundObservation(arm, rewards[arm - 1], tuple((j, rewards[j - 1]) for j in g.out_lists[arm]))


class TestInit:
    def test_uniform_weights_mix(self):
        g = make_graph("clique_loops", 2)
        s = exp3g_init(g, DominatingSet((1,)), 100, gamma=0.5)
        assert exp3g_distribution(s).probs == pytest.approx([0.75, 0.25])

    def test_default_rates(self):
        g = make_graph("bar", 4)
        dom = greedy_dominating_set(g)
        T = 10**6
        s = exp3g_init(g, dom, T)
        assert s.gamma == pytest.approx(min(0.5, (4 * 4 * math.log(4) / T) ** (1 / 3)))
        assert s.eta == pytest.approx(min(math.sqrt(s.gamma * math.log(4) / (T * 16)), s.gamma / 4))

    def test_short_horizon_caps_gamma(self):
        g = make_graph("bandit", 3)
        assert exp3g_init(g, greedy_dominating_set(g), 10).gamma == 0.5

    @pytest.mark.parametrize("gamma", [-0.1, 0.6])
    def test_bad_gamma(self, gamma):
        g = make_graph("bandit", 2)
        with pytest.raises(ValueError):
            exp3g_init(g, greedy_dominating_set(g), 10, gamma=gamma)

    def test_bad_horizon(self):
        g = make_graph("bandit", 2)
        with pytest.raises(ValueError):
            exp3g_init(g, greedy_dominating_set(g), 0)


class TestDistribution:
    def test_dominant_weight(self):
        g = make_graph("bandit", 3)
        s = exp3g_init(g, DominatingSet((1, 2, 3)), 100, gamma=0.0)
        s.log_weights = [800.0, 0.0, 0.0]
        assert exp3g_distribution(s).probs == pytest.approx([1.0, 0.0, 0.0])

    def test_dominant_weight_on_explored_arm(self):
        g = make_graph("clique_loops", 3)
        s = exp3g_init(g, DominatingSet((2,)), 100, gamma=0.2)
        s.log_weights = [0.0, 50.0, 0.0]
        assert exp3g_distribution(s).probs == pytest.approx([0.0, 1.0, 0.0], abs=1e-20)

    def test_equal_weights(self):
        g = make_graph("bandit", 3)
        s = exp3g_init(g, DominatingSet((1, 2, 3)), 100, gamma=0.0)
        s.log_weights = [12.5] * 3
        assert exp3g_distribution(s).probs == pytest.approx([1 / 3] * 3)

    def test_huge_weights_stay_finite(self):
        g = make_graph("bandit", 2)
        s = exp3g_init(g, DominatingSet((1, 2)), 100, gamma=0.2)
        s.log_weights = [1e6, 1e6 - 1]
        p = exp3g_distribution(s).probs
        assert all(math.isfinite(x) for x in p) and sum(p) == pytest.approx(1.0)

    def test_exploration_floor(self):
        g = make_graph("bar_augmented", 5)
        dom = greedy_dominating_set(g)
        s = exp3g_init(g, dom, 1000)
        s.log_weights = [0.0, -500.0, -500.0, -500.0, -500.0]
        p = exp3g_distribution(s).probs
        for j in dom:
            assert p[j - 1] >= s.gamma / len(dom) - 1e-15


class TestUpdate:
    def test_single_reward(self):
        g = make_graph("clique_loops", 2)
        s = exp3g_init(g, DominatingSet((1,)), 100, gamma=0.5)
        d = exp3g_distribution(s)
        exp3g_update(s, RoundObservation(2, 0.0, ((1, 1.0), (2, 0.0))), d)
        # the clique reveals everything with probability one
        assert s.log_weights == pytest.approx([s.eta, 0.0])
        assert s.round == 1

    def test_importance_weight(self):
        g = make_graph("bar", 2)
        s = exp3g_init(g, DominatingSet((1, 2)), 100, gamma=0.2)
        d = exp3g_distribution(s)
        assert d.probs == pytest.approx([0.5, 0.5])
        exp3g_update(s, observe(g, 1, [0.0, 1.0]), d)
        assert s.log_weights == pytest.approx([0.0, 2 * s.eta])

    def test_tenfold(self):
        g = make_graph("bandit", 2)
        s = exp3g_init(g, DominatingSet((1, 2)), 100, gamma=0.5)
        d = exp3g_distribution(s)
        d.probs[:] = [0.1, 0.9]
        exp3g_update(s, observe(g, 1, [1.0, 0.0]), d)
        assert s.log_weights[0] == pytest.approx(10 * s.eta)

    def test_zero_probability(self):
        g = make_graph("bandit", 2)
        s = exp3g_init(g, DominatingSet((1, 2)), 100, gamma=0.5)
        d = exp3g_distribution(s)
        d.probs[:] = [0.0, 1.0]
        with pytest.raises(RuntimeError):
            exp3g_update(s, observe(g, 1, [1.0, 0.0]), d)

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from(["bandit", "bar_augmented", "loopless_cycle", "clique_loops"]),
           st.integers(2, 9), st.integers(1, 10**7), st.integers(0, 1000))
    def test_step_is_bounded(self, family, K, T, seed):
        g = make_graph(family, K)
        s = exp3g_init(g, greedy_dominating_set(g), T)
        rng = np.random.default_rng(seed)
        s.log_weights = list(rng.normal(0, 30, K))
        d = exp3g_distribution(s)
        for i in range(1, K + 1):
            q = sum(d.probs[j - 1] for j in g.in_lists[i])
            assert s.eta / q <= 1.0 + 1e-12


@pytest.mark.parametrize("family", ["bandit", "bar_augmented", "loopless_cycle"])
@pytest.mark.parametrize("K", [2, 3, 5])
def test_estimates_unbiased_by_enumeration(family, K):
    g = make_graph(family, K)
    rng = np.random.default_rng(K)
    w = [Fraction(int(x)) for x in rng.integers(1, 30, K)]
    probs = [x / sum(w) for x in w]
    r = [Fraction(int(x), 10) for x in rng.integers(0, 11, K)]
    for i in range(1, K + 1):
        q = sum(probs[j - 1] for j in g.in_lists[i])
        mean = sum(probs[I - 1] * r[i - 1] / q for I in g.in_lists[i])
        assert mean == r[i - 1]


def test_learns_best_arm_under_partial_feedback():
    g = make_graph("bar_augmented", 5)
    pol = Exp3gPolicy(g, greedy_dominating_set(g), 20_000)
    rng = np.random.default_rng(3)
    means = np.array([0.2, 0.2, 0.9, 0.2, 0.2])
    for _ in range(20_000):
        d = pol.distribution()
        arm = int(rng.choice(5, p=np.array(d.probs) / sum(d.probs))) + 1
        r = (rng.random(5) < means).astype(float)
        pol.update(observe(g, arm, r), d)
    assert np.argmax(pol.distribution().probs) == 2
