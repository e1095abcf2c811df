"""Best-of-both-worlds online learning with general directed feedback graphs."""
from .bobw import BobwParams, BobwPolicy, BobwState, gamma_schedule
from .environments import AdversarialEnv, StochasticEnv
from .exp3g import Exp3gPolicy, exp3g_init
from .graph import DominatingSet, FeedbackGraph, greedy_dominating_set, make_graph
from .harness import RunConfig, run_once, run_replicated

__all__ = [
    "AdversarialEnv", "BobwParams", "BobwPolicy", "BobwState", "DominatingSet", "Exp3gPolicy",
    "FeedbackGraph", "RunConfig", "StochasticEnv", "exp3g_init", "gamma_schedule", "greedy_dominating_set",
    "make_graph", "run_once", "run_replicated",
]
