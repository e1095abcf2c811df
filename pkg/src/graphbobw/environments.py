"""Reward environments.

Every environment emits the full reward vector for a round; the harness
applies the observation mask. Adversarial environments are oblivious by
construction: their rewards are a pure function of ``(config, t)`` and never
touch the caller's generator.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

REWARD_LAWS = ("bernoulli", "uniform_pm")
GENERATORS = ("table", "mean_switch", "drift")
_BLOCK = 1024


class EnvError(ValueError):
    """Invalid environment configuration or out-of-range round."""


@dataclass(frozen=True)
class StochasticEnv:
    means: tuple
    reward_law: str = "bernoulli"
    width: float = 0.1
    allow_ties: bool = False  # zero-gap sanity instances only

    def __post_init__(self):
        means = tuple(float(m) for m in self.means)
        object.__setattr__(self, "means", means)
        if len(means) < 1:
            raise EnvError("means must be non-empty")
        if any(not 0.0 <= m <= 1.0 for m in means):
            raise EnvError(f"means must lie in [0, 1], got {list(means)}")
        if self.reward_law not in REWARD_LAWS:
            raise EnvError(f"unknown reward_law {self.reward_law!r}")
        if self.width < 0:
            raise EnvError("width must be non-negative")
        top = max(means)
        if not self.allow_ties and sum(1 for m in means if m == top) > 1:
            raise EnvError(f"the best arm must be unique, got means {list(means)}")

    @property
    def K(self) -> int:
        return len(self.means)

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.means)) + 1

    @property
    def gaps(self) -> tuple:
        top = max(self.means)
        return tuple(top - m for m in self.means)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` consecutive reward rows; equal to ``n`` calls of ``reward_vector``."""
        u = rng.random((n, self.K))
        mu = np.asarray(self.means)
        if self.reward_law == "bernoulli":
            return (u < mu).astype(float)
        lo = mu - self.width
        return np.clip(lo + 2.0 * self.width * u, 0.0, 1.0)


@dataclass(frozen=True)
class AdversarialEnv:
    """Oblivious reward sequence.

    ``table``: rows verbatim. ``mean_switch``: Bernoulli rewards whose means
    are ``base_means`` cyclically shifted by one position every
    ``switch_period`` rounds. ``drift``: Bernoulli rewards whose means swing
    smoothly between ``base_means`` and its reversal with period
    ``switch_period``.
    """

    generator: str
    table: np.ndarray | None = field(default=None, compare=False)
    switch_period: int = 1
    base_means: tuple = ()
    seed: int | None = None  # None: drawn from the run seed by the harness

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise EnvError(f"unknown generator {self.generator!r}; expected one of {GENERATORS}")
        if self.generator == "table":
            if self.table is None:
                raise EnvError("table generator needs a table")
            tab = np.array(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[0] < 1 or tab.shape[1] < 1:
                raise EnvError("table must be a non-empty T x K matrix")
            if np.any(tab < 0) or np.any(tab > 1) or not np.all(np.isfinite(tab)):
                raise EnvError("table values must lie in [0, 1]")
            tab.setflags(write=False)
            object.__setattr__(self, "table", tab)
        else:
            base = tuple(float(m) for m in self.base_means)
            if not base or any(not 0.0 <= m <= 1.0 for m in base):
                raise EnvError(f"base_means must be non-empty and lie in [0, 1], got {list(base)}")
            if self.switch_period < 1:
                raise EnvError("switch_period must be at least 1")
            object.__setattr__(self, "base_means", base)

    @property
    def K(self) -> int:
        if self.generator == "table":
            return self.table.shape[1]
        return len(self.base_means)

    @property
    def length(self) -> int | None:
        return self.table.shape[0] if self.generator == "table" else None

    def means_at(self, t: int) -> np.ndarray:
        base = np.asarray(self.base_means)
        if self.generator == "mean_switch":
            return np.roll(base, (t - 1) // self.switch_period)
        if self.generator == "drift":
            w = 0.5 * (1.0 - math.cos(2.0 * math.pi * t / self.switch_period))
            return (1.0 - w) * base + w * base[::-1]
        raise EnvError("means_at is undefined for table environments")

    def rows(self, start: int, stop: int) -> np.ndarray:
        """Reward rows for rounds ``start..stop-1`` (1-indexed)."""
        if start < 1:
            raise EnvError(f"rounds start at 1, got {start}")
        if self.generator == "table":
            if stop - 1 > self.table.shape[0]:
                raise EnvError(f"round {stop - 1} beyond table length {self.table.shape[0]}")
            return self.table[start - 1:stop - 1]
        out = np.empty((stop - start, self.K))
        t = start
        while t < stop:
            b = (t - 1) // _BLOCK
            b_end = min(stop, (b + 1) * _BLOCK + 1)
            u = _noise_block(self.seed, b, self.K)[(t - 1) - b * _BLOCK:(b_end - 1) - b * _BLOCK]
            ts = np.arange(t, b_end)
            if self.generator == "mean_switch":
                shift = (ts - 1) // self.switch_period
                idx = (np.arange(self.K)[None, :] - shift[:, None]) % self.K
                mu = np.asarray(self.base_means)[idx]
            else:
                w = 0.5 * (1.0 - np.cos(2.0 * np.pi * ts / self.switch_period))[:, None]
                base = np.asarray(self.base_means)[None, :]
                mu = (1.0 - w) * base + w * base[:, ::-1]
            out[t - start:b_end - start] = (u < mu).astype(float)
            t = b_end
        return out


@lru_cache(maxsize=16)
def _noise_block(seed, block, K):
    # counter-style keying: block b of seed s is reproducible in isolation
    u = np.random.default_rng([seed or 0, block, 0x0B11]).random((_BLOCK, K))
    u.setflags(write=False)
    return u


def reward_vector(env, t: int, rng: np.random.Generator | None = None) -> np.ndarray:
    if t < 1:
        raise EnvError(f"rounds start at 1, got {t}")
    if isinstance(env, StochasticEnv):
        return env.draw(rng, 1)[0]
    return env.rows(t, t + 1)[0]


def best_fixed_arm(env, up_to: int):
    """Comparator of the regret definitions: ``(arm, cumulative reward)``.

    Stochastic: the best mean times ``up_to``. Adversarial: the arm with
    the largest realised cumulative reward (smallest label on ties).
    """
    if isinstance(env, StochasticEnv):
        arm = env.best_arm
        return arm, up_to * env.means[arm - 1]
    totals = env.rows(1, up_to + 1).sum(axis=0)
    arm = int(np.argmax(totals)) + 1
    return arm, float(totals[arm - 1])


def load_table_csv(path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for n, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                vals = [float(x) for x in row]
            except ValueError:
                raise EnvError(f"{path}: line {n}: non-numeric value") from None
            if rows and len(vals) != len(rows[0]):
                raise EnvError(f"{path}: line {n}: expected {len(rows[0])} columns, got {len(vals)}")
            if any(not 0.0 <= v <= 1.0 for v in vals):
                raise EnvError(f"{path}: line {n}: values must lie in [0, 1]")
            rows.append(vals)
    if not rows:
        raise EnvError(f"{path}: empty table")
    return np.array(rows)


def save_table_csv(table, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in np.asarray(table):
            w.writerow([repr(float(x)) for x in row])


def materialize(env: AdversarialEnv, T: int) -> np.ndarray:
    return env.rows(1, T + 1)


def table_env_from_csv(path) -> AdversarialEnv:
    return AdversarialEnv("table", table=load_table_csv(Path(path)))
