"""Fair randomizations of the initial dollar and the phi-game estimators.

A fair randomization is a nonnegative random wealth with mean at most 1,
exchanged for the initial dollar before play. A performance measure phi is a
nondecreasing function of the players' final wealth ratio. This module
evaluates, by Monte Carlo with explicit standard errors:

  * the primitive game  E[phi(W1 / W2)]            (no market at all)
  * the investment game E[phi(W1 V_t(b) / (W2 V_t(c)))]

using shared simulated paths for the two rules and independent substreams
for every source of randomness. It evaluates supplied randomizations only;
it does not solve for optimal ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .market import MarketSpec
from .simulation import simulate_terminal


@dataclass(frozen=True)
class FairRandomization:
    """Nonnegative random initial wealth with mean at most 1."""

    kind: str  # degenerate | uniform | lognormal | discrete
    s: float = 0.0
    values: np.ndarray | None = None
    probs: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in {"degenerate", "uniform", "lognormal", "discrete"}:
            raise ValueError(f"unknown randomization kind {self.kind!r}")
        if self.kind == "lognormal" and self.s < 0:
            raise ValueError("lognormal scale must be nonnegative")
        if self.kind == "discrete":
            v = np.atleast_1d(np.asarray(self.values, dtype=float))
            p = np.atleast_1d(np.asarray(self.probs, dtype=float))
            v.setflags(write=False)
            p.setflags(write=False)
            object.__setattr__(self, "values", v)
            object.__setattr__(self, "probs", p)
            if v.shape != p.shape or v.size == 0:
                raise ValueError("discrete randomization needs matching values and probs")
            if np.any(v < 0):
                raise ValueError("wealth values must be nonnegative")
            if np.any(p <= 0) or abs(float(p.sum()) - 1.0) > 1e-12:
                raise ValueError("probabilities must be positive and sum to 1")
            if float(v @ p) > 1.0 + 1e-12:
                raise ValueError(f"mean wealth {float(v @ p):.6g} exceeds 1: not fair")

    @classmethod
    def degenerate(cls) -> "FairRandomization":
        """W = 1 with certainty."""
        return cls("degenerate")

    @classmethod
    def uniform(cls) -> "FairRandomization":
        """W ~ uniform(0, 2)."""
        return cls("uniform")

    @classmethod
    def lognormal(cls, s: float) -> "FairRandomization":
        """W = exp(-s^2/2 + s Z) with Z standard normal; mean exactly 1."""
        return cls("lognormal", s=float(s))

    @classmethod
    def discrete(cls, pairs) -> "FairRandomization":
        """W drawn from finite (value, probability) pairs with mean <= 1."""
        values = [v for v, _ in pairs]
        probs = [p for _, p in pairs]
        return cls("discrete", values=np.asarray(values), probs=np.asarray(probs))

    def mean(self) -> float:
        if self.kind == "discrete":
            return float(self.values @ self.probs)
        return 1.0  # degenerate, uniform(0,2) and the compensated lognormal

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "degenerate":
            return np.ones(size)
        if self.kind == "uniform":
            return rng.uniform(0.0, 2.0, size)
        if self.kind == "lognormal":
            return np.exp(-self.s**2 / 2.0 + self.s * rng.standard_normal(size))
        return rng.choice(self.values, size=size, p=self.probs)


@dataclass(frozen=True)
class PerformanceMeasure:
    """Nondecreasing measure of the final wealth ratio."""

    kind: str  # indicator | power | ratio_share
    alpha: float = 1.0
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in {"indicator", "power", "ratio_share"}:
            raise ValueError(f"unknown performance measure kind {self.kind!r}")
        if self.kind == "indicator" and self.alpha <= 0:
            raise ValueError("indicator threshold must be positive")
        if self.kind == "power" and self.exponent < 0:
            raise ValueError("power exponent must be nonnegative")

    @classmethod
    def indicator(cls, alpha: float = 1.0) -> "PerformanceMeasure":
        """1 when the ratio reaches alpha: the probability of (alpha-fold) outperformance."""
        return cls("indicator", alpha=float(alpha))

    @classmethod
    def power(cls, exponent: float) -> "PerformanceMeasure":
        """ratio^exponent; exponent 1 is the raw expected wealth ratio."""
        return cls("power", exponent=float(exponent))

    @classmethod
    def ratio_share(cls) -> "PerformanceMeasure":
        """ratio/(ratio+1): player 1's expected share of the aggregate wealth."""
        return cls("ratio_share")


def evaluate_phi(phi: PerformanceMeasure, ratio):
    """Apply the measure to a wealth ratio (scalar or array, >= 0 or +inf)."""
    ratio = np.asarray(ratio, dtype=float)
    if np.any(ratio < 0):
        raise ValueError("wealth ratios must be nonnegative")
    if phi.kind == "indicator":
        out = (ratio >= phi.alpha).astype(float)
    elif phi.kind == "power":
        out = ratio**phi.exponent
    else:
        finite = np.where(np.isinf(ratio), 1.0, ratio)  # keeps inf/(inf+1) out of the division
        out = np.where(np.isinf(ratio), 1.0, finite / (finite + 1.0))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample mean with its standard error and sample size."""

    estimate: float
    stderr: float
    n: int


def _wealth_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    """Elementwise ratio with x/0 = +inf and the neutral 0/0 = 1 convention."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = numerator / denominator
    tie = (denominator == 0) & (numerator == 0)
    if np.any(tie):
        ratio = np.where(tie, 1.0, ratio)
    return ratio


def _estimate(values: np.ndarray) -> MonteCarloEstimate:
    n = values.size
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MonteCarloEstimate(mean, stderr, n)


def primitive_game_payoff(
    w1: FairRandomization,
    w2: FairRandomization,
    phi: PerformanceMeasure,
    n_samples: int,
    seed: int,
) -> MonteCarloEstimate:
    """Monte Carlo estimate of E[phi(W1 / W2)] with independent draws."""
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    s1, s2 = np.random.SeedSequence(seed).spawn(2)
    draws1 = w1.sample(np.random.default_rng(s1), n_samples)
    draws2 = w2.sample(np.random.default_rng(s2), n_samples)
    return _estimate(evaluate_phi(phi, _wealth_ratio(draws1, draws2)))


def investment_game_payoff(
    w1: FairRandomization,
    w2: FairRandomization,
    b,
    c,
    phi: PerformanceMeasure,
    t: float,
    spec: MarketSpec,
    n_paths: int,
    seed: int,
) -> MonteCarloEstimate:
    """Monte Carlo estimate of E[phi(W1 V_t(b) / (W2 V_t(c)))].

    The two rules share simulated paths; W1 and W2 draw from their own
    substreams, independent of the market randomness.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    path_seed, s1, s2 = np.random.SeedSequence(seed).spawn(3)
    b = np.atleast_1d(np.asarray(b, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    sample = simulate_terminal(spec, np.vstack([b, c]), t, n_paths, seed=path_seed)
    draws1 = w1.sample(np.random.default_rng(s1), n_paths)
    draws2 = w2.sample(np.random.default_rng(s2), n_paths)
    ratio = _wealth_ratio(draws1 * sample.wealth[:, 0], draws2 * sample.wealth[:, 1])
    return _estimate(evaluate_phi(phi, ratio))
