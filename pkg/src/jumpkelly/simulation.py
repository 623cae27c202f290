"""Exact Monte Carlo simulation of rebalanced-wealth paths.

Between jumps the wealth of rule b is an explicit lognormal functional of the
shared Brownian increments, and each jump multiplies it by the gross jump
return 1 + b'x, so paths are simulated event by event with no time
discretization error: jump times come from exponential interarrivals, jump
outcomes from the atom distribution, and the Brownian vector advances exactly
over each inter-event segment. The ``dt`` in the configuration only controls
where the path is sampled for output.

One realization drives every rule: rules consume no randomness, so adding or
removing one never perturbs the path. Jump times, jump outcomes, and
diffusion each draw from their own substream of the seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .admissible import safety_margin
from .growth import InadmissibleRuleError, _as_rule, _jump_factors
from .market import MarketSpec


@dataclass(frozen=True)
class RebalancingRule:
    """Named point in R^n: fixed wealth fractions held in each stock."""

    name: str
    fractions: np.ndarray

    def __post_init__(self):
        f = np.atleast_1d(np.asarray(self.fractions, dtype=float))
        f.setflags(write=False)
        object.__setattr__(self, "fractions", f)


@dataclass(frozen=True)
class PathConfig:
    """Simulation run description: horizon, output step, seed, rules."""

    horizon: float
    dt: float
    seed: int
    rules: tuple[RebalancingRule, ...]
    allow_inadmissible: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not 0 < self.dt <= self.horizon:
            raise ValueError("dt must satisfy 0 < dt <= horizon")
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            raise ValueError("rule names must be unique")
        if not self.rules:
            raise ValueError("at least one rule is required")

    def check_rules(self, spec: MarketSpec) -> None:
        """Refuse inadmissible rules unless explicitly overridden."""
        for rule in self.rules:
            b = _as_rule(rule.fractions, spec.n)
            if not self.allow_inadmissible and spec.jumps.n_atoms:
                _jump_factors(b, spec)  # raises InadmissibleRuleError


@dataclass(frozen=True)
class WealthPathSet:
    """One shared realization sampled on the output grid, per rule.

    ``wealth[i, k]`` is rule i's wealth at ``times[k]`` (1 at time 0; 0 after
    bankruptcy, which only an explicitly allowed inadmissible rule can hit).
    ``brownian[j, k]`` stores the driving Brownian motion of stock j so paths
    can be reconstructed exactly. ``n_jumps``/``n_up`` count all jumps and
    first-stock upward jumps in [0, times[k]].
    """

    times: np.ndarray
    wealth: np.ndarray
    brownian: np.ndarray
    jump_times: np.ndarray
    jump_outcomes: np.ndarray
    n_jumps: np.ndarray
    n_up: np.ndarray
    rule_names: tuple[str, ...]
    bankrupt: tuple[bool, ...]
    horizon: float

    def index_of(self, name: str) -> int:
        try:
            return self.rule_names.index(name)
        except ValueError:
            raise KeyError(f"no rule named {name!r}") from None

    def wealth_for(self, name: str) -> np.ndarray:
        return self.wealth[self.index_of(name)]


def _correlation_factor(rho: np.ndarray) -> np.ndarray:
    """Matrix A with A A' = rho; tolerates positive-semidefinite rho."""
    try:
        return np.linalg.cholesky(rho)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(rho)
        return v * np.sqrt(np.clip(w, 0.0, None))


def _sample_jump_times(rng: np.random.Generator, lam: float, horizon: float) -> np.ndarray:
    if lam <= 0:
        return np.zeros(0)
    times = []
    t = rng.exponential(1.0 / lam)
    while t <= horizon:
        times.append(t)
        t += rng.exponential(1.0 / lam)
    return np.array(times)


def simulate(spec: MarketSpec, config: PathConfig) -> WealthPathSet:
    """Generate one exact shared-randomness realization for every rule."""
    config.check_rules(spec)
    n, lam = spec.n, spec.lam
    d = spec.diffusion
    rules = np.vstack([_as_rule(r.fractions, n) for r in config.rules])
    m = rules.shape[0]

    jump_rng, outcome_rng, diff_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(3)
    )

    jump_times = _sample_jump_times(jump_rng, lam, config.horizon)
    if jump_times.size:
        outcomes = outcome_rng.choice(
            spec.jumps.n_atoms, size=jump_times.size, p=spec.jumps.probs
        )
    else:
        outcomes = np.zeros(0, dtype=int)

    n_steps = int(math.floor(config.horizon / config.dt + 1e-9))
    out_times = np.arange(n_steps + 1) * config.dt
    if out_times[-1] < config.horizon - 1e-12 * max(1.0, config.horizon):
        out_times = np.append(out_times, config.horizon)

    # chronological event list; jumps sort before outputs at equal times
    events = [(t, 0, k) for k, t in enumerate(jump_times)]
    events += [(t, 1, k) for k, t in enumerate(out_times)]
    events.sort()

    cov = d.covariance
    drifts = d.r + rules @ (d.mu - d.r) - np.einsum("ij,jk,ik->i", rules, cov, rules) / 2.0
    vols = rules * d.sigma  # (m, n): per-rule Brownian loadings
    factor = _correlation_factor(d.rho)

    wealth = np.empty((m, out_times.size))
    brownian = np.empty((n, out_times.size))
    jumps_seen = np.empty(out_times.size, dtype=int)
    ups_seen = np.empty(out_times.size, dtype=int)

    log_v = np.zeros(m)
    w_cum = np.zeros(n)
    bankrupt = np.zeros(m, dtype=bool)
    prev = 0.0
    jump_count = up_count = 0
    for t_ev, kind, idx in events:
        delta = t_ev - prev
        if delta > 0:
            dw = factor @ diff_rng.standard_normal(n) * math.sqrt(delta)
            w_cum = w_cum + dw
            log_v = log_v + drifts * delta + vols @ dw
        prev = t_ev
        if kind == 0:
            x = spec.jumps.returns[outcomes[idx]]
            gross = 1.0 + rules @ x
            hit = gross <= 0
            safe = np.where(hit, 1.0, gross)
            log_v = log_v + np.log(safe)
            bankrupt |= hit
            jump_count += 1
            up_count += int(x[0] > 0)
        else:
            wealth[:, idx] = np.where(bankrupt, 0.0, np.exp(log_v))
            brownian[:, idx] = w_cum
            jumps_seen[idx] = jump_count
            ups_seen[idx] = up_count

    return WealthPathSet(
        times=out_times,
        wealth=wealth,
        brownian=brownian,
        jump_times=jump_times,
        jump_outcomes=outcomes,
        n_jumps=jumps_seen,
        n_up=ups_seen,
        rule_names=tuple(r.name for r in config.rules),
        bankrupt=tuple(bool(f) for f in bankrupt),
        horizon=config.horizon,
    )


def empirical_growth_rate(paths: WealthPathSet, rule: str) -> float:
    """Realized continuously-compounded growth rate log V_T / T for one rule.

    A bankrupt rule returns -inf (its flag is on the path set).
    """
    i = paths.index_of(rule)
    if paths.bankrupt[i]:
        return -math.inf
    return float(np.log(paths.wealth[i, -1]) / paths.horizon)


@dataclass(frozen=True)
class TerminalSample:
    """Terminal wealths of several rules on shared paths, for statistics."""

    t: float
    wealth: np.ndarray   # (n_paths, n_rules)
    n_jumps: np.ndarray  # per path
    n_up: np.ndarray     # per path, first-stock upward jumps


def simulate_terminal(
    spec: MarketSpec,
    rules,
    t: float,
    n_paths: int,
    seed: int | np.random.SeedSequence,
    allow_inadmissible: bool = False,
) -> TerminalSample:
    """Vectorized draw of V_t for every rule on ``n_paths`` shared paths.

    Jump times never enter the terminal wealth, so only the jump count, the
    outcome draws, and the terminal Brownian vector are sampled. Rules must
    be admissible unless ``allow_inadmissible``; a disallowed jump then zeroes
    the wealth of the affected paths.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    n = spec.n
    rules = np.atleast_2d(np.asarray(rules, dtype=float))
    if rules.shape[1] != n:
        raise ValueError(f"rules have dimension {rules.shape[1]}, market has {n} stocks")
    if not allow_inadmissible:
        for b in rules:
            if spec.jumps.n_atoms and safety_margin(b, spec.jumps) <= 0:
                _jump_factors(b, spec)  # raises with the violating atom

    rng = np.random.default_rng(seed)
    lam_t = spec.lam * t
    if lam_t > 0:
        counts = rng.poisson(lam_t, n_paths)
    else:
        counts = np.zeros(n_paths, dtype=int)
    total = int(counts.sum())
    if total and spec.jumps.n_atoms:
        outcomes = rng.choice(spec.jumps.n_atoms, size=total, p=spec.jumps.probs)
    else:
        outcomes = np.zeros(0, dtype=int)
    path_idx = np.repeat(np.arange(n_paths), counts)

    d = spec.diffusion
    factor = _correlation_factor(d.rho)
    w_t = rng.standard_normal((n_paths, n)) @ factor.T * math.sqrt(t)

    cov = d.covariance
    log_v = np.empty((n_paths, rules.shape[0]))
    for j, b in enumerate(rules):
        drift = d.r + (d.mu - d.r) @ b - b @ cov @ b / 2.0
        col = drift * t + w_t @ (b * d.sigma)
        if total:
            gross = 1.0 + spec.jumps.returns @ b
            atom_log = np.where(gross > 0, np.log(np.where(gross > 0, gross, 1.0)), -np.inf)
            col = col + np.bincount(path_idx, weights=atom_log[outcomes], minlength=n_paths)
        log_v[:, j] = col

    if total and spec.jumps.n_atoms:
        up_mask = (spec.jumps.returns[:, 0] > 0)[outcomes].astype(float)
        n_up = np.bincount(path_idx, weights=up_mask, minlength=n_paths).astype(int)
    else:
        n_up = np.zeros(n_paths, dtype=int)

    return TerminalSample(t=t, wealth=np.exp(log_v), n_jumps=counts, n_up=n_up)
