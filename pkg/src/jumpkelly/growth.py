"""Asymptotic growth rate of a rebalancing rule and the Kelly optimizer.

The growth rate of rule b is

    G(b) = r + (mu - r 1)'b - b' cov b / 2 + lam * E[log(1 + b'x)]

with the jump expectation taken exactly over the finite atom support. G is
strictly concave on the admissible set and blows down to -inf at its
boundary, so the maximizer is found by a damped Newton iteration whose line
search never leaves the set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .admissible import check_no_arbitrage, safety_margin
from .market import MarketSpec

NEWTON_RIDGE = 1e-12     # keeps the Newton system invertible for pure-jump markets
BACKTRACK_KAPPA = 0.1    # a step may not shed more than 90% of the safety margin


class InadmissibleRuleError(ValueError):
    """Rule can be bankrupted by a supported jump; names the violating atom."""

    def __init__(self, b: np.ndarray, atom_index: int, gross_return: float):
        self.atom_index = atom_index
        self.gross_return = gross_return
        super().__init__(
            f"rule {np.round(np.atleast_1d(b), 6).tolist()} is not admissible: "
            f"atom {atom_index} gives gross jump return {gross_return:.6g} <= 0"
        )


class ArbitrageError(ValueError):
    """The jump support admits arbitrage, so the growth rate is unbounded."""

    def __init__(self, direction: np.ndarray):
        self.direction = direction
        super().__init__(
            "market admits arbitrage: direction "
            f"{np.round(direction, 6).tolist()} earns a strictly positive return "
            "on every possible jump; the growth rate is unbounded above"
        )


@dataclass(frozen=True)
class KellySolution:
    """Optimizer of the growth rate with convergence diagnostics."""

    b_star: np.ndarray
    growth_rate: float
    gradient_norm: float
    iterations: int
    converged: bool


def _as_rule(b, n: int) -> np.ndarray:
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if b.shape != (n,):
        raise ValueError(f"rule has dimension {b.shape}, market has {n} stocks")
    return b


def _jump_factors(b: np.ndarray, spec: MarketSpec) -> np.ndarray:
    """Gross jump returns 1 + b'x per atom; raises if any is non-positive."""
    factors = 1.0 + spec.jumps.returns @ b
    if factors.size and np.min(factors) <= 0:
        k = int(np.argmin(factors))
        raise InadmissibleRuleError(b, k, float(factors[k]))
    return factors


def growth_rate(b, spec: MarketSpec) -> float:
    """G(b), the almost-sure long-run continuously-compounded growth rate."""
    b = _as_rule(b, spec.n)
    d = spec.diffusion
    value = d.r + (d.mu - d.r) @ b - b @ d.covariance @ b / 2.0
    if spec.lam > 0 and spec.jumps.n_atoms:
        factors = _jump_factors(b, spec)
        value += spec.lam * float(spec.jumps.probs @ np.log(factors))
    return float(value)


def diffusion_growth_rate(b: float, spec: MarketSpec) -> float:
    """Single-stock growth rate with jumps ignored: r + (mu-r) b - sigma^2 b^2 / 2."""
    if spec.n != 1:
        raise ValueError("diffusion_growth_rate is defined for single-stock markets only")
    b = float(b)
    d = spec.diffusion
    return float(d.r + (d.mu[0] - d.r) * b - d.sigma[0] ** 2 * b * b / 2.0)


def growth_gradient(b, spec: MarketSpec) -> np.ndarray:
    """Exact gradient mu - r 1 - cov b + lam * E[x / (1 + b'x)]."""
    b = _as_rule(b, spec.n)
    d = spec.diffusion
    g = d.mu - d.r - d.covariance @ b
    if spec.lam > 0 and spec.jumps.n_atoms:
        factors = _jump_factors(b, spec)
        g = g + spec.lam * ((spec.jumps.probs / factors) @ spec.jumps.returns)
    return g


def growth_hessian(b, spec: MarketSpec) -> np.ndarray:
    """Hessian -cov + lam * D with D = -E[x x' / (1 + b'x)^2]; negative (semi)definite."""
    b = _as_rule(b, spec.n)
    h = -spec.diffusion.covariance
    if spec.lam > 0 and spec.jumps.n_atoms:
        factors = _jump_factors(b, spec)
        w = spec.jumps.probs / factors**2
        x = spec.jumps.returns
        h = h - spec.lam * (x.T * w) @ x
    return h


def solve_kelly(
    spec: MarketSpec,
    tol: float = 1e-10,
    max_iter: int = 100,
    b0=None,
    check_arbitrage: bool = True,
) -> KellySolution:
    """Maximize the growth rate by damped Newton iteration from b0 (default 0).

    Each step solves (cov + ridge - lam D) d = gradient and backtracks the
    step length until the safety margin keeps at least BACKTRACK_KAPPA of its
    current value and the growth rate does not decrease. Terminates when the
    gradient's max-norm drops to ``tol``. Markets whose jump support admits
    arbitrage are refused outright: some leveraged position then profits on
    every possible jump, and without diffusion the objective is unbounded.
    """
    n = spec.n
    if check_arbitrage and spec.jumps.n_atoms:
        report = check_no_arbitrage(spec.jumps)
        if not report.passed:
            raise ArbitrageError(report.direction)

    b = np.zeros(n) if b0 is None else _as_rule(b0, n).copy()
    if spec.jumps.n_atoms:
        _jump_factors(b, spec)  # raises if b0 is inadmissible, naming the atom

    ridge = NEWTON_RIDGE * np.eye(n)
    value = growth_rate(b, spec)
    grad = growth_gradient(b, spec)
    iterations = 0
    for _ in range(max_iter):
        if float(np.max(np.abs(grad))) <= tol:
            break
        system = -growth_hessian(b, spec) + ridge
        direction = np.linalg.solve(system, grad)
        margin = safety_margin(b, spec.jumps)
        alpha = 1.0
        stepped = False
        for _ in range(60):
            candidate = b + alpha * direction
            if safety_margin(candidate, spec.jumps) >= BACKTRACK_KAPPA * margin:
                cand_value = growth_rate(candidate, spec)
                # tolerate one ulp of rounding in the no-decrease test
                if cand_value >= value - 1e-14 * (1.0 + abs(value)):
                    b, value = candidate, cand_value
                    stepped = True
                    break
            alpha /= 2.0
        iterations += 1
        if not stepped:
            break
        grad = growth_gradient(b, spec)

    gradient_norm = float(np.max(np.abs(grad)))
    return KellySolution(
        b_star=b,
        growth_rate=value,
        gradient_norm=gradient_norm,
        iterations=iterations,
        converged=gradient_norm <= tol,
    )
