"""Two-player wealth-ratio game: payoff kernel and saddle verification.

The expected final-wealth ratio of two rules compounds at the rate

    pi(b, c) = (mu - r 1 - cov c + lam E[x / (1 + c'x)]) . (b - c),

which is the growth gradient at c dotted with (b - c). pi is linear in b and
convex in c, and both players sitting at the Kelly rule is its unique saddle
point: the coefficient vector vanishes there, making pi(. , b*) identically
zero, while pi(b*, .) is nonnegative everywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .admissible import admissible_interval, sample_admissible
from .growth import growth_gradient, solve_kelly
from .market import MarketSpec

# pass thresholds for the numerical saddle check
SADDLE_ZERO_TOL = 1e-9
GRID_SHRINK = 0.01
UNBOUNDED_CAP = 25.0


@dataclass(frozen=True)
class SaddleReport:
    """Grid evidence that the Kelly rule is the saddle point."""

    b_star: np.ndarray
    max_abs_pi_along_b: float
    min_pi_along_c: float
    argmin_c: np.ndarray
    grid: str

    @property
    def passed(self) -> bool:
        return (
            self.max_abs_pi_along_b <= SADDLE_ZERO_TOL
            and self.min_pi_along_c >= -SADDLE_ZERO_TOL
        )


def payoff_kernel(b, c, spec: MarketSpec) -> float:
    """Compound growth rate of the expected wealth ratio of rule b over rule c."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    return float(growth_gradient(c, spec) @ (b - c))


def expected_wealth_ratio(b, c, t: float, spec: MarketSpec) -> float:
    """E[V_t(b) / V_t(c)] = exp(pi(b, c) * t)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return math.exp(payoff_kernel(b, c, spec) * t)


def saddle_surface(spec: MarketSpec, b_grid, c_grid) -> np.ndarray:
    """Matrix of 100 * pi(b_i, c_j) over the given admissible grids.

    An inadmissible grid point is reported by index and value via the
    underlying gradient's domain error.
    """
    b_grid = np.asarray(b_grid, dtype=float)
    c_grid = np.asarray(c_grid, dtype=float)
    if spec.n != 1:
        raise ValueError("saddle_surface grids are scalar; use n = 1 markets")
    surface = np.empty((b_grid.size, c_grid.size))
    for jdx, c in enumerate(c_grid):
        coeff = growth_gradient([c], spec)[0]
        surface[:, jdx] = 100.0 * coeff * (b_grid - c)
    return surface


def admissible_grid(spec: MarketSpec, grid_points: int) -> np.ndarray:
    """Evenly spaced single-stock grid pulled in 1% from the boundary.

    Infinite interval ends are capped so the grid stays finite.
    """
    if spec.n != 1:
        raise ValueError("grid construction needs a single-stock market")
    if spec.jumps.n_atoms:
        interval = admissible_interval(spec.jumps)
        lo, hi = interval.lower, interval.upper
    else:
        lo, hi = -math.inf, math.inf
    lo = max(lo, -UNBOUNDED_CAP)
    hi = min(hi, UNBOUNDED_CAP)
    width = hi - lo
    return np.linspace(lo + GRID_SHRINK * width, hi - GRID_SHRINK * width, grid_points)


def verify_saddle(
    spec: MarketSpec,
    grid_points: int = 201,
    tol: float = 1e-10,
    seed: int = 0,
) -> SaddleReport:
    """Solve for the Kelly rule and check the saddle inequalities on a grid.

    Along b (opponent at the Kelly rule) the kernel must vanish identically;
    along c (we hold the Kelly rule) it must be nonnegative, with its minimum
    at the Kelly rule itself. Multi-stock markets are checked on random
    admissible draws instead of a grid (10x the requested point count).
    """
    solution = solve_kelly(spec, tol=tol)
    b_star = solution.b_star

    if spec.n == 1:
        grid = admissible_grid(spec, grid_points).reshape(-1, 1)
        desc = f"{grid_points}-point grid, {GRID_SHRINK:.0%} inside the admissible interval"
    else:
        rng = np.random.default_rng(seed)
        grid = sample_admissible(
            spec.jumps, spec.n, rng, size=10 * grid_points, shrink=GRID_SHRINK
        )
        desc = f"{10 * grid_points} random admissible draws (seed {seed})"

    coeff_at_star = growth_gradient(b_star, spec)
    pi_along_b = (grid - b_star) @ coeff_at_star
    pi_along_c = np.array([payoff_kernel(b_star, c, spec) for c in grid])
    k_min = int(np.argmin(pi_along_c))
    return SaddleReport(
        b_star=b_star,
        max_abs_pi_along_b=float(np.max(np.abs(pi_along_b))),
        min_pi_along_c=float(pi_along_c[k_min]),
        argmin_c=grid[k_min],
        grid=desc,
    )
