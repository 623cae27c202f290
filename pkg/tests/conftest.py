"""Shared fixtures: the example market and a random valid-market generator."""
import numpy as np
import pytest

from jumpkelly import DiffusionParams, JumpModel, MarketSpec, example_market, solve_kelly


@pytest.fixture(scope="session")
def spec() -> MarketSpec:
    return example_market()


@pytest.fixture(scope="session")
def kelly_solution(spec):
    return solve_kelly(spec)


@pytest.fixture(scope="session")
def b_star(kelly_solution) -> float:
    return float(kelly_solution.b_star[0])


def random_market(rng: np.random.Generator, n: int | None = None) -> MarketSpec:
    """A random valid, arbitrage-free market.

    Jump atoms are mean-centered so the zero vector is their equal-weight
    average, which certifies hull membership (no arbitrage) by construction.
    """
    n = n if n is not None else int(rng.integers(1, 4))
    a = rng.standard_normal((n, n + 2))
    c = a @ a.T
    dinv = 1.0 / np.sqrt(np.diag(c))
    rho = c * np.outer(dinv, dinv)
    rho = (rho + rho.T) / 2.0
    np.fill_diagonal(rho, 1.0)
    sigma = rng.uniform(0.05, 0.4, n)
    r = rng.uniform(0.0, 0.05)
    mu = r + rng.uniform(-0.05, 0.15, n)
    lam = rng.uniform(0.2, 2.0)
    k = int(rng.integers(2, 5))
    raw = rng.uniform(-0.3, 0.6, (k, n))
    atoms = raw - raw.mean(axis=0)
    probs = rng.dirichlet(np.ones(k))
    return MarketSpec(
        DiffusionParams(n=n, mu=mu, sigma=sigma, rho=rho, r=r),
        JumpModel(lam, atoms, probs),
    )
