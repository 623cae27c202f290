"""Safety margin, admissible interval, and the no-arbitrage certificate."""
import math

import numpy as np
import pytest

from jumpkelly import (
    JumpModel,
    admissible_interval,
    check_no_arbitrage,
    is_admissible,
    safety_margin,
)
from jumpkelly.admissible import HULL_TOL, sample_admissible

from conftest import random_market

SHANNON = JumpModel(1.0, [[1.0], [-0.5]], [0.5, 0.5])
ALL_UP = JumpModel(1.0, [[0.01], [0.2]], [0.5, 0.5])


def test_margin_of_zero_rule_is_one_exactly():
    assert safety_margin([0.0], SHANNON) == 1.0
    rng = np.random.default_rng(0)
    for _ in range(10):
        spec = random_market(rng)
        assert safety_margin(np.zeros(spec.n), spec.jumps) == 1.0


def test_margin_values():
    # min(1 + 1.5, 1 - 0.75) and min(1 - 0.02, 1 - 0.4)
    assert safety_margin([1.5], SHANNON) == pytest.approx(0.25)
    assert safety_margin([-2.0], ALL_UP) == pytest.approx(0.6)


def test_margin_empty_support_is_infinite():
    assert safety_margin([3.0], JumpModel.none(1)) == math.inf


def test_margin_dimension_mismatch():
    with pytest.raises(ValueError):
        safety_margin([0.1, 0.2], SHANNON)


def test_interval_examples():
    box = admissible_interval(SHANNON)
    assert (box.lower, box.upper) == (-1.0, 2.0)
    box = admissible_interval(ALL_UP)
    assert box.lower == pytest.approx(-5.0)
    assert box.upper == math.inf
    box = admissible_interval(JumpModel(1.0, [[-0.5], [0.5]], [0.5, 0.5]))
    assert (box.lower, box.upper) == (-2.0, 2.0)


def test_interval_one_sided_supports():
    # all-nonpositive jumps only cap the short side; a single positive atom
    # only caps the long side
    box = admissible_interval(JumpModel(1.0, [[-0.1], [-0.3]], [0.5, 0.5]))
    assert box.lower == -math.inf
    assert box.upper == pytest.approx(1 / 0.3)
    box = admissible_interval(JumpModel(1.0, [[0.2]], [1.0]))
    assert box.lower == pytest.approx(-5.0)
    assert box.upper == math.inf


def test_interval_errors():
    with pytest.raises(ValueError):
        admissible_interval(JumpModel.none(1))
    with pytest.raises(ValueError):
        admissible_interval(JumpModel(1.0, [[0.1, 0.2]], [1.0]))


def test_interval_matches_membership_on_grid():
    for jumps in (SHANNON, ALL_UP):
        box = admissible_interval(jumps)
        lo = box.lower if math.isfinite(box.lower) else -10.0
        hi = box.upper if math.isfinite(box.upper) else 10.0
        width = hi - lo
        for b in np.linspace(lo - 0.2 * width, hi + 0.2 * width, 101):
            assert is_admissible([b], jumps) == box.contains(b), b


def test_no_arbitrage_pass_with_weights():
    report = check_no_arbitrage(SHANNON)
    assert report.passed
    np.testing.assert_allclose(report.weights, [1 / 3, 2 / 3], atol=1e-9)
    assert report.residual <= HULL_TOL


def test_no_arbitrage_fail_with_direction():
    report = check_no_arbitrage(ALL_UP)
    assert not report.passed
    # the profitable direction earns a strictly positive return on every atom
    worst = float(np.min(ALL_UP.returns @ report.direction))
    assert worst > HULL_TOL
    assert report.direction[0] == pytest.approx(1.0)


def test_no_arbitrage_degenerate_zero_atom():
    report = check_no_arbitrage(JumpModel(1.0, [[0.0]], [1.0]))
    assert report.passed
    np.testing.assert_allclose(report.weights, [1.0], atol=1e-9)


def test_no_arbitrage_one_sided_supports_fail():
    # all-down and all-up supports both admit a sure profit direction
    down = check_no_arbitrage(JumpModel(1.0, [[-0.1], [-0.3]], [0.5, 0.5]))
    assert not down.passed and down.direction[0] < 0
    up = check_no_arbitrage(JumpModel(1.0, [[0.2]], [1.0]))
    assert not up.passed and up.direction[0] > 0


def test_no_arbitrage_collinear_atoms():
    # three collinear atoms straddling the origin in 2 stocks
    jumps = JumpModel(1.0, [[0.2, 0.1], [-0.4, -0.2], [0.6, 0.3]], [0.3, 0.4, 0.3])
    report = check_no_arbitrage(jumps)
    assert report.passed
    assert report.residual <= HULL_TOL


def test_no_arbitrage_random_multistock():
    rng = np.random.default_rng(7)
    for _ in range(20):
        spec = random_market(rng)
        report = check_no_arbitrage(spec.jumps)
        assert report.passed
        assert report.residual <= HULL_TOL
        # shifting every atom strictly positive creates arbitrage
        shifted = JumpModel(
            spec.lam, spec.jumps.returns - np.min(spec.jumps.returns, axis=0) + 0.01, spec.jumps.probs
        )
        bad = check_no_arbitrage(shifted)
        assert not bad.passed
        assert float(np.min(shifted.returns @ bad.direction)) > 0


def test_convexity_of_margin():
    rng = np.random.default_rng(11)
    for _ in range(30):
        spec = random_market(rng)
        b, c = sample_admissible(spec.jumps, spec.n, rng, 2)
        theta = rng.uniform()
        mixed = safety_margin(theta * b + (1 - theta) * c, spec.jumps)
        floor = min(safety_margin(b, spec.jumps), safety_margin(c, spec.jumps))
        assert mixed >= floor - 1e-12


def test_openness_of_admissible_set():
    rng = np.random.default_rng(13)
    for _ in range(30):
        spec = random_market(rng)
        (b,) = sample_admissible(spec.jumps, spec.n, rng, 1)
        max_norm = float(np.max(np.linalg.norm(spec.jumps.returns, axis=1)))
        eps = safety_margin(b, spec.jumps) / max_norm
        unit = rng.standard_normal(spec.n)
        unit /= np.linalg.norm(unit)
        assert is_admissible(b + (eps / 2) * unit, spec.jumps)


def test_sampled_rules_are_admissible():
    rng = np.random.default_rng(17)
    for _ in range(10):
        spec = random_market(rng)
        draws = sample_admissible(spec.jumps, spec.n, rng, 25, margin_floor=0.05)
        for b in draws:
            assert safety_margin(b, spec.jumps) > 0.05
