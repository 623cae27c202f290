"""Non-bankruptable rebalancing rules and the no-arbitrage certificate.

A rule b survives every jump iff its worst-case gross jump return
``m(b) = min_k (1 + b . x_k)`` is strictly positive; the admissible set is the
open convex region where that holds. A finite jump support admits no
arbitrage iff the zero vector lies in the convex hull of the net-return
atoms (separating-hyperplane duality: otherwise some direction earns a
strictly positive return on every possible jump).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .market import JumpModel

# absolute tolerance on the hull-membership feasibility residual
HULL_TOL = 1e-10


@dataclass(frozen=True)
class AdmissibleInterval:
    """Open interval of safe fractions for a single-stock market."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < 0 < self.upper:
            raise ValueError("admissible interval must contain 0 strictly")

    def contains(self, b: float) -> bool:
        return self.lower < b < self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class NoArbitrageReport:
    """PASS carries hull weights for the atoms; FAIL carries a profitable direction."""

    passed: bool
    weights: np.ndarray | None
    direction: np.ndarray | None
    residual: float
    statement: str = (
        "0 in convex hull of the jump support is equivalent to "
        "max_b min_x b'x = 0 (separating-hyperplane duality on a compact support)"
    )


def safety_margin(b, jumps: JumpModel) -> float:
    """Worst-case gross return of rule b over the jump support.

    Returns +inf for an empty support (no jumps can occur). A rule is
    admissible iff the margin is strictly positive.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if jumps.n_atoms == 0:
        return math.inf
    if b.shape != (jumps.returns.shape[1],):
        raise ValueError(
            f"rule has dimension {b.shape[0]}, jump atoms have {jumps.returns.shape[1]}"
        )
    return float(np.min(1.0 + jumps.returns @ b))


def is_admissible(b, jumps: JumpModel) -> bool:
    return safety_margin(b, jumps) > 0


def admissible_interval(jumps: JumpModel) -> AdmissibleInterval:
    """The admissible set for a single-stock jump support.

    With worst atoms x_min < 0 < x_max the set is (-1/x_max, -1/x_min);
    an all-nonnegative support is unbounded above, an all-nonpositive one
    unbounded below.
    """
    if jumps.n_atoms == 0:
        raise ValueError("empty atom list has no finite support")
    if jumps.returns.shape[1] != 1:
        raise ValueError("admissible_interval is defined for single-stock markets only")
    x = jumps.returns[:, 0]
    x_max, x_min = float(np.max(x)), float(np.min(x))
    lower = -1.0 / x_max if x_max > 0 else -math.inf
    upper = -1.0 / x_min if x_min < 0 else math.inf
    return AdmissibleInterval(lower, upper)


def check_no_arbitrage(jumps: JumpModel) -> NoArbitrageReport:
    """Certify whether the jump support admits arbitrage.

    Solves the hull-membership feasibility program over atom weights with
    scipy's LP; on infeasibility finds a box-bounded direction whose
    worst-case jump return is strictly positive.
    """
    if jumps.n_atoms == 0:
        raise ValueError("no-arbitrage check needs a nonempty atom list")
    x = jumps.returns  # (K, n)
    k, n = x.shape

    # feasibility: w >= 0, sum w = 1, sum_k w_k x_k = 0
    a_eq = np.vstack([x.T, np.ones((1, k))])
    b_eq = np.concatenate([np.zeros(n), [1.0]])
    res = linprog(np.zeros(k), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * k, method="highs")
    if res.status == 0:
        w = np.asarray(res.x)
        residual = max(
            float(np.max(np.abs(x.T @ w))),
            abs(float(w.sum()) - 1.0),
            max(0.0, -float(w.min())),
        )
        if residual <= HULL_TOL:
            return NoArbitrageReport(True, w, None, residual)

    # infeasible: maximize the worst-case return t over |b_i| <= 1
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-x, np.ones((k, 1))])
    bounds = [(-1, 1)] * n + [(None, None)]
    res2 = linprog(c, A_ub=a_ub, b_ub=np.zeros(k), bounds=bounds, method="highs")
    if res2.status != 0:
        raise RuntimeError("no-arbitrage certificate could not be computed")
    direction = np.asarray(res2.x[:n])
    t_star = float(res2.x[-1])
    if t_star <= HULL_TOL:
        raise RuntimeError("no-arbitrage check inconclusive: hull residual near tolerance")
    return NoArbitrageReport(False, None, direction, t_star)


def sample_admissible(
    jumps: JumpModel,
    n: int,
    rng: np.random.Generator,
    size: int,
    shrink: float = 0.01,
    margin_floor: float = 0.0,
    cap: float = 25.0,
) -> np.ndarray:
    """Draw rules uniformly along random directions through the admissible set.

    Each draw picks a direction z, computes the exact admissible step range
    along z (capped at +-cap where the set is unbounded), pulls the endpoints
    in by ``shrink`` of the range, and samples the step uniformly. Draws are
    rejected until the safety margin is at least ``margin_floor``.
    """
    out = np.empty((size, n))
    have = 0
    while have < size:
        z = rng.standard_normal(n)
        norm = np.linalg.norm(z)
        if norm < 1e-12:
            continue
        z /= norm
        if jumps.n_atoms:
            proj = jumps.returns @ z
            neg = proj[proj < 0]
            pos = proj[proj > 0]
            t_hi = float(np.min(-1.0 / neg)) if neg.size else cap
            t_lo = float(np.max(-1.0 / pos)) if pos.size else -cap
        else:
            t_hi, t_lo = cap, -cap
        t_hi = min(t_hi, cap)
        t_lo = max(t_lo, -cap)
        width = t_hi - t_lo
        t = rng.uniform(t_lo + shrink * width, t_hi - shrink * width)
        b = t * z
        if safety_margin(b, jumps) > max(margin_floor, 0.0):
            out[have] = b
            have += 1
    return out
